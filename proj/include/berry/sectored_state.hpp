#pragma once

#include "berry/ode.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace berry {

using Mat3c = Eigen::Matrix<cplx, 3, 3>;

// Mode order used for bilinears a^dag_mu a_nu.
enum Mode : int { kDown = 0, kExc = 1, kUp = 2 };

// Symmetric three-mode Fock amplitudes, one contiguous block per sector N_J in
// [lo, hi]; block entry n_e maps to |n_down = N_J - n_e, n_up = N - N_J, n_e>.
class SectoredState {
public:
    SectoredState() = default;
    SectoredState(int N, int lo, int hi);

    int N() const { return N_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    int sectors() const { return hi_ - lo_ + 1; }
    std::size_t size() const { return data_.size(); }

    cplx* sector(int NJ) { return data_.data() + offset_[NJ - lo_]; }
    const cplx* sector(int NJ) const { return data_.data() + offset_[NJ - lo_]; }
    std::size_t offset(int NJ) const { return offset_[NJ - lo_]; }
    bool contains(int NJ) const { return NJ >= lo_ && NJ <= hi_; }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    double norm2() const;
    double sector_norm2(int NJ) const;
    void normalize();

    // Norm^2 of amplitudes discarded by window-restricted operations.
    double leakage = 0.0;

private:
    int N_ = 0, lo_ = 0, hi_ = -1;
    std::vector<std::size_t> offset_;
    std::vector<cplx> data_;
};

// Binomial superposition of sectors N/2 +- dN, all at n_e = 0.
SectoredState init_state(int N, int dN, double varphi);

// sum_{mu nu} M(mu,nu) a^dag_mu a_nu |psi>. With extend, the output window
// grows by one sector on each side (clamped to [0, N]) so no amplitude is lost;
// otherwise the input window is kept and dropped norm^2 goes to leakage.
SectoredState apply_bilinear(const SectoredState& psi, const Mat3c& M, bool extend = false);

// <a|b> over the union of windows.
cplx inner(const SectoredState& a, const SectoredState& b);

// Mode rotation from (d, e, u) to (c, s, j): row r holds the coefficients of
// the new creation operator in terms of d^dag, e^dag, u^dag.
struct ModeRotation {
    Mat3c V = Mat3c::Identity();

    static ModeRotation from_angles(double theta, double phi, double fJ = 0.5, double fUp = 0.5);
    double unitarity_error() const;
};

} // namespace berry
