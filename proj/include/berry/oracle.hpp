#pragma once

#include "berry/covariance.hpp"
#include "berry/effective.hpp"
#include "berry/params.hpp"
#include "berry/sectored_state.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <vector>

namespace berry {

using MatXc = Eigen::MatrixXcd;

// Enumerated symmetric three-mode Fock basis |n_down, n_up, n_e>, grouped by
// N_J = n_down + n_e.
class ThreeLevelBasis {
public:
    explicit ThreeLevelBasis(int N);

    int N() const { return N_; }
    int dim() const { return int(states_.size()); }
    const std::array<int, 3>& state(int i) const { return states_[i]; }
    int index(int nDown, int nUp, int nE) const;
    int block_start(int NJ) const { return start_[NJ]; }
    int block_size(int NJ) const { return NJ + 1; }

    // Dense matrix of a^dag_mu a_nu, mode order (down, e, up).
    MatXc bilinear(int mu, int nu) const;

private:
    int N_;
    std::vector<std::array<int, 3>> states_; // (n_down, n_e, n_up)
    std::map<std::array<int, 3>, int> lookup_;
    std::vector<int> start_;
};

std::vector<cplx> product_state(const ThreeLevelBasis& b, double varphi);
std::vector<cplx> from_sectored(const ThreeLevelBasis& b, const SectoredState& s);

struct ThreeLevelResult {
    std::vector<double> times;
    std::vector<MomentSet> moments;
    std::vector<double> traceError;
    double maxHermiticityError = 0.0;
    double minEigenvalue = 0.0;
    double crossBlockLeakage = 0.0;
};

// Dense block-wise integration of the three-level master equation with
// H = -delta N_e, l = J^- + i Omega / Gamma (Omega -> 0 after tOff).
ThreeLevelResult lindblad_threelevel(const EffectiveSpinParams& p, const std::vector<cplx>& psi0,
                                     const std::vector<double>& times, double tOff, OdeTolerance tol = {1e-10, 1e-12});

struct EffectiveOracleResult {
    std::vector<double> times;
    std::vector<double> xi2;
    std::vector<Eigen::Vector3d> meanS;
    std::vector<double> traceError;
};

// Permutation-symmetric integration of chi S_z^2, collective dephasing
// GammaCheck D[S_z], gammaD D[|1><1|] and gammaMinus D[|0><1|] per atom, from
// the coherent state along x. Dimension C(N+3, 3).
EffectiveOracleResult lindblad_effective(const TwistingModel& m, int N, const std::vector<double>& times,
                                         OdeTolerance tol = {1e-10, 1e-13});

} // namespace berry
