#pragma once

#include "berry/sectored_state.hpp"

#include <Eigen/Dense>

#include <array>

namespace berry {

// Index of the bilinear a^dag_mu a_nu in the flattened 9-vector.
constexpr int pair_index(int mu, int nu) { return 3 * mu + nu; }

using Mat9c = Eigen::Matrix<cplx, 9, 9>;
using Vec9c = Eigen::Matrix<cplx, 9, 1>;

// first(pair(mu,nu)) = <a^dag_mu a_nu>;
// second(pair(mu,nu), pair(rho,sigma)) = <a^dag_mu a_nu a^dag_rho a_sigma>.
struct MomentSet {
    double N = 0.0;
    Vec9c first = Vec9c::Zero();
    Mat9c second = Mat9c::Zero();

    MomentSet& operator+=(const MomentSet& o);
    MomentSet& operator*=(double s);
};

MomentSet state_moments(const SectoredState& psi);

struct CovarianceReport {
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    double blockC_cs[3] = {0, 0, 0}; // (X3X3, X3X4, X4X4)
    double blochLength = 0.0;
    std::array<double, 4> eigenvalues{};
    double xi2 = NAN;
    double xi2dB = NAN;
    double xi2SBlock = NAN;
    double xi2SBlockdB = NAN;
};

// Rotation whose c mode is the dominant eigenvector of the single-particle
// density matrix and whose s mode is the normalized projection of |up>
// orthogonal to c.
ModeRotation bloch_aligned_rotation(const MomentSet& m);

CovarianceReport covariance_report(const MomentSet& m, const ModeRotation& r);

// Wineland parameter of the (up, down) pseudo-spin, normalized by total N.
double updown_squeezing(const MomentSet& m);

double e_fraction(const MomentSet& m);

// N * min perpendicular variance / |<S>|^2 for a 3-component spin.
double wineland(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov, double N);

} // namespace berry
