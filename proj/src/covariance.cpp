#include "berry/covariance.hpp"
#include "berry/errors.hpp"
#include "berry/squeezing.hpp"

#include <algorithm>
#include <cmath>

namespace berry {

MomentSet& MomentSet::operator+=(const MomentSet& o) {
    first += o.first;
    second += o.second;
    return *this;
}

MomentSet& MomentSet::operator*=(double s) {
    first *= s;
    second *= s;
    return *this;
}

MomentSet state_moments(const SectoredState& psi) {
    MomentSet m;
    m.N = psi.N();
    std::array<SectoredState, 9> phi;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) {
            Mat3c M = Mat3c::Zero();
            M(mu, nu) = 1.0;
            phi[pair_index(mu, nu)] = apply_bilinear(psi, M, true);
        }
    for (int p = 0; p < 9; ++p) m.first(p) = inner(psi, phi[p]);
    // <B_{mu nu} B_{rho sigma}> = <B_{nu mu} psi | B_{rho sigma} psi>
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) {
            const auto& bra = phi[pair_index(nu, mu)];
            for (int q = 0; q < 9; ++q) m.second(pair_index(mu, nu), q) = inner(bra, phi[q]);
        }
    return m;
}

namespace {

// Weights w such that X = sum_p w_p B_p for B'_{ab} = c_a^dag c_b.
Vec9c rotated_pair(const ModeRotation& r, int a, int b) {
    Vec9c w;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) w(pair_index(mu, nu)) = r.V(a, mu) * std::conj(r.V(b, nu));
    return w;
}

double min_eig2(double a, double b, double c) {
    const double m = 0.5 * (a + c), d = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return m - d;
}

} // namespace

ModeRotation bloch_aligned_rotation(const MomentSet& m) {
    // rho1(nu, mu) = <a^dag_mu a_nu>
    Mat3c rho;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) rho(nu, mu) = m.first(pair_index(mu, nu));
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat3c> es(rho);
    Eigen::Vector3cd c = es.eigenvectors().col(2);
    Eigen::Vector3cd up = Eigen::Vector3cd::Zero();
    up(kUp) = 1.0;
    Eigen::Vector3cd s = up - c * c.dot(up);
    if (s.norm() < 1e-12) {
        Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
        e(kExc) = 1.0;
        s = e - c * c.dot(e);
    }
    s.normalize();
    Eigen::Vector3cd j = c.conjugate().cross(s.conjugate());
    j.normalize();
    ModeRotation r;
    r.V.row(0) = c.transpose();
    r.V.row(1) = s.transpose();
    r.V.row(2) = j.transpose();
    return r;
}

CovarianceReport covariance_report(const MomentSet& m, const ModeRotation& r) {
    constexpr int C = 0, S = 1, J = 2;
    const cplx I(0.0, 1.0);
    const Vec9c cj = rotated_pair(r, C, J), jc = rotated_pair(r, J, C);
    const Vec9c cs = rotated_pair(r, C, S), sc = rotated_pair(r, S, C);
    std::array<Vec9c, 4> X = {(cj + jc) / 2.0, (cj - jc) / (2.0 * I), (cs + sc) / 2.0, (cs - sc) / (2.0 * I)};

    const double Nc = (rotated_pair(r, C, C).transpose() * m.first)(0).real();
    if (!(Nc > 0.0)) throw DegenerateError("non-positive <N_c>");

    std::array<double, 4> mean{};
    for (int a = 0; a < 4; ++a) mean[a] = (X[a].transpose() * m.first)(0).real();

    CovarianceReport rep;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            const cplx ab = (X[a].transpose() * m.second * X[b])(0);
            const cplx ba = (X[b].transpose() * m.second * X[a])(0);
            const double v = 0.5 * (ab + ba).real() - mean[a] * mean[b];
            rep.C(a, b) = rep.C(b, a) = v;
        }
    rep.blochLength = 0.5 * Nc;
    const double scale = m.N / (rep.blochLength * rep.blochLength);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(scale * rep.C, Eigen::EigenvaluesOnly);
    for (int k = 0; k < 4; ++k) rep.eigenvalues[k] = es.eigenvalues()(k);
    rep.xi2 = rep.eigenvalues[0];
    rep.xi2dB = to_dB(rep.xi2);
    rep.blockC_cs[0] = rep.C(2, 2);
    rep.blockC_cs[1] = rep.C(2, 3);
    rep.blockC_cs[2] = rep.C(3, 3);
    rep.xi2SBlock = scale * min_eig2(rep.C(2, 2), rep.C(2, 3), rep.C(3, 3));
    rep.xi2SBlockdB = to_dB(rep.xi2SBlock);
    return rep;
}

double updown_squeezing(const MomentSet& m) {
    const cplx I(0.0, 1.0);
    Vec9c ud = Vec9c::Zero(), du = Vec9c::Zero(), uu = Vec9c::Zero(), dd = Vec9c::Zero();
    ud(pair_index(kUp, kDown)) = 1.0;
    du(pair_index(kDown, kUp)) = 1.0;
    uu(pair_index(kUp, kUp)) = 1.0;
    dd(pair_index(kDown, kDown)) = 1.0;
    std::array<Vec9c, 3> S = {(ud + du) / 2.0, (ud - du) / (2.0 * I), (uu - dd) / 2.0};

    Eigen::Vector3d mean;
    for (int a = 0; a < 3; ++a) mean(a) = (S[a].transpose() * m.first)(0).real();
    Eigen::Matrix3d cov;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const cplx ab = (S[a].transpose() * m.second * S[b])(0);
            const cplx ba = (S[b].transpose() * m.second * S[a])(0);
            cov(a, b) = cov(b, a) = 0.5 * (ab + ba).real() - mean(a) * mean(b);
        }
    return wineland(mean, cov, m.N);
}

double wineland(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov, double N) {
    const double len = mean.norm();
    if (!(len > 0.0)) throw DegenerateError("zero spin length");
    const Eigen::Vector3d n = mean / len;
    Eigen::Vector3d a = std::abs(n(2)) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    Eigen::Vector3d e1 = (a - n * n.dot(a)).normalized();
    Eigen::Vector3d e2 = n.cross(e1);
    const double v11 = e1.dot(cov * e1), v12 = e1.dot(cov * e2), v22 = e2.dot(cov * e2);
    return N * min_eig2(v11, v12, v22) / (len * len);
}

double e_fraction(const MomentSet& m) { return m.first(pair_index(kExc, kExc)).real() / m.N; }

} // namespace berry
