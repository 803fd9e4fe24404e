#include "berry/errors.hpp"
#include "berry/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace berry {

ThreeLevelBasis::ThreeLevelBasis(int N) : N_(N) {
    if (N < 1) throw DimensionError("N must be >= 1");
    if (N > 12) throw DimensionError("three-level oracle limited to N <= 12");
    for (int NJ = 0; NJ <= N; ++NJ) {
        start_.push_back(int(states_.size()));
        for (int nE = 0; nE <= NJ; ++nE) {
            const std::array<int, 3> occ{NJ - nE, nE, N - NJ};
            lookup_[occ] = int(states_.size());
            states_.push_back(occ);
        }
    }
}

int ThreeLevelBasis::index(int nDown, int nUp, int nE) const {
    auto it = lookup_.find({nDown, nE, nUp});
    return it == lookup_.end() ? -1 : it->second;
}

MatXc ThreeLevelBasis::bilinear(int mu, int nu) const {
    MatXc B = MatXc::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) {
        std::array<int, 3> occ = states_[i];
        if (occ[nu] == 0) continue;
        double amp = std::sqrt(double(occ[nu]));
        occ[nu] -= 1;
        amp *= std::sqrt(occ[mu] + 1.0);
        occ[mu] += 1;
        B(lookup_.at(occ), i) += amp;
    }
    return B;
}

std::vector<cplx> product_state(const ThreeLevelBasis& b, double varphi) {
    const int N = b.N();
    std::vector<cplx> psi(b.dim(), 0.0);
    for (int nd = 0; nd <= N; ++nd) {
        const double lb = std::lgamma(N + 1.0) - std::lgamma(nd + 1.0) - std::lgamma(N - nd + 1.0);
        psi[b.index(nd, N - nd, 0)] = std::polar(std::exp(0.5 * lb - 0.5 * N * std::log(2.0)), nd * varphi);
    }
    return psi;
}

std::vector<cplx> from_sectored(const ThreeLevelBasis& b, const SectoredState& s) {
    std::vector<cplx> psi(b.dim(), 0.0);
    for (int NJ = s.lo(); NJ <= s.hi(); ++NJ)
        for (int nE = 0; nE <= NJ; ++nE) psi[b.index(NJ - nE, s.N() - NJ, nE)] = s.sector(NJ)[nE];
    return psi;
}

namespace {

double off_block_norm(const ThreeLevelBasis& b, const MatXc& A) {
    double s = 0.0;
    for (int NJ = 0; NJ <= b.N(); ++NJ)
        for (int NK = 0; NK <= b.N(); ++NK) {
            if (NJ == NK) continue;
            s += A.block(b.block_start(NJ), b.block_start(NK), NJ + 1, NK + 1).squaredNorm();
        }
    return std::sqrt(s);
}

} // namespace

ThreeLevelResult lindblad_threelevel(const EffectiveSpinParams& p, const std::vector<cplx>& psi0,
                                     const std::vector<double>& times, double tOff, OdeTolerance tol) {
    const int N = int(std::lround(p.N));
    const ThreeLevelBasis b(N);
    if (int(psi0.size()) != b.dim()) throw DimensionError("initial state dimension mismatch");
    if (times.empty() || times.front() != 0.0) throw InvalidParameter("times must start at 0");
    const int D = b.dim(), S = N + 1;
    const cplx I(0.0, 1.0);

    std::array<MatXc, 9> B;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) B[pair_index(mu, nu)] = b.bilinear(mu, nu);
    const MatXc Jm = B[pair_index(kDown, kExc)];
    const MatXc Ne = B[pair_index(kExc, kExc)];
    const MatXc Id = MatXc::Identity(D, D);

    ThreeLevelResult res;
    res.crossBlockLeakage = off_block_norm(b, Jm) + off_block_norm(b, Ne);
    if (res.crossBlockLeakage != 0.0) throw DimensionError("operators couple distinct N_J blocks");

    std::vector<std::array<MatXc, 9>> BB(9);
    for (int q = 0; q < 9; ++q)
        for (int r = 0; r < 9; ++r) BB[q][r] = B[q] * B[r];

    // Block layout: (J, K) stored column-major at offsets[J * S + K].
    std::vector<std::size_t> off(S * S);
    std::size_t total = 0;
    for (int J = 0; J < S; ++J)
        for (int K = 0; K < S; ++K) {
            off[J * S + K] = total;
            total += std::size_t(J + 1) * (K + 1);
        }

    struct Gen {
        std::vector<MatXc> Heff, L; // Heff = H - i Gamma/2 l^dag l per block
    };
    auto make_gen = [&](bool driveOn) {
        Gen g;
        const cplx c0 = driveOn ? I * p.Omega / p.Gamma : cplx(0.0, 0.0);
        const MatXc l = Jm + c0 * Id;
        const MatXc heff = -p.delta * Ne - I * (0.5 * p.Gamma) * (l.adjoint() * l);
        for (int J = 0; J < S; ++J) {
            g.Heff.push_back(heff.block(b.block_start(J), b.block_start(J), J + 1, J + 1));
            g.L.push_back(l.block(b.block_start(J), b.block_start(J), J + 1, J + 1));
        }
        return g;
    };
    const Gen on = make_gen(true), offG = make_gen(false);

    CVec x(total, 0.0);
    for (int J = 0; J < S; ++J)
        for (int K = 0; K < S; ++K) {
            Eigen::Map<MatXc> blk(x.data() + off[J * S + K], J + 1, K + 1);
            for (int i = 0; i <= J; ++i)
                for (int j = 0; j <= K; ++j)
                    blk(i, j) = psi0[b.block_start(J) + i] * std::conj(psi0[b.block_start(K) + j]);
        }

    auto rhs_for = [&](const Gen& g) {
        return [&, gp = &g](const CVec& y, CVec& dy, double) {
            for (int J = 0; J < S; ++J)
                for (int K = 0; K < S; ++K) {
                    Eigen::Map<const MatXc> r(y.data() + off[J * S + K], J + 1, K + 1);
                    Eigen::Map<MatXc> d(dy.data() + off[J * S + K], J + 1, K + 1);
                    d.noalias() = -I * (gp->Heff[J] * r) + I * (r * gp->Heff[K].adjoint());
                    d.noalias() += p.Gamma * (gp->L[J] * r * gp->L[K].adjoint());
                }
        };
    };

    auto observe = [&](const CVec& y, double t) {
        MatXc rho(D, D);
        for (int J = 0; J < S; ++J)
            for (int K = 0; K < S; ++K)
                rho.block(b.block_start(J), b.block_start(K), J + 1, K + 1) =
                    Eigen::Map<const MatXc>(y.data() + off[J * S + K], J + 1, K + 1);
        MomentSet m;
        m.N = N;
        for (int q = 0; q < 9; ++q) m.first(q) = (B[q] * rho).trace();
        for (int q = 0; q < 9; ++q)
            for (int r = 0; r < 9; ++r) m.second(q, r) = (BB[q][r] * rho).trace();
        res.times.push_back(t);
        res.moments.push_back(m);
        res.traceError.push_back(std::abs(rho.trace() - 1.0));
        res.maxHermiticityError = std::max(res.maxHermiticityError, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<MatXc> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        res.minEigenvalue = std::min(res.minEigenvalue, es.eigenvalues().minCoeff());
    };

    std::vector<double> seg1, seg2;
    const double tolOff = 1e-12 * (1.0 + tOff);
    for (double t : times) (t <= tOff + tolOff ? seg1 : seg2).push_back(t);
    const bool addOff = !seg2.empty() && (seg1.empty() || seg1.back() < tOff - tolOff);
    if (addOff) seg1.push_back(tOff);
    const std::size_t nReq1 = addOff ? seg1.size() - 1 : seg1.size();
    std::size_t k = 0;
    integrate_to_times(rhs_for(on), x, seg1, [&](const CVec& y, double t) {
        if (k++ < nReq1) observe(y, t);
    }, tol);
    if (!seg2.empty()) {
        seg2.insert(seg2.begin(), tOff);
        std::size_t k2 = 0;
        integrate_to_times(rhs_for(offG), x, seg2, [&](const CVec& y, double t) {
            if (k2++ > 0) observe(y, t);
        }, tol);
    }
    return res;
}

} // namespace berry
