#include "berry/sectored_state.hpp"
#include "berry/errors.hpp"

#include <algorithm>
#include <cmath>

namespace berry {

SectoredState::SectoredState(int N, int lo, int hi) : N_(N), lo_(lo), hi_(hi) {
    if (N < 0 || lo < 0 || hi > N || lo > hi) throw DomainError("invalid sector window");
    std::size_t off = 0;
    for (int NJ = lo; NJ <= hi; ++NJ) {
        offset_.push_back(off);
        off += std::size_t(NJ) + 1;
    }
    data_.assign(off, cplx(0.0, 0.0));
}

double SectoredState::norm2() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return s;
}

double SectoredState::sector_norm2(int NJ) const {
    const cplx* p = sector(NJ);
    double s = 0.0;
    for (int n = 0; n <= NJ; ++n) s += std::norm(p[n]);
    return s;
}

void SectoredState::normalize() {
    const double n = std::sqrt(norm2());
    if (!(n > 0.0)) throw DegenerateError("cannot normalize a zero state");
    const double inv = 1.0 / n;
    for (auto& v : data_) v *= inv;
}

SectoredState init_state(int N, int dN, double varphi) {
    if (N < 1) throw DomainError("N must be >= 1");
    if (dN < 0) throw DomainError("dN must be >= 0");
    SectoredState s(N, std::max(0, N / 2 - dN), std::min(N, (N + 1) / 2 + dN));
    for (int NJ = s.lo(); NJ <= s.hi(); ++NJ) {
        const double lb = std::lgamma(N + 1.0) - std::lgamma(NJ + 1.0) - std::lgamma(N - NJ + 1.0);
        const double mag = std::exp(0.5 * lb - 0.5 * N * std::log(2.0));
        s.sector(NJ)[0] = std::polar(mag, NJ * varphi);
    }
    s.normalize();
    return s;
}

SectoredState apply_bilinear(const SectoredState& psi, const Mat3c& M, bool extend) {
    const int N = psi.N();
    const int lo = extend ? std::max(0, psi.lo() - 1) : psi.lo();
    const int hi = extend ? std::min(N, psi.hi() + 1) : psi.hi();
    SectoredState out(N, lo, hi);
    double dropped = 0.0;

    const cplx Mdd = M(kDown, kDown), Mee = M(kExc, kExc), Muu = M(kUp, kUp);
    const cplx Mde = M(kDown, kExc), Med = M(kExc, kDown);
    const cplx Mud = M(kUp, kDown), Mue = M(kUp, kExc), Mdu = M(kDown, kUp), Meu = M(kExc, kUp);
    const bool cross = Mud != 0.0 || Mue != 0.0 || Mdu != 0.0 || Meu != 0.0;

    for (int NJ = psi.lo(); NJ <= psi.hi(); ++NJ) {
        const cplx* x = psi.sector(NJ);
        const double nu = N - NJ;
        cplx* y = out.contains(NJ) ? out.sector(NJ) : nullptr;
        if (y) {
            for (int n = 0; n <= NJ; ++n) {
                const double nd = NJ - n;
                cplx acc = (Mdd * nd + Mee * double(n) + Muu * nu) * x[n];
                // d^dag e: |nd, n+1> -> sqrt((nd+1)(n+1)) |nd+1, n>
                if (n < NJ) acc += Mde * std::sqrt((nd) * (n + 1.0)) * x[n + 1];
                // e^dag d: |nd+1, n-1> -> sqrt((nd+1) n) |nd, n>
                if (n > 0) acc += Med * std::sqrt((nd + 1.0) * n) * x[n - 1];
                y[n] += acc;
            }
        }
        if (!cross) continue;
        // u^dag d, u^dag e: N_J -> N_J - 1
        if (NJ >= 1) {
            const int T = NJ - 1;
            cplx* z = out.contains(T) ? out.sector(T) : nullptr;
            for (int n = 0; n <= NJ; ++n) {
                const double nd = NJ - n;
                if (x[n] == 0.0) continue;
                if (n <= T && nd >= 1) {
                    const cplx v = Mud * std::sqrt(nd * (nu + 1.0)) * x[n];
                    if (z) z[n] += v; else dropped += std::norm(v);
                }
                if (n >= 1) {
                    const cplx v = Mue * std::sqrt(n * (nu + 1.0)) * x[n];
                    if (z) z[n - 1] += v; else dropped += std::norm(v);
                }
            }
        }
        // d^dag u, e^dag u: N_J -> N_J + 1
        if (NJ + 1 <= N && nu >= 1) {
            const int T = NJ + 1;
            cplx* z = out.contains(T) ? out.sector(T) : nullptr;
            for (int n = 0; n <= NJ; ++n) {
                const double nd = NJ - n;
                if (x[n] == 0.0) continue;
                const cplx v1 = Mdu * std::sqrt(nu * (nd + 1.0)) * x[n];
                const cplx v2 = Meu * std::sqrt(nu * (n + 1.0)) * x[n];
                if (z) {
                    z[n] += v1;
                    z[n + 1] += v2;
                } else {
                    dropped += std::norm(v1) + std::norm(v2);
                }
            }
        }
    }
    out.leakage = psi.leakage + dropped;
    return out;
}

cplx inner(const SectoredState& a, const SectoredState& b) {
    const int lo = std::max(a.lo(), b.lo()), hi = std::min(a.hi(), b.hi());
    cplx s = 0.0;
    for (int NJ = lo; NJ <= hi; ++NJ) {
        const cplx* x = a.sector(NJ);
        const cplx* y = b.sector(NJ);
        for (int n = 0; n <= NJ; ++n) s += std::conj(x[n]) * y[n];
    }
    return s;
}

ModeRotation ModeRotation::from_angles(double theta, double phi, double fJ, double fUp) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const double a = std::sqrt(fJ), b = std::sqrt(fUp);
    const cplx em = std::polar(1.0, -phi);
    ModeRotation r;
    r.V << a * c, a * em * s, b,
        -b * c, -b * em * s, a,
        s, -em * c, 0.0;
    return r;
}

double ModeRotation::unitarity_error() const {
    return (V * V.adjoint() - Mat3c::Identity()).cwiseAbs().maxCoeff();
}

} // namespace berry
