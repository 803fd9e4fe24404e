#include "berry/meanfield.hpp"
#include "berry/errors.hpp"
#include "berry/io.hpp"

#include <cmath>
#include <numbers>

namespace berry {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double coherence_of(const MeanFieldState& s) {
    return std::norm(std::conj(s.u) * s.d) + std::norm(std::conj(s.u) * s.e);
}

} // namespace

double drive_for_angle(double delta, double N_J, double cosTheta, double Gamma) {
    if (!(cosTheta > 0.0 && cosTheta <= 1.0)) throw DomainError("cos(theta) must lie in (0, 1]");
    const double sn = std::sqrt(1.0 - cosTheta * cosTheta);
    const double a = delta * sn / cosTheta, b = 0.5 * N_J * Gamma * sn;
    return std::sqrt(a * a + b * b);
}

double berry_frequency(double delta, double cosTheta) {
    return delta / (2.0 * cosTheta) - delta / 2.0;
}

MeanFieldState bloch_state(double N, double N_J, double theta, double phi) {
    MeanFieldState s;
    s.d = std::sqrt(N_J) * std::cos(theta / 2);
    s.e = std::sqrt(N_J) * std::sin(theta / 2) * std::polar(1.0, -phi);
    s.u = std::sqrt(std::max(0.0, N - N_J));
    return s;
}

MeanFieldSeries integrate_full_mf(const CavityParams& p, const MeanFieldState& init, double tEnd,
                                  double dtOut, OdeTolerance tol) {
    if (!(tEnd > 0.0)) throw InvalidParameter("tEnd must be positive");
    if (!(p.kappa > 0.0)) throw InvalidParameter("kappa must be positive");
    const cplx I(0.0, 1.0);
    const double g = p.g_c;
    const cplx loss(0.5 * p.kappa, -p.Delta);

    // x = (a, d, e, u); u is uncoupled.
    auto rhs = [&](const CVec& x, CVec& dx, double) {
        const cplx a = x[0], d = x[1], e = x[2];
        const cplx Jm = std::conj(d) * e;
        dx[0] = p.epsilon - I * g * Jm - loss * a;
        dx[1] = -I * g * std::conj(a) * e;
        dx[2] = I * p.delta * e - I * g * a * d;
        dx[3] = 0.0;
    };

    MeanFieldSeries out;
    CVec x{init.a, init.d, init.e, init.u};
    const double t0 = init.t;
    integrate_to_times(rhs, x, uniform_times(t0, t0 + tEnd, dtOut), [&](const CVec& y, double t) {
        MeanFieldState s{y[0], y[1], y[2], y[3], t};
        out.states.push_back(s);
        out.coherence.push_back(coherence_of(s));
    }, tol);
    return out;
}

MeanFieldSeries integrate_spin_mf(const EffectiveSpinParams& p, const MeanFieldState& init,
                                  double tEnd, double dtOut, const SpinMfOptions& opt) {
    if (!(tEnd > 0.0)) throw InvalidParameter("tEnd must be positive");
    const cplx I(0.0, 1.0);

    double omega = 0.0;
    if (opt.omegaFrame) {
        omega = *opt.omegaFrame;
    } else {
        const double NJ = std::norm(init.d) + std::norm(init.e);
        if (NJ > 0.0) {
            try {
                omega = solve_steady_state(p, NJ).omegaB;
            } catch (const MixedPhaseError&) {
                omega = 0.0;
            }
        }
    }

    const cplx Om = p.Omega;
    const cplx lossE(0.5 * p.Gamma, p.chi);
    const cplx gainD(0.5 * p.Gamma, -p.chi);
    auto rhs = [&](const CVec& x, CVec& dx, double) {
        const cplx d = x[0], e = x[1];
        dx[0] = -I * 0.5 * std::conj(Om) * e + I * omega * d + gainD * std::norm(e) * d;
        dx[1] = -I * 0.5 * Om * d + I * (p.delta + omega) * e - lossE * std::norm(d) * e;
        dx[2] = 0.0;
    };

    MeanFieldSeries out;
    out.omegaFrame = omega;
    CVec x{init.d, init.e, init.u};
    const double t0 = init.t;
    integrate_to_times(rhs, x, uniform_times(t0, t0 + tEnd, dtOut), [&](const CVec& y, double t) {
        MeanFieldState s{init.a, y[0], y[1], y[2], t};
        out.states.push_back(s);
        out.coherence.push_back(coherence_of(s));
    }, opt.tol);
    return out;
}

BlochSteadyState solve_steady_state(const EffectiveSpinParams& p, double N_J, const CavityParams* cav) {
    if (!(N_J > 0.0)) throw InvalidParameter("N_J must be positive");
    if (!(p.Gamma > 0.0)) throw InvalidParameter("Gamma must be positive");
    const double Om = std::abs(p.Omega);
    const double half = 0.5 * N_J * p.Gamma; // Omega_c
    const double delta = p.delta;

    BlochSteadyState s;
    s.N_J = N_J;
    s.phase.OmegaC = half;
    s.phase.cooperativity = p.cooperativity;

    double theta = 0.0;
    if (Om == 0.0) {
        theta = 0.0;
    } else if (delta == 0.0) {
        if (Om >= half) {
            s.phase.kind = std::abs(Om - half) <= 1e-9 * half ? Phase::Critical : Phase::Mixed;
            throw MixedPhaseError("drive at or above Omega_c: no polarized steady state");
        }
        theta = std::asin(Om / half);
    } else {
        auto G = [&](double th) {
            const double t = delta * std::tan(th);
            const double b = half * std::sin(th);
            return t * t + b * b - Om * Om;
        };
        double lo = 0.0, hi = kHalfPi;
        // G diverges at pi/2 for delta != 0; back off until finite and positive.
        double step = 1e-3;
        hi = kHalfPi - 1e-15;
        while (!(G(hi) > 0.0) || !std::isfinite(G(hi))) {
            hi = kHalfPi - step;
            step *= 0.5;
            if (step < 1e-300) throw ConvergenceError("cannot bracket steady-state root");
        }
        int it = 0;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (G(mid) > 0.0 ? hi : lo) = mid;
            if (++it > 200) throw ConvergenceError("steady-state bisection did not converge");
        }
        const double glo = G(lo), ghi = G(hi);
        theta = (ghi != glo) ? lo - glo * (hi - lo) / (ghi - glo) : 0.5 * (lo + hi);
        if (!(theta >= lo && theta <= hi)) theta = 0.5 * (lo + hi);
    }

    double phi = kHalfPi;
    if (Om > 0.0) {
        const double sphi = half * std::sin(theta) / Om;
        const double cphi = delta * std::tan(theta) / Om;
        phi = std::atan2(sphi, cphi) - std::arg(p.Omega);
        s.residualRatio = Om * std::cos(theta) / std::sin(theta) * std::cos(phi + std::arg(p.Omega)) - delta;
        if (theta == 0.0) s.residualRatio = 0.0;
        s.residualBalance = 0.5 * Om * std::sin(phi + std::arg(p.Omega)) - 0.5 * half * std::sin(theta);
    }

    s.thetaJ = theta;
    s.phiJ = phi;
    s.omegaB = berry_frequency(delta, std::cos(theta));
    s.phase.kind = Phase::Polarized;
    const cplx Jm = 0.5 * N_J * std::sin(theta) * std::polar(1.0, -phi);
    s.jumpMean = Jm + cplx(0.0, 1.0) * p.Omega / p.Gamma;
    if (cav) s.cavityCoherence = cplx(0.0, -1.0) * (cav->g_c / (0.5 * cav->kappa)) * s.jumpMean;
    return s;
}

std::string meanfield_csv(const MeanFieldSeries& s) {
    Csv csv({"t", "re_a", "im_a", "re_d", "im_d", "re_e", "im_e", "re_u", "im_u"});
    for (const auto& m : s.states)
        csv.row({m.t, m.a.real(), m.a.imag(), m.d.real(), m.d.imag(), m.e.real(), m.e.imag(),
                 m.u.real(), m.u.imag()});
    return csv.str();
}

} // namespace berry
