#include "berry/params.hpp"
#include "berry/errors.hpp"

#include <cmath>

namespace berry {

double CavityParams::bad_cavity_indicator() const {
    if (g_c == 0.0) return INFINITY;
    return kappa / (std::sqrt(double(N)) * g_c);
}

const char* to_string(Phase p) {
    switch (p) {
    case Phase::Polarized: return "polarized";
    case Phase::Mixed: return "mixed";
    case Phase::Critical: return "critical";
    }
    return "unknown";
}

EffectiveSpinParams derive_effective(const CavityParams& cav, const SingleParticleRates& rates) {
    if (!(cav.kappa > 0.0)) throw InvalidParameter("kappa must be positive");
    if (cav.N < 1) throw InvalidParameter("N must be >= 1");

    const double g2 = cav.g_c * cav.g_c;
    const double lor = g2 / (cav.Delta * cav.Delta + 0.25 * cav.kappa * cav.kappa);

    EffectiveSpinParams p;
    p.N = cav.N;
    p.Gamma = 4.0 * g2 / cav.kappa;
    p.Omega = 4.0 * cav.epsilon * cav.g_c / cav.kappa;
    p.delta = cav.delta;
    p.chi = lor * cav.Delta;
    p.GammaDelta = lor * cav.kappa;
    p.rates = rates;
    const double gammaE = rates.gammaEUp + rates.gammaEDown;
    if (gammaE > 0.0) p.cooperativity = 4.0 * g2 / (cav.kappa * gammaE);
    return p;
}

PhaseLabel classify_phase(const EffectiveSpinParams& p, int N_J, double tol) {
    if (N_J < 1) throw InvalidParameter("N_J must be >= 1");
    PhaseLabel out;
    out.OmegaC = 0.5 * N_J * p.Gamma;
    out.cooperativity = p.cooperativity;
    const double om = std::abs(p.Omega);
    if (std::abs(om - out.OmegaC) <= tol * out.OmegaC)
        out.kind = Phase::Critical;
    else
        out.kind = om < out.OmegaC ? Phase::Polarized : Phase::Mixed;
    return out;
}

} // namespace berry
