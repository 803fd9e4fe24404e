#include "berry/effective.hpp"
#include "berry/errors.hpp"
#include "berry/meanfield.hpp"

#include <algorithm>
#include <cmath>

namespace berry {

namespace {

double half_sin2(double theta) {
    const double s = std::sin(0.5 * theta);
    return s * s;
}

void apply_single_particle(TwistingModel& m, const SingleParticleRates& r, GammaDMode mode) {
    const double s2 = half_sin2(m.thetaTilde);
    m.gammaMinus = r.gammaEUp * s2;
    m.gammaD = mode == GammaDMode::FromEmission ? r.gammaEDown * s2 : r.gammaD;
}

void check_cos(double c) {
    if (std::abs(c) < 1e-15) throw SingularityError("cos(theta) = 0: critical point");
}

} // namespace

const char* to_string(Regime r) {
    switch (r) {
    case Regime::Adiabatic: return "adiabatic";
    case Regime::HPAE: return "hp";
    case Regime::WeakDrive: return "weak";
    }
    return "unknown";
}

BerryEigenstate berry_eigenstate(int N_J, double o, double phi) {
    if (N_J < 2 || N_J % 2) throw DomainError("N_J must be an even integer >= 2");
    if (!(o >= 0.0) || o >= 1.0) throw DomainError("o must lie in [0, 1)");

    BerryEigenstate s;
    s.N_J = N_J;
    s.o = o;
    s.phi = phi;
    const double j = 0.5 * N_J;
    s.alpha = j * o * std::polar(1.0, -phi);

    const int n = N_J + 1;
    std::vector<double> logf(n, 0.0);
    s.amps.assign(n, 0.0);
    if (o == 0.0) {
        s.amps[0] = 1.0;
        return s;
    }
    const double logoj = std::log(o * j);
    for (int k = 1; k < n; ++k) {
        const double m = k - 1 - j;
        logf[k] = logf[k - 1] + logoj - 0.5 * std::log(j * (j + 1) - m * (m + 1));
    }
    // Keep the lower-hemisphere branch: cut at the first minimum after the peak.
    int peak = 0;
    while (peak + 1 < n && logf[peak + 1] >= logf[peak]) ++peak;
    int last = peak;
    while (last + 1 < n && logf[last + 1] <= logf[last]) ++last;
    const double mx = logf[peak];
    double norm = 0.0;
    for (int k = 0; k <= last; ++k) norm += std::exp(2.0 * (logf[k] - mx));
    const double lnorm = 0.5 * std::log(norm);
    for (int k = 0; k <= last; ++k) {
        const double mag = std::exp(logf[k] - mx - lnorm);
        s.amps[k] = mag * std::polar(1.0, -k * phi);
        const double p = mag * mag;
        s.Jz += p * (k - j);
        s.A += p * k;
    }
    s.residual = std::abs(s.alpha) * std::abs(s.amps[last]);
    return s;
}

TwistingModel adiabatic_model(double N, double thetaTilde, double delta, double Gamma,
                              const SingleParticleRates& rates, GammaDMode mode) {
    const double c = std::cos(thetaTilde), s = std::sin(thetaTilde);
    check_cos(c);
    TwistingModel m;
    m.regime = Regime::Adiabatic;
    m.thetaTilde = thetaTilde;
    m.phiTilde = M_PI / 2;
    m.chiCheck = std::abs(delta) * s * s / (2.0 * N * c * c * c);
    m.chiSign = delta >= 0 ? -1 : 1;
    m.lCoefficient = 2.0 * delta * s / (N * Gamma * c * c * c);
    m.GammaCheck = Gamma * std::norm(m.lCoefficient);
    m.ratio = m.GammaCheck > 0 ? m.chiCheck / m.GammaCheck : INFINITY;
    m.omegaBTilde = berry_frequency(delta, c);
    m.valid = !(16.0 * delta * delta / (c * c) > 0.01 * N * N * Gamma * Gamma * c * c);
    apply_single_particle(m, rates, mode);
    return m;
}

TwistingModel hp_model(double N, double thetaTilde, double phiTilde, double delta, double Gamma,
                       double fJ, double fUp, const SingleParticleRates& rates, GammaDMode mode) {
    const double c = std::cos(thetaTilde), s = std::sin(thetaTilde);
    check_cos(c);
    if (!(fJ > 0.0) || !(fUp >= 0.0)) throw InvalidParameter("weights must be positive");
    const double sec = 1.0 / c;
    const double fNG = fJ * N * Gamma;
    const double D = fNG * fNG * c * c + 4.0 * delta * delta * sec * sec;

    TwistingModel m;
    m.regime = Regime::HPAE;
    m.thetaTilde = thetaTilde;
    m.phiTilde = phiTilde;
    m.fJ = fJ;
    m.fUp = fUp;
    const double chi = (delta / (N * c)) * fUp * fNG * fNG * s * s / D;
    m.chiCheck = std::abs(chi);
    m.chiSign = chi >= 0 ? -1 : 1;
    m.lCoefficient = 2.0 * std::polar(1.0, -phiTilde) * std::sqrt(fJ * fUp) * delta * std::tan(thetaTilde) *
                     cplx(-2.0 * delta * sec, fNG) / D;
    m.GammaCheck = Gamma * std::norm(m.lCoefficient);
    m.ratio = m.GammaCheck > 0 ? m.chiCheck / m.GammaCheck : INFINITY;
    m.omegaBTilde = berry_frequency(delta, c);
    apply_single_particle(m, rates, mode);
    return m;
}

TwistingModel weak_drive_model(double N, cplx Omega, double delta, double chi, double GammaDelta,
                               const SingleParticleRates& rates, const CavityParams* cav,
                               GammaDMode mode) {
    if (delta == 0.0) throw DegenerateError("delta = 0: no twisting in the weak-drive model");
    const cplx den = delta + cplx(chi, 0.5 * GammaDelta) * (0.5 * N);
    const double den2 = std::norm(den);
    const double om2 = std::norm(Omega);
    const double bracket = delta * chi / 2 + N * chi * chi / 4 + N * GammaDelta * GammaDelta / 16;

    TwistingModel m;
    m.regime = Regime::WeakDrive;
    const double chiS = delta * om2 * bracket / (2.0 * den2 * den2);
    m.chiCheck = std::abs(chiS);
    m.chiSign = chiS >= 0 ? -1 : 1;
    m.lCoefficient = delta * Omega / (2.0 * den * den);
    m.GammaCheck = GammaDelta * std::norm(m.lCoefficient);
    m.ratio = m.GammaCheck > 0 ? m.chiCheck / m.GammaCheck : INFINITY;
    const double s2 = std::min(1.0, 0.25 * om2 / den2);
    m.thetaTilde = 2.0 * std::asin(std::sqrt(s2));
    m.phiTilde = 0.0;
    m.omegaBTilde = delta * om2 / (4.0 * den2);
    m.valid = s2 <= 0.05;
    if (cav) {
        m.ratioLargeDelta = cav->Delta / cav->kappa;
        m.ratioNearResonant = N * cav->g_c * cav->g_c / (4.0 * delta * cav->kappa);
    }
    apply_single_particle(m, rates, mode);
    return m;
}

HpValidity hp_validity(const TwistingModel& m, double N, double Gamma, double tOpt) {
    HpValidity v;
    const double relax = m.fJ * N * Gamma * std::cos(m.thetaTilde);
    v.ratio = std::isfinite(tOpt) ? tOpt * relax : 0.0;
    v.pass = v.ratio >= 10.0;
    return v;
}

} // namespace berry
