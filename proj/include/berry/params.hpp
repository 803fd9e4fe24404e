#pragma once

#include <complex>
#include <optional>

namespace berry {

struct CavityParams {
    double g_c = 0.0;     // single-photon coupling (half Rabi)
    double kappa = 1.0;   // cavity power decay
    double epsilon = 0.0; // cavity drive amplitude
    double Delta = 0.0;   // cavity-atom detuning
    double delta = 0.0;   // drive-atom detuning
    int N = 1;

    // kappa / (sqrt(N) g_c); large means bad cavity.
    double bad_cavity_indicator() const;
};

struct SingleParticleRates {
    double gammaEUp = 0.0;
    double gammaEDown = 0.0;
    double gammaD = 0.0;
};

struct EffectiveSpinParams {
    int N = 1;
    std::complex<double> Omega{0.0, 0.0};
    double delta = 0.0;
    double Gamma = 1.0;
    double chi = 0.0;
    double GammaDelta = 0.0;
    SingleParticleRates rates;
    std::optional<double> cooperativity;
};

enum class Phase { Polarized, Mixed, Critical };

struct PhaseLabel {
    Phase kind = Phase::Polarized;
    double OmegaC = 0.0;
    std::optional<double> cooperativity;
};

const char* to_string(Phase p);

EffectiveSpinParams derive_effective(const CavityParams& cav, const SingleParticleRates& rates = {});

// Omega_c = N_J Gamma / 2 comparison; Critical within relative tol.
PhaseLabel classify_phase(const EffectiveSpinParams& p, int N_J, double tol = 1e-9);

} // namespace berry
