#pragma once

#include "berry/ode.hpp"
#include "berry/params.hpp"

#include <optional>
#include <string>
#include <vector>

namespace berry {

// Schwinger amplitudes for |down>, |e>, |up>; |d|^2+|e|^2+|u|^2 = N.
struct MeanFieldState {
    cplx a{0.0, 0.0};
    cplx d{0.0, 0.0};
    cplx e{0.0, 0.0};
    cplx u{0.0, 0.0};
    double t = 0.0;
};

struct MeanFieldSeries {
    std::vector<MeanFieldState> states;
    std::vector<double> coherence; // |u* d|^2 + |u* e|^2 per sample
    double omegaFrame = 0.0;
};

struct BlochSteadyState {
    double thetaJ = 0.0;
    double phiJ = 0.0;
    double omegaB = 0.0;
    double N_J = 0.0;
    PhaseLabel phase;
    cplx jumpMean{0.0, 0.0}; // <J^-> + i Omega / Gamma
    std::optional<cplx> cavityCoherence;
    double residualRatio = 0.0; // Omega cot(theta) cos(phi) - delta
    double residualBalance = 0.0; // (Omega/2) sin(phi) - (N_J Gamma/4) sin(theta)
};

struct SpinMfOptions {
    std::optional<double> omegaFrame; // default: omega_B of the polarized branch, else 0
    OdeTolerance tol{};
};

MeanFieldSeries integrate_full_mf(const CavityParams& p, const MeanFieldState& init, double tEnd,
                                  double dtOut, OdeTolerance tol = {});

MeanFieldSeries integrate_spin_mf(const EffectiveSpinParams& p, const MeanFieldState& init,
                                  double tEnd, double dtOut, const SpinMfOptions& opt = {});

// Polarized-branch root of G(theta) = (delta tan)^2 + (N_J Gamma sin / 2)^2 - |Omega|^2.
// Throws MixedPhaseError when no root exists in (0, pi/2).
BlochSteadyState solve_steady_state(const EffectiveSpinParams& p, double N_J,
                                    const CavityParams* cav = nullptr);

// |Omega| placing the polarized steady state of sector N_J at cos(theta).
double drive_for_angle(double delta, double N_J, double cosTheta, double Gamma = 1.0);

// Berry frame frequency delta/(2 cos) - delta/2.
double berry_frequency(double delta, double cosTheta);

// Mean-field state with the given Bloch angles in sector N_J, remaining atoms in u.
MeanFieldState bloch_state(double N, double N_J, double theta, double phi);

std::string meanfield_csv(const MeanFieldSeries& s);

} // namespace berry
