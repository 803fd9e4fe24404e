#pragma once

#include "berry/ode.hpp"
#include "berry/params.hpp"

#include <optional>
#include <vector>

namespace berry {

// Approximate J^- eigenstate of a spin j = N_J/2 in the Dicke basis, cut at
// the first amplitude minimum past the peak.
struct BerryEigenstate {
    int N_J = 0;
    double o = 0.0;
    double phi = 0.0;
    std::vector<cplx> amps; // index k <-> m = k - N_J/2
    cplx alpha{0.0, 0.0};   // j o e^{-i phi}
    double Jz = 0.0;
    double A = 0.0;         // sum |a_m|^2 (j + m)
    double residual = 0.0;  // ||(J^- - alpha)|alpha>||
};

BerryEigenstate berry_eigenstate(int N_J, double o, double phi);

enum class Regime { Adiabatic, HPAE, WeakDrive };
enum class GammaDMode { Constant, FromEmission };

const char* to_string(Regime r);

struct TwistingModel {
    double chiCheck = 0.0;   // magnitude of the S_z^2 coefficient
    int chiSign = -1;        // sign of the S_z^2 coefficient
    double GammaCheck = 0.0; // collective S_z dephasing rate
    cplx lCoefficient{0.0, 0.0}; // S_z coefficient of the dephasing jump operator
    double gammaMinus = 0.0;
    double gammaD = 0.0;
    double omegaBTilde = 0.0;
    double thetaTilde = 0.0;
    double phiTilde = 0.0;
    double fJ = 0.5;
    double fUp = 0.5;
    double ratio = 0.0; // chiCheck / GammaCheck
    Regime regime = Regime::HPAE;
    bool valid = true;
    std::optional<double> ratioLargeDelta;   // Delta / kappa
    std::optional<double> ratioNearResonant; // N g_c^2 / (4 delta kappa)
};

TwistingModel adiabatic_model(double N, double thetaTilde, double delta, double Gamma,
                              const SingleParticleRates& rates = {},
                              GammaDMode mode = GammaDMode::Constant);

TwistingModel hp_model(double N, double thetaTilde, double phiTilde, double delta, double Gamma,
                       double fJ = 0.5, double fUp = 0.5, const SingleParticleRates& rates = {},
                       GammaDMode mode = GammaDMode::Constant);

TwistingModel weak_drive_model(double N, cplx Omega, double delta, double chi, double GammaDelta,
                               const SingleParticleRates& rates = {},
                               const CavityParams* cav = nullptr,
                               GammaDMode mode = GammaDMode::Constant);

struct HpValidity {
    double ratio = 0.0; // t_opt * f_J N Gamma cos(theta)
    bool pass = false;
};

HpValidity hp_validity(const TwistingModel& m, double N, double Gamma, double tOpt);

} // namespace berry
