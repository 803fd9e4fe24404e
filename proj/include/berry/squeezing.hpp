#pragma once

#include "berry/effective.hpp"

#include <functional>
#include <string>
#include <vector>

namespace berry {

inline double to_dB(double x) { return 10.0 * std::log10(x); }

enum class CurveMethod { Expansion, CollectiveExact, Oracle };

struct SqueezingCurve {
    std::vector<double> times;
    std::vector<double> xi2;
    std::vector<double> xi2dB;
    double tOpt = 0.0;
    double xi2Opt = 0.0;
    CurveMethod method = CurveMethod::Expansion;
};

// Short-time expansion of the effective OAT model with collective dephasing,
// single-particle dephasing and spin flips.
double xi2_expansion(double t, const TwistingModel& m, double N);

// Exact Wineland parameter for chi S_z^2 with collective S_z dephasing only,
// starting from the coherent state along x.
double collective_exact(double t, const TwistingModel& m, int N);

SqueezingCurve make_curve(const std::vector<double>& times, const std::function<double(double)>& xi2,
                          CurveMethod method);

struct TimeOptimum {
    double t = NAN;
    double xi2 = NAN;
    bool converged = false;
};

// Golden-section minimisation in log t after a coarse log scan over
// [1e-6, 1e3] * tScale.
TimeOptimum optimize_time(const std::function<double(double)>& xi2, double tScale);
TimeOptimum optimize_time(const TwistingModel& m, double N);

enum class ModelKind { HPAE, Adiabatic };

struct SqueezingSetup {
    double N = 1e6;
    double Gamma = 1.0;
    SingleParticleRates rates;
    GammaDMode gammaDMode = GammaDMode::Constant;
    ModelKind kind = ModelKind::HPAE;
};

TwistingModel build_model(const SqueezingSetup& s, double delta, double cosTheta);

struct FreeVars {
    bool t = true;
    bool delta = false;
    bool theta = false;
};

struct OptimizeBounds {
    double deltaMin = 1e-6; // units of N Gamma
    double deltaMax = 1.0;
    double cosMin = 0.01;
    double cosMax = 0.9999;
    int grid = 64;
    int sweeps = 6;
};

struct Optimum {
    double xi2 = NAN;
    double xi2dB = NAN;
    double t = NAN;
    double delta = NAN; // absolute rate
    double cosTheta = NAN;
    bool converged = false;
};

Optimum optimize(const SqueezingSetup& s, double delta, double cosTheta, FreeVars free,
                 const OptimizeBounds& b = {});

enum class ClosedFormRegime { SpinFlipDispersive, SpinFlipResonant, SpinFlipHP, DephasingWeak,
                              DephasingStrong, Crossover };

struct ClosedFormInput {
    double N = 1e6;
    double Gamma = 1.0;
    double gammaEUp = 0.0;
    double gammaD = 0.0;
    double cosTheta = 1.0;
    double kappa = 0.0; // only for the dispersive detuning
};

struct ClosedFormResult {
    double xi2 = NAN;
    double t = NAN;
    double detuning = NAN; // delta_opt, or Delta_opt for the dispersive regime
    double cosTheta = NAN;
    double fD = NAN;       // dephasing strength relative to the weak/strong boundary
    double cosThetaSmallFd = NAN;
    double cosThetaLargeFd = NAN;
    bool warning = false;
};

ClosedFormResult closed_form_limits(const ClosedFormInput& in, ClosedFormRegime regime);

// gamma_d / ((3e)^{2/3} N^{1/3} sin^2(theta) Gamma / 32)
double dephasing_fd(double N, double Gamma, double gammaD, double cosTheta);

struct ScanSpec {
    SqueezingSetup setup;
    double deltaMin = 1e-4; // units of N Gamma
    double deltaMax = 0.1;
    int nDelta = 64;
    bool logDelta = true;
    double cosMin = 0.01;
    double cosMax = 0.99;
    int nCos = 64;
};

struct ScanResult {
    std::vector<double> deltaOverNGamma;
    std::vector<double> cosTheta;
    std::vector<double> xi2OptdB; // [iCos * nDelta + iDelta]
    std::vector<double> tOpt;
    std::vector<int> flags;       // bit 0: invalid model, bit 1: time optimum not converged
    std::vector<double> overlayDelta; // analytic delta_opt/(N Gamma) per cos row (NaN if none)
    std::vector<double> argminDelta;  // numerical best delta/(N Gamma) per cos row
};

ScanResult scan_grid(const ScanSpec& spec);
ScanResult scan_grid_serial(const ScanSpec& spec);
std::string scan_csv(const ScanResult& r);

struct AnchorRow {
    std::string symbol;
    double deltaOverNGamma = NAN;
    double cosTheta = NAN;
    double referencedB = NAN;
    double computeddB = NAN;
    double referenceT = NAN;
    double computedT = NAN;
    bool pass = false;
};

// Anchor symbol points at N = 1e6 with t optimised at the quoted coordinates.
std::vector<AnchorRow> anchor_table(double N = 1e6);
std::string anchor_csv(const std::vector<AnchorRow>& rows);

HpValidity hp_validity(const TwistingModel& m, double N, double Gamma);

} // namespace berry
