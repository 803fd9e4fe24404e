#pragma once

#include "berry/covariance.hpp"
#include "berry/params.hpp"
#include "berry/sectored_state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace berry {

enum class Stepper { Euler, Midpoint };

// Shifted: H = -delta N_e, l = J^- + i Omega / Gamma.
// Unshifted: H = (Omega J^+ + Omega^* J^-)/2 - delta N_e, l = J^-.
enum class Unraveling { Shifted, Unshifted };

struct Schedule {
    double tOff = 0.0;
    double tEnd = 0.0;
    double dtBase = 0.0;
    double dtShrinkFactor = 5.0;
    int shrinkWindowSteps = 500;
    int nTraj = 1;
    int dN = 0;
    std::uint64_t seed = 0;
    double sampleEvery = 0.0;
    Stepper stepper = Stepper::Euler;
    Unraveling unraveling = Unraveling::Shifted;
    double jumpCap = 0.05;

    void validate(int N, double Gamma) const;
    std::vector<double> sample_times() const;
};

// SplitMix64 evaluated at (key, counter): stateless, counter-based uniforms.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);
    double uniform(std::uint64_t counter) const;
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct TrajectoryOutput {
    std::vector<double> times;
    std::vector<MomentSet> moments;
    std::vector<double> maxJumpProb; // max p over the steps preceding each sample
    SectoredState final;
    std::uint64_t steps = 0;
    std::uint64_t jumps = 0;
    bool aborted = false;
    std::string diagnostic;
};

TrajectoryOutput evolve_trajectory(SectoredState psi, const EffectiveSpinParams& p, const Schedule& s,
                                   const CounterRng& rng);

struct EnsembleOptions {
    int threads = 0; // 0: runtime default
    bool parallel = true;
    double varphi = 0.0;
    int blocks = 20;
    std::string checkpointPath;
    int chunk = 32;
};

struct EnsembleSample {
    double t = 0.0;
    MomentSet mean;
    CovarianceReport report;
    double xi2GenSE = NAN; // standard error of xi2 in dB
    double xi2SBlockSE = NAN;
    double xi2Updown = NAN;
    double xi2UpdownSE = NAN;
    double eFraction = NAN;
    double eFractionSE = NAN;
    double maxJumpProb = 0.0;
    std::vector<MomentSet> leaveOneOut; // jackknife replicate means over trajectory blocks
};

// Jackknife standard error of any scalar functional of the ensemble moments.
double jackknife_se(const EnsembleSample& s, const std::function<double(const MomentSet&)>& f);

struct EnsembleResult {
    std::vector<EnsembleSample> samples;
    int nTraj = 0;
    int nAborted = 0;
    std::vector<std::string> diagnostics;
    double maxJumpProb = 0.0;
    std::uint64_t totalSteps = 0;
    std::uint64_t totalJumps = 0;
};

EnsembleResult run_ensemble(const EffectiveSpinParams& p, const Schedule& s, const EnsembleOptions& opt = {});

std::string ensemble_csv(const EnsembleResult& r);

} // namespace berry
