#pragma once

#include "berry/trajectories.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace berry::cli {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
    double seconds = 0.0;
};

enum class Scale { Quick, Full };

struct CheckOptions {
    Scale scale = Scale::Quick;
    bool oracle = true;
    bool trajectories = true; // false: skip the trajectory parts of 5 and 10
    std::string fault; // "", "chi_sign"
    int threads = 0;
    std::uint64_t seed = 1;
    std::string benchmarkConfig;  // JSON config for criterion 7
    std::string workDir = ".";    // checkpoints and scratch output
};

struct EnsembleDigest {
    double minGendB = INFINITY;
    double minGenSE = NAN;
    double tMinGen = NAN;
    double minSBlockdB = INFINITY;
    double tMinSBlock = NAN;
    double finalGendB = NAN;
    double finalGenSE = NAN;
    double finalUpdowndB = NAN;
    double finalUpdownSE = NAN;
    double finalE = NAN;
    double eAfterOff = NAN; // first sample at least 0.02 / Gamma after tOff
    double tEAfterOff = NAN;
};

// Minima are taken over samples with t >= minimumFrom.
EnsembleDigest digest_ensemble(const EnsembleResult& r, double tOff, double minimumFrom = 0.0);

// Drive-on trajectories to t = 0.5 / Gamma, then drive-off decay on separate
// random streams; compares C_0(end) with u_0 . C(tOff) per trajectory for the
// sector pair (N/2, N/2 + 1).
struct TrajectoryCoherence {
    std::complex<double> meanDifference;
    std::complex<double> final;
    double maxZ = NAN;
};

TrajectoryCoherence trajectory_coherence(int N, int nTraj, std::uint64_t seed, int threads);

using CheckFn = std::function<CheckResult(const CheckOptions&)>;

CheckResult check_steady_state(const CheckOptions& o);
CheckResult check_berry_connection(const CheckOptions& o);
CheckResult check_effective_ratio(const CheckOptions& o);
CheckResult check_limit_chain(const CheckOptions& o);
CheckResult check_oracle_equivalence(const CheckOptions& o);
CheckResult check_expansion_validity(const CheckOptions& o);
CheckResult check_benchmark(const CheckOptions& o);
CheckResult check_anchors(const CheckOptions& o);
CheckResult check_closed_forms(const CheckOptions& o);
CheckResult check_coherence(const CheckOptions& o);
CheckResult check_meanfield(const CheckOptions& o);

// Criteria 1..11 in order; ids selects a subset (empty: all).
std::vector<CheckResult> run_checks(const CheckOptions& o, const std::vector<int>& ids = {});

// Criteria run by `verify` and `run --verify` (with trajectories = false).
std::vector<int> fast_check_ids();

std::string format_result(const CheckResult& r);

} // namespace berry::cli
