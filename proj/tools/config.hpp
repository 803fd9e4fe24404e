#pragma once

#include "berry/effective.hpp"
#include "berry/params.hpp"
#include "berry/squeezing.hpp"
#include "berry/trajectories.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace berry::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Steady, Effective, Scan, Trajectories, Coherence, Verify };

const char* to_string(Mode m);

struct SteadyConfig {
    EffectiveSpinParams spin;
    std::optional<CavityParams> cavity;
    double N_J = 0.0;
    bool integrate = false;
    double tEnd = 0.0;
    double dtOut = 0.0;
    bool fullCavity = false;
};

enum class EffectiveKind { HP, Adiabatic, WeakDrive };

struct EffectiveConfig {
    double N = 0.0;
    double Gamma = 1.0;
    EffectiveKind kind = EffectiveKind::HP;
    double deltaOverNGamma = 0.0;
    double cosTheta = 0.5;
    cplx Omega{0.0, 0.0};
    double chi = 0.0;
    double GammaDelta = 0.0;
    SingleParticleRates rates;
    GammaDMode gammaDMode = GammaDMode::Constant;
    double tMax = 0.0; // 0: 3 t_opt
    int points = 200;
};

struct TrajectoryConfig {
    EffectiveSpinParams params;
    Schedule schedule;
    double cosTheta = 0.5;
    double varphi = 0.0;
    double minimumFrom = 0.0; // start of the window for squeezing minima
    bool checkpoint = false;
};

struct CoherenceConfig {
    int N_J = 0;
    int N_Jprime = 0;
    int nEmax = 0;
    double tEnd = 0.0; // 0: 50 / W_min
};

struct VerifyConfig {
    bool oracle = true;
    std::string fault; // "", "chi_sign"
};

struct RunConfig {
    Mode mode = Mode::Verify;
    std::string output = "out";
    std::uint64_t seed = 0;
    int threads = 0; // 0: auto
    SteadyConfig steady;
    EffectiveConfig effective;
    ScanSpec scan;
    TrajectoryConfig trajectories;
    CoherenceConfig coherence;
    VerifyConfig verify;
    json raw;
};

// Validates against the schema; unknown keys and bad values raise ConfigError
// naming the offending field.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

// FNV-1a 64 of the canonical (sorted-key, compact) dump.
std::string config_hash(const json& j);

} // namespace berry::cli
