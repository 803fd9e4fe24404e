#include "config.hpp"

#include "berry/errors.hpp"
#include "berry/meanfield.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace berry::cli {

const char* to_string(Mode m) {
    switch (m) {
    case Mode::Steady: return "steady";
    case Mode::Effective: return "effective";
    case Mode::Scan: return "scan";
    case Mode::Trajectories: return "trajectories";
    case Mode::Coherence: return "coherence";
    case Mode::Verify: return "verify";
    }
    return "?";
}

namespace {

class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    const json& get(const std::string& k) {
        used_.insert(k);
        if (!j_.contains(k)) throw ConfigError(at(k) + ": required field missing");
        return j_.at(k);
    }

    double num(const std::string& k) {
        const json& v = get(k);
        if (!v.is_number()) throw ConfigError(at(k) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(k) + ": must be finite");
        return x;
    }
    double num(const std::string& k, double def) { return has(k) ? num(k) : (used_.insert(k), def); }

    double positive(const std::string& k) {
        const double x = num(k);
        if (!(x > 0.0)) throw ConfigError(at(k) + ": must be positive");
        return x;
    }
    double positive(const std::string& k, double def) { return has(k) ? positive(k) : (used_.insert(k), def); }

    double nonneg(const std::string& k) {
        const double x = num(k);
        if (x < 0.0) throw ConfigError(at(k) + ": must be non-negative");
        return x;
    }
    double nonneg(const std::string& k, double def) { return has(k) ? nonneg(k) : (used_.insert(k), def); }

    long long integer(const std::string& k, long long lo, long long hi) {
        const json& v = get(k);
        if (!v.is_number_integer()) throw ConfigError(at(k) + ": expected an integer");
        const long long x = v.get<long long>();
        if (x < lo || x > hi)
            throw ConfigError(at(k) + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }
    long long integer(const std::string& k, long long lo, long long hi, long long def) {
        return has(k) ? integer(k, lo, hi) : (used_.insert(k), def);
    }

    bool boolean(const std::string& k, bool def) {
        used_.insert(k);
        if (!has(k)) return def;
        if (!j_.at(k).is_boolean()) throw ConfigError(at(k) + ": expected true or false");
        return j_.at(k).get<bool>();
    }

    std::string choice(const std::string& k, std::initializer_list<const char*> options, const char* def = nullptr) {
        used_.insert(k);
        if (!has(k)) {
            if (def) return def;
            throw ConfigError(at(k) + ": required field missing");
        }
        if (!j_.at(k).is_string()) throw ConfigError(at(k) + ": expected a string");
        const auto s = j_.at(k).get<std::string>();
        std::string list;
        for (const char* o : options) {
            if (s == o) return s;
            list += std::string(list.empty() ? "" : ", ") + o;
        }
        throw ConfigError(at(k) + ": must be one of " + list);
    }

    std::string text(const std::string& k, const std::string& def) {
        used_.insert(k);
        if (!has(k)) return def;
        if (!j_.at(k).is_string()) throw ConfigError(at(k) + ": expected a string");
        return j_.at(k).get<std::string>();
    }

    cplx complex(const std::string& k) {
        const json& v = get(k);
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        throw ConfigError(at(k) + ": expected a number or [re, im]");
    }

    Obj sub(const std::string& k) { return Obj(get(k), at(k)); }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(at(k) + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

SingleParticleRates parse_rates(Obj& o) {
    SingleParticleRates r;
    if (!o.has("rates")) {
        o.boolean("rates", false);
        return r;
    }
    Obj q = o.sub("rates");
    r.gammaEUp = q.nonneg("gammaEUp", 0.0);
    r.gammaEDown = q.nonneg("gammaEDown", 0.0);
    r.gammaD = q.nonneg("gammaD", 0.0);
    q.finish();
    return r;
}

GammaDMode parse_gamma_d_mode(Obj& o) {
    return o.choice("gammaDMode", {"constant", "from_emission"}, "constant") == "constant" ? GammaDMode::Constant
                                                                                        : GammaDMode::FromEmission;
}

void parse_steady(Obj& p, SteadyConfig& c) {
    const bool spin = p.has("spin"), cav = p.has("cavity");
    if (spin == cav) throw ConfigError("parameters: exactly one of spin or cavity is required");
    if (spin) {
        Obj s = p.sub("spin");
        c.spin.N = int(s.integer("N", 1, 1000000000));
        c.spin.Omega = s.complex("Omega");
        c.spin.delta = s.num("delta");
        c.spin.Gamma = s.positive("Gamma", 1.0);
        c.spin.chi = s.num("chi", 0.0);
        c.spin.GammaDelta = s.nonneg("GammaDelta", 0.0);
        s.finish();
        p.boolean("cavity", false);
    } else {
        Obj s = p.sub("cavity");
        CavityParams cp;
        cp.g_c = s.positive("g_c");
        cp.kappa = s.positive("kappa");
        cp.epsilon = s.num("epsilon");
        cp.Delta = s.num("Delta", 0.0);
        cp.delta = s.num("delta");
        cp.N = int(s.integer("N", 1, 1000000000));
        s.finish();
        c.cavity = cp;
        c.spin = derive_effective(cp);
        c.spin.N = cp.N;
        p.boolean("spin", false);
    }
    c.N_J = p.positive("N_J", 0.5 * c.spin.N);
    if (c.N_J > c.spin.N) throw ConfigError("parameters.N_J: must not exceed N");
    if (p.has("meanfield")) {
        Obj m = p.sub("meanfield");
        c.integrate = true;
        c.tEnd = m.positive("tEnd");
        c.dtOut = m.positive("dtOut");
        c.fullCavity = m.choice("model", {"spin", "cavity"}, "spin") == "cavity";
        if (c.fullCavity && !c.cavity) throw ConfigError("parameters.meanfield.model: cavity requires parameters.cavity");
        m.finish();
    } else {
        p.boolean("meanfield", false);
    }
}

void parse_effective(Obj& p, EffectiveConfig& c) {
    c.N = p.positive("N");
    c.Gamma = p.positive("Gamma", 1.0);
    const auto kind = p.choice("model", {"hp", "adiabatic", "weak_drive"}, "hp");
    c.kind = kind == "hp" ? EffectiveKind::HP : kind == "adiabatic" ? EffectiveKind::Adiabatic : EffectiveKind::WeakDrive;
    c.deltaOverNGamma = p.num("delta_over_NGamma");
    if (c.kind == EffectiveKind::WeakDrive) {
        c.Omega = p.complex("Omega");
        c.chi = p.num("chi", 0.0);
        c.GammaDelta = p.positive("GammaDelta");
        p.boolean("cos_theta", false);
    } else {
        c.cosTheta = p.num("cos_theta");
        if (!(c.cosTheta > 0.0 && c.cosTheta < 1.0)) throw ConfigError("parameters.cos_theta: must lie in (0, 1)");
    }
    c.rates = parse_rates(p);
    c.gammaDMode = parse_gamma_d_mode(p);
    if (p.has("curve")) {
        Obj q = p.sub("curve");
        c.tMax = q.nonneg("tMax", 0.0);
        c.points = int(q.integer("points", 2, 1000000, 200));
        q.finish();
    } else {
        p.boolean("curve", false);
    }
}

void parse_scan(Obj& p, ScanSpec& s) {
    s.setup.N = p.positive("N");
    s.setup.Gamma = p.positive("Gamma", 1.0);
    s.setup.kind = p.choice("model", {"hp", "adiabatic"}, "hp") == "hp" ? ModelKind::HPAE : ModelKind::Adiabatic;
    s.setup.rates = parse_rates(p);
    s.setup.gammaDMode = parse_gamma_d_mode(p);
    Obj d = p.sub("delta_over_NGamma");
    s.deltaMin = d.positive("min");
    s.deltaMax = d.positive("max");
    s.nDelta = int(d.integer("count", 1, 100000));
    s.logDelta = d.boolean("log", true);
    d.finish();
    if (s.deltaMax < s.deltaMin) throw ConfigError("parameters.delta_over_NGamma.max: must be >= min");
    Obj c = p.sub("cos_theta");
    s.cosMin = c.num("min");
    s.cosMax = c.num("max");
    s.nCos = int(c.integer("count", 1, 100000));
    c.finish();
    if (!(s.cosMin > 0.0 && s.cosMax < 1.0 && s.cosMin <= s.cosMax))
        throw ConfigError("parameters.cos_theta: need 0 < min <= max < 1");
}

void parse_trajectories(Obj& p, TrajectoryConfig& c) {
    auto& q = c.params;
    auto& s = c.schedule;
    q.N = int(p.integer("N", 2, 100000));
    q.Gamma = p.positive("Gamma", 1.0);
    q.delta = p.num("delta_over_NGamma") * q.N * q.Gamma;
    const bool byCos = p.has("cos_theta"), byOmega = p.has("Omega_over_NGamma");
    if (byCos == byOmega) throw ConfigError("parameters: exactly one of cos_theta or Omega_over_NGamma is required");
    if (byCos) {
        c.cosTheta = p.num("cos_theta");
        if (!(c.cosTheta > 0.0 && c.cosTheta <= 1.0)) throw ConfigError("parameters.cos_theta: must lie in (0, 1]");
        q.Omega = drive_for_angle(q.delta, 0.5 * q.N, c.cosTheta, q.Gamma);
        p.boolean("Omega_over_NGamma", false);
    } else {
        q.Omega = p.complex("Omega_over_NGamma") * double(q.N) * q.Gamma;
        p.boolean("cos_theta", false);
        c.cosTheta = NAN;
    }
    s.dN = int(p.integer("dN", 0, q.N / 2));
    s.tOff = p.nonneg("tOff");
    s.tEnd = p.positive("tEnd");
    if (s.tOff > s.tEnd) throw ConfigError("parameters.tOff: must not exceed tEnd");
    const double dtMax = 1.0 / (250.0 * q.N * q.Gamma);
    s.dtBase = p.positive("dtBase", dtMax);
    if (s.dtBase > dtMax * (1.0 + 1e-12)) throw ConfigError("parameters.dtBase: must not exceed 1/(250 N Gamma)");
    s.dtShrinkFactor = p.positive("dtShrinkFactor", 5.0);
    if (s.dtShrinkFactor < 1.0) throw ConfigError("parameters.dtShrinkFactor: must be >= 1");
    s.shrinkWindowSteps = int(p.integer("shrinkWindowSteps", 0, 100000000, 500));
    s.nTraj = int(p.integer("nTraj", 1, 100000000));
    s.sampleEvery = p.positive("sampleEvery", s.tEnd / 100.0);
    s.jumpCap = p.positive("jumpCap", 0.05);
    if (s.jumpCap >= 1.0) throw ConfigError("parameters.jumpCap: must be < 1");
    s.stepper = p.choice("stepper", {"euler", "midpoint"}, "euler") == "euler" ? Stepper::Euler : Stepper::Midpoint;
    s.unraveling = p.choice("unraveling", {"shifted", "unshifted"}, "shifted") == "shifted" ? Unraveling::Shifted
                                                                                           : Unraveling::Unshifted;
    c.varphi = p.num("varphi", 0.0);
    c.minimumFrom = p.nonneg("minimumFrom", 0.0);
    if (c.minimumFrom > s.tEnd) throw ConfigError("parameters.minimumFrom: must not exceed tEnd");
    c.checkpoint = p.boolean("checkpoint", false);
}

void parse_coherence(Obj& p, CoherenceConfig& c) {
    c.N_J = int(p.integer("N_J", 0, 100000000));
    c.N_Jprime = int(p.integer("N_Jprime", 0, 100000000));
    c.nEmax = int(p.integer("nEmax", 0, std::min(c.N_J, c.N_Jprime)));
    c.tEnd = p.nonneg("tEnd", 0.0);
}

void parse_verify(Obj& p, VerifyConfig& c) {
    c.oracle = p.boolean("oracle", true);
    c.fault = p.choice("fault", {"none", "chi_sign"}, "none");
    if (c.fault == "none") c.fault.clear();
}

} // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.raw = j;
    Obj top(j, "");
    const auto mode = top.choice("mode", {"steady", "effective", "scan", "trajectories", "coherence", "verify"});
    c.mode = mode == "steady"         ? Mode::Steady
             : mode == "effective"    ? Mode::Effective
             : mode == "scan"         ? Mode::Scan
             : mode == "trajectories" ? Mode::Trajectories
             : mode == "coherence"    ? Mode::Coherence
                                      : Mode::Verify;
    c.output = top.text("output", "out");
    if (c.output.empty()) throw ConfigError("output: must not be empty");
    top.text("description", "");
    if (top.has("seed")) {
        const json& s = top.get("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed: expected a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (top.has("threads")) {
        const json& t = top.get("threads");
        if (t.is_string()) {
            if (t.get<std::string>() != "auto") throw ConfigError("threads: expected an integer or \"auto\"");
        } else if (t.is_number_integer() && t.get<long long>() >= 1 && t.get<long long>() <= 4096) {
            c.threads = int(t.get<long long>());
        } else {
            throw ConfigError("threads: expected an integer in [1, 4096] or \"auto\"");
        }
    }
    json empty = json::object();
    Obj p = top.has("parameters") ? Obj(top.get("parameters"), "parameters") : Obj(empty, "parameters");
    try {
        switch (c.mode) {
        case Mode::Steady: parse_steady(p, c.steady); break;
        case Mode::Effective: parse_effective(p, c.effective); break;
        case Mode::Scan: parse_scan(p, c.scan); break;
        case Mode::Trajectories: parse_trajectories(p, c.trajectories); break;
        case Mode::Coherence: parse_coherence(p, c.coherence); break;
        case Mode::Verify: parse_verify(p, c.verify); break;
        }
    } catch (const berry::Error& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }
    p.finish();
    top.finish();
    c.trajectories.schedule.seed = c.seed;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace berry::cli
