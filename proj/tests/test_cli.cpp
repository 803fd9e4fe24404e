#include "commands.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace berry::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
    const fs::path d = fs::temp_directory_path() / "berry_cli_tests";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, json j) {
    const fs::path dir = scratch() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    if (!j.contains("output")) j["output"] = (dir / "out").string();
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

json effective_config() {
    return {{"mode", "effective"},
            {"parameters", {{"N", 1000}, {"model", "hp"}, {"delta_over_NGamma", 0.05}, {"cos_theta", 0.5}}}};
}

Invocation run_of(const fs::path& config) {
    Invocation inv;
    inv.command = "run";
    inv.configPath = config.string();
    return inv;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("effective run writes outputs and a manifest") {
    const fs::path cfg = write_config("effective", effective_config());
    REQUIRE(cmd_run(run_of(cfg)) == kExitOk);
    const fs::path out = cfg.parent_path() / "out";
    CHECK(fs::exists(out / "squeezing_curve.csv"));
    CHECK(fs::exists(out / "effective.json"));
    const json m = json::parse(slurp(out / "manifest.json"));
    CHECK(m["exit_code"] == 0);
    CHECK(m["status"] == "ok");
    CHECK(m.contains("config_hash"));
    CHECK(m.contains("wall_time_s"));
    CHECK(m.contains("seeds"));
    CHECK(m["code_version"] == code_version());
}

TEST_CASE("runs are byte-for-byte deterministic") {
    const fs::path cfg = write_config("determinism", effective_config());
    REQUIRE(cmd_run(run_of(cfg)) == kExitOk);
    const std::string first = slurp(cfg.parent_path() / "out" / "squeezing_curve.csv");
    REQUIRE(cmd_run(run_of(cfg)) == kExitOk);
    CHECK(first == slurp(cfg.parent_path() / "out" / "squeezing_curve.csv"));
    CHECK_FALSE(first.empty());
}

TEST_CASE("unknown key is an invalid config and still leaves a manifest") {
    json j = effective_config();
    j["parameters"]["colour"] = 1;
    const fs::path cfg = write_config("unknown_key", j);
    CHECK(cmd_run(run_of(cfg)) == kExitInvalidConfig);
    const fs::path manifest = cfg.string() + ".manifest.json";
    REQUIRE(fs::exists(manifest));
    const json m = json::parse(slurp(manifest));
    CHECK(m["exit_code"] == 2);
    CHECK(m["error"].get<std::string>().find("colour") != std::string::npos);
}

TEST_CASE("missing config file is an invalid config with a manifest") {
    const fs::path cfg = scratch() / "missing" / "absent.json";
    fs::create_directories(cfg.parent_path());
    fs::remove(cfg.string() + ".manifest.json");
    CHECK(cmd_run(run_of(cfg)) == kExitInvalidConfig);
    CHECK(fs::exists(cfg.string() + ".manifest.json"));
}

TEST_CASE("malformed json is an invalid config") {
    const fs::path dir = scratch() / "malformed";
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << "{\"mode\": ";
    CHECK(cmd_run(run_of(dir / "config.json")) == kExitInvalidConfig);
}

TEST_CASE("out-of-range parameter is an invalid config") {
    json j = effective_config();
    j["parameters"]["cos_theta"] = 1.5;
    CHECK(cmd_run(run_of(write_config("range", j))) == kExitInvalidConfig);
}

TEST_CASE("numerical failure exits 3 with a manifest") {
    const json j = {{"mode", "effective"},
                    {"parameters",
                     {{"N", 1000}, {"model", "weak_drive"}, {"delta_over_NGamma", 0.01}, {"Omega", 0.0},
                      {"chi", 0.0}, {"GammaDelta", 1.0}}}};
    const fs::path cfg = write_config("numerical", j);
    CHECK(cmd_run(run_of(cfg)) == kExitNumerical);
    const json m = json::parse(slurp(cfg.parent_path() / "out" / "manifest.json"));
    CHECK(m["exit_code"] == 3);
    CHECK(m["status"] == "error");
}

TEST_CASE("verify with an injected fault exits 1") {
    const json j = {{"mode", "verify"}, {"parameters", {{"fault", "chi_sign"}}}};
    Invocation inv;
    inv.command = "verify";
    inv.configPath = write_config("fault", j).string();
    CHECK(cmd_verify(inv) == kExitVerifyFailed);
    const json good = {{"mode", "verify"}, {"parameters", json::object()}};
    inv.configPath = write_config("verify_ok", good).string();
    CHECK(cmd_verify(inv) == kExitOk);
}

TEST_CASE("thread flag overrides the environment") {
    const fs::path cfg = write_config("threads", effective_config());
    setenv("THREADS", "3", 1);
    Invocation inv = run_of(cfg);
    REQUIRE(cmd_run(inv) == kExitOk);
    CHECK(json::parse(slurp(cfg.parent_path() / "out" / "manifest.json"))["threads"] == 3);
    inv.threads = 2;
    REQUIRE(cmd_run(inv) == kExitOk);
    CHECK(json::parse(slurp(cfg.parent_path() / "out" / "manifest.json"))["threads"] == 2);
    unsetenv("THREADS");
}

TEST_CASE("seed flag overrides the configured seed") {
    json j = effective_config();
    j["seed"] = 5;
    const fs::path cfg = write_config("seed", j);
    Invocation inv = run_of(cfg);
    inv.seed = 9;
    REQUIRE(cmd_run(inv) == kExitOk);
    CHECK(json::parse(slurp(cfg.parent_path() / "out" / "manifest.json"))["seeds"]["seed"] == 9);
}

} // TEST_SUITE
