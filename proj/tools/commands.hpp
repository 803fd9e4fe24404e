#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace berry::cli {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitNumerical = 3;

struct Invocation {
    std::string command; // run, verify, anchors
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output;
    bool verify = false;
    bool noOracle = false;
};

std::string code_version();

// THREADS environment value, if set to a positive integer.
std::optional<int> env_threads();

int cmd_run(const Invocation& inv);
int cmd_verify(const Invocation& inv);
int cmd_anchors(const Invocation& inv);

} // namespace berry::cli
