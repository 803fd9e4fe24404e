#include "checks.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace berry::cli;

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1..11"};
    bool full = false;
    CheckOptions o;
    o.benchmarkConfig = BERRY_CONFIG_DIR "/smoke.json";
    o.workDir = "acceptance_work";
    std::vector<int> ids;
    app.add_flag("--full", full, "full-scale benchmark and trajectory checks");
    app.add_option("--benchmark", o.benchmarkConfig, "trajectory config for criterion 7");
    app.add_option("--work-dir", o.workDir, "checkpoint directory");
    app.add_option("--threads", o.threads, "thread budget");
    app.add_option("ids", ids, "criteria to run (default: all)");
    CLI11_PARSE(app, argc, argv);
    if (full) {
        o.scale = Scale::Full;
        if (app.count("--benchmark") == 0) o.benchmarkConfig = BERRY_CONFIG_DIR "/benchmark.json";
    }

    if (ids.empty())
        for (int i = 1; i <= 11; ++i) ids.push_back(i);
    int failed = 0;
    for (int id : ids) {
        const CheckResult r = run_checks(o, {id}).front();
        std::cout << format_result(r) << std::endl;
        if (!r.pass && !r.skipped) ++failed;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
