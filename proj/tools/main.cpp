#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace berry::cli;

int main(int argc, char** argv) {
    CLI::App app{"Berry-phase spin squeezing engine"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", code_version());

    Invocation inv;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string output;

    auto common = [&](CLI::App* c, bool configRequired) {
        auto* opt = c->add_option("--config", inv.configPath, "JSON run configuration");
        if (configRequired) opt->required();
        c->add_option("--seed", seed, "override the configured seed");
        c->add_option("--threads", threads, "thread budget (overrides THREADS)")->check(CLI::Range(1, 4096));
    };

    auto* run = app.add_subcommand("run", "execute the configured mode");
    common(run, true);
    run->add_flag("--verify", inv.verify, "run the verification suite after the run");
    run->add_flag("--no-oracle", inv.noOracle, "skip oracle-based checks");

    auto* verify = app.add_subcommand("verify", "run the cross-check suite");
    common(verify, false);
    verify->add_flag("--no-oracle", inv.noOracle, "skip oracle-based checks");
    verify->add_option("--output", output, "output directory");

    auto* anchors = app.add_subcommand("anchors", "emit the anchor-point table");
    anchors->add_option("--config", inv.configPath, "JSON configuration (output directory)");
    anchors->add_option("--output", output, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidConfig;
    }

    auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (!sub) {
        std::cout << app.help();
        return kExitInvalidConfig;
    }
    inv.command = sub->get_name();
    if (sub != anchors) {
        if (sub->count("--seed")) inv.seed = seed;
        if (sub->count("--threads")) inv.threads = threads;
    }
    if (!output.empty()) inv.output = output;

    if (inv.command == "run") return cmd_run(inv);
    if (inv.command == "verify") return cmd_verify(inv);
    return cmd_anchors(inv);
}
