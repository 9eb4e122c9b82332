#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsde/errors.hpp"
#include "bsde/version.hpp"
#include "bsdelab/config.hpp"
#include "bsdelab/dispatch.hpp"

namespace {

std::string key_help() {
    std::string out = "Config keys (key = value per line, # comments):\n";
    for (const bsdelab::KeySpec& spec : bsdelab::key_table()) {
        out += "  ";
        out += spec.key;
        if (spec.default_value[0] != '\0') {
            out += " [";
            out += spec.default_value;
            out += "]";
        }
        out += "  ";
        out += spec.help;
        out += "\n";
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bsdelab: backward SDE laboratory (Lipschitz envelopes, LSMC solving, "
                 "convergence diagnostics)"};
    app.set_version_flag("--version", std::string("bsdelab ") + bsde::kVersion);
    app.footer(key_help());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string seed_override;
    unsigned threads = 0;
    std::vector<std::string> overrides;

    app.add_option("--config", config_path, "configuration file of flat dotted keys");
    app.add_option("--out", out_dir, "output directory (reports, effective config)");
    app.add_option("--seed", seed_override, "override of mc.seed");
    app.add_option("--threads", threads,
                   "worker threads (0 = machine parallelism); never changes results");
    app.add_option("--set", overrides, "key=value override, may repeat");

    CLI::App* sub_simulate = app.add_subcommand("simulate", "simulate a Brownian batch and dump it");
    CLI::App* sub_solve = app.add_subcommand("solve", "solve one Lipschitz BSDE");
    CLI::App* sub_envelope = app.add_subcommand("envelope", "tabulate a Lipschitz envelope to CSV");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "run the full n-sweep convergence harness");
    CLI::App* sub_check = app.add_subcommand("check", "run one verification mode");
    std::string check_mode;
    sub_check->add_option("mode", check_mode,
                          "apriori-i | apriori-ii | comparison | lemma31 | residual")
        ->required();
    // Global flags may appear after the subcommand name.
    for (CLI::App* sub : {sub_simulate, sub_solve, sub_envelope, sub_sweep, sub_check})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return bsdelab::kExitConfigError;
    }

    try {
        if (!seed_override.empty()) overrides.push_back("mc.seed=" + seed_override);
        bsdelab::RunConfig cfg = bsdelab::RunConfig::load(config_path, overrides);
        cfg.threads = threads;
        cfg.out_dir = out_dir;
        if (sub_simulate->parsed()) cfg.subcommand = "simulate";
        if (sub_solve->parsed()) cfg.subcommand = "solve";
        if (sub_envelope->parsed()) cfg.subcommand = "envelope";
        if (sub_sweep->parsed()) cfg.subcommand = "sweep";
        if (sub_check->parsed()) {
            cfg.subcommand = "check";
            cfg.check_mode = check_mode;
        }
        return bsdelab::dispatch(cfg);
    } catch (const bsde::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return bsdelab::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bsdelab::kExitNumericError;
    }
}
