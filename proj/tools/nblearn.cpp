#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "nblearn/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Distributed learning over networks: simulate belief dynamics, "
                 "sweep topologies, and verify convergence bounds."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--workers", workers, "worker threads for ensembles (default: all cores)")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", quiet, "suppress informational output");
    };

    CLI::App* run = app.add_subcommand("run", "simulate one trajectory and write CSV artifacts");
    CLI::App* sweep = app.add_subcommand("sweep", "ensemble convergence times over (size, rule) cells");
    CLI::App* verify = app.add_subcommand("verify", "executable checks of the convergence bounds");
    add_common(run);
    add_common(sweep);
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage problems share the validation exit code; --help stays 0.
        const int code = app.exit(e);
        return code == 0 ? 0 : nblearn::kExitValidation;
    }

    nblearn::CliOptions opt;
    opt.config_path = config_path;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    opt.workers = workers;
    opt.quiet = quiet;

    try {
        if (run->parsed()) return nblearn::cmd_run(opt, std::cout, std::cerr);
        if (sweep->parsed()) return nblearn::cmd_sweep(opt, std::cout, std::cerr);
        return nblearn::cmd_verify(opt, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return nblearn::kExitRuntime;
    }
}
