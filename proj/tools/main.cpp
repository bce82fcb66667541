#include <iostream>

#include <CLI11.hpp>

#include "bnr/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian network regression: simulate, fit, evaluate, diagnose"};
    app.require_subcommand(1);

    std::string config;
    bnr::CliOverrides cli;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "key = value configuration file")->required();
        sub->add_option("--output", cli.output, "output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset and its truth file");
    add_common(simulate);
    simulate->add_option("--seed", cli.seed, "random seed");

    auto* fit = app.add_subcommand("fit", "run the Gibbs sampler on a dataset");
    add_common(fit);
    fit->add_option("--seed", cli.seed, "random seed");
    fit->add_option("--chains", cli.chains, "number of chains")->check(CLI::PositiveNumber);
    fit->add_option("--burn-in", cli.burn_in, "burn-in sweeps per chain");
    fit->add_option("--retained", cli.retained, "retained sweeps per chain")->check(CLI::PositiveNumber);
    fit->add_option("--rhat-threshold", cli.rhat_threshold, "convergence threshold on R-hat");

    auto* evaluate = app.add_subcommand("evaluate", "score a fit against the simulation truth");
    add_common(evaluate);

    auto* diagnose = app.add_subcommand("diagnose", "recompute R-hat for a finished fit");
    add_common(diagnose);
    diagnose->add_option("--rhat-threshold", cli.rhat_threshold, "convergence threshold on R-hat");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bnr::kExitIoOrConfig;
    }

    return bnr::run_guarded(
        [&] {
            if (*simulate) return bnr::cmd_simulate(config, cli, std::cerr);
            if (*fit) return bnr::cmd_fit(config, cli, std::cerr);
            if (*evaluate) return bnr::cmd_evaluate(config, cli, std::cerr);
            return bnr::cmd_diagnose(config, cli, std::cerr);
        },
        std::cerr);
}
