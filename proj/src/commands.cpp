#include "bnr/commands.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "bnr/checkpoint.hpp"
#include "bnr/kernels.hpp"

namespace bnr {

namespace {

std::size_t non_negative(const KeyValues& kv, const std::string& key, std::size_t fallback) {
    const long long v = kv.get_integer(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(key + ": must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string low_rank_text(LowRankMode m) {
    switch (m) {
        case LowRankMode::Auto: return "auto";
        case LowRankMode::On: return "on";
        case LowRankMode::Off: return "off";
    }
    return "auto";
}

std::string optional_rate(const std::optional<double>& r) { return r ? format_double(*r) : "NA"; }

std::optional<double> parse_optional_rate(const std::string& s, const std::string& what) {
    if (s == "NA") return std::nullopt;
    return parse_double(s, what);
}

const std::vector<std::string> kRunKeys = {
    "dataset", "output", "R", "eta", "nu", "a_delta", "b_delta", "zeta", "iota", "chains", "burn_in", "retained",
    "thinning", "seed", "max_burn_in", "rhat_threshold", "level", "pp_threshold", "low_rank", "checkpoints"};

const std::vector<std::string> kSimKeys = {"model", "coefficients", "n", "d", "k", "pi", "mu", "L",
                                           "pairs_once", "branch_min", "branch_max", "seed", "output"};

}  // namespace

// ---- configuration -----------------------------------------------------

RunConfig RunConfig::from(const KeyValues& kv, const CliOverrides& cli) {
    kv.require_known(kRunKeys);
    RunConfig c;
    c.dataset = kv.get_string("dataset", "");
    c.output = cli.output ? *cli.output : kv.get_string("output", "");
    const long long R = kv.get_integer("R", 7);
    if (R < 1 || R > 1000) throw ConfigError("R: must be a positive integer");
    c.hyper = Hyperparameters::defaults_for(static_cast<int>(R));
    c.hyper.eta = kv.get_double("eta", c.hyper.eta);
    c.hyper.nu = kv.get_double("nu", c.hyper.nu);
    c.hyper.aDelta = kv.get_double("a_delta", c.hyper.aDelta);
    c.hyper.bDelta = kv.get_double("b_delta", c.hyper.bDelta);
    c.hyper.zeta = kv.get_double("zeta", c.hyper.zeta);
    c.hyper.iota = kv.get_double("iota", c.hyper.iota);
    c.sweep.chains = cli.chains ? *cli.chains : non_negative(kv, "chains", c.sweep.chains);
    c.sweep.burn_in = cli.burn_in ? *cli.burn_in : non_negative(kv, "burn_in", c.sweep.burn_in);
    c.sweep.retained = cli.retained ? *cli.retained : non_negative(kv, "retained", c.sweep.retained);
    c.sweep.thinning = non_negative(kv, "thinning", c.sweep.thinning);
    c.sweep.seed = cli.seed ? *cli.seed : static_cast<std::uint64_t>(non_negative(kv, "seed", c.sweep.seed));
    c.max_burn_in = non_negative(kv, "max_burn_in", std::max(c.max_burn_in, c.sweep.burn_in));
    c.rhat_threshold = cli.rhat_threshold ? *cli.rhat_threshold : kv.get_double("rhat_threshold", c.rhat_threshold);
    c.level = kv.get_double("level", c.level);
    c.pp_threshold = kv.get_double("pp_threshold", c.pp_threshold);
    const std::string lr = kv.get_string("low_rank", "auto");
    if (lr == "auto") c.low_rank = LowRankMode::Auto;
    else if (lr == "on") c.low_rank = LowRankMode::On;
    else if (lr == "off") c.low_rank = LowRankMode::Off;
    else throw ConfigError("low_rank: expected auto, on or off");
    c.write_checkpoints = kv.get_bool("checkpoints", c.write_checkpoints);
    c.validate();
    return c;
}

void RunConfig::validate() const {
    hyper.validate();
    sweep.validate();
    if (!(rhat_threshold > 1.0)) throw ConfigError("rhat_threshold: must exceed 1");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level: must lie in (0, 1)");
    if (!(pp_threshold > 0.0 && pp_threshold < 1.0)) throw ConfigError("pp_threshold: must lie in (0, 1)");
    if (max_burn_in < sweep.burn_in) throw ConfigError("max_burn_in: must be at least burn_in");
}

KeyValues RunConfig::manifest() const {
    KeyValues kv;
    kv.set("dataset", dataset.string());
    kv.set("output", output.string());
    kv.set("R", std::to_string(hyper.R));
    kv.set("eta", format_double(hyper.eta));
    kv.set("nu", format_double(hyper.nu));
    kv.set("a_delta", format_double(hyper.aDelta));
    kv.set("b_delta", format_double(hyper.bDelta));
    kv.set("zeta", format_double(hyper.zeta));
    kv.set("iota", format_double(hyper.iota));
    kv.set("chains", std::to_string(sweep.chains));
    kv.set("burn_in", std::to_string(sweep.burn_in));
    kv.set("retained", std::to_string(sweep.retained));
    kv.set("thinning", std::to_string(sweep.thinning));
    kv.set("seed", std::to_string(sweep.seed));
    kv.set("max_burn_in", std::to_string(max_burn_in));
    kv.set("rhat_threshold", format_double(rhat_threshold));
    kv.set("level", format_double(level));
    kv.set("pp_threshold", format_double(pp_threshold));
    kv.set("low_rank", low_rank_text(low_rank));
    kv.set("checkpoints", bool_text(write_checkpoints));
    return kv;
}

SimConfig sim_config_from(const KeyValues& kv, const CliOverrides& cli) {
    kv.require_known(kSimKeys);
    SimConfig c;
    c.model = parse_sim_model(kv.get_string("model", to_string(c.model)));
    c.coefficients = parse_coefficient_kind(kv.get_string("coefficients", to_string(c.coefficients)));
    c.n = non_negative(kv, "n", c.n);
    c.d = non_negative(kv, "d", c.d);
    c.k = non_negative(kv, "k", c.k);
    c.pi = kv.get_double("pi", c.pi);
    c.mu = kv.get_double("mu", c.mu);
    if (const auto L = kv.get("L"); L && *L != "none") c.L = parse_double(*L, "L");
    c.pairs_once = kv.get_bool("pairs_once", c.pairs_once);
    c.branch_min = kv.get_double("branch_min", c.branch_min);
    c.branch_max = kv.get_double("branch_max", c.branch_max);
    c.seed = cli.seed ? *cli.seed : static_cast<std::uint64_t>(non_negative(kv, "seed", c.seed));
    c.validate();
    return c;
}

KeyValues sim_manifest(const SimConfig& c) {
    KeyValues kv;
    kv.set("model", to_string(c.model));
    kv.set("coefficients", to_string(c.coefficients));
    kv.set("n", std::to_string(c.n));
    kv.set("d", std::to_string(c.d));
    kv.set("k", std::to_string(c.k));
    kv.set("pi", format_double(c.pi));
    kv.set("mu", format_double(c.mu));
    kv.set("L", c.L ? format_double(*c.L) : "none");
    kv.set("pairs_once", bool_text(c.pairs_once));
    kv.set("branch_min", format_double(c.branch_min));
    kv.set("branch_max", format_double(c.branch_max));
    kv.set("seed", std::to_string(c.seed));
    return kv;
}

// ---- fitting -----------------------------------------------------------

FitOutcome fit_model(const NetworkDataset& data, const RunConfig& config, std::ostream& log,
                     const std::optional<fs::path>& checkpoint_dir) {
    config.validate();
    Model model(data, config.hyper);
    if (config.low_rank == LowRankMode::On) model.set_low_rank_gamma(true);
    if (config.low_rank == LowRankMode::Off) model.set_low_rank_gamma(false);

    const std::size_t C = config.sweep.chains;
    if (C == 1) log << "warning: a single chain was requested; R-hat compares its two halves only\n";

    std::vector<Chain> chains;
    chains.reserve(C);
    for (std::size_t c = 0; c < C; ++c) chains.emplace_back(model, config.sweep.seed, c);
    std::vector<Checkpoint> after_burn(C);

    auto for_chains = [&](const std::function<void(std::size_t)>& fn) {
        kernels::for_each_index(C, Execution::Parallel, [&](std::size_t c) {
            try {
                fn(c);
            } catch (const NumericalError& e) {
                throw NumericalError("chain " + std::to_string(c + 1) + ", " + e.what());
            }
        });
    };

    FitOutcome out;
    std::size_t burn = config.sweep.burn_in;
    for (;;) {
        ++out.attempts;
        PosteriorDraws draws = PosteriorDraws::allocate(C, config.sweep.retained, data.V());
        for_chains([&](std::size_t c) {
            chains[c].advance(burn - static_cast<std::size_t>(chains[c].iteration()));
            after_burn[c] = chains[c].checkpoint();
            // Retention runs on a copy resumed from the checkpoint so a
            // later extension continues the burn-in, not the retained run.
            Chain sampler(model, after_burn[c]);
            sampler.sample(config.sweep.retained, config.sweep.thinning, draws, c);
        });
        if (checkpoint_dir && config.write_checkpoints) {
            for (std::size_t c = 0; c < C; ++c) {
                save_checkpoint(*checkpoint_dir / ("chain_" + std::to_string(c + 1) + ".ckpt"), after_burn[c]);
            }
        }
        out.convergence = assess_convergence(draws, config.rhat_threshold);
        out.draws = std::move(draws);
        out.burn_in_used = burn;
        log << "attempt " << out.attempts << ": burn-in " << burn << ", max R-hat "
            << format_double(out.convergence.max_rhat) << (out.convergence.converged ? " (converged)\n" : "\n");
        if (out.convergence.converged || burn >= config.max_burn_in) break;
        burn = std::min(burn == 0 ? std::size_t{1000} : 2 * burn, config.max_burn_in);
        log << "extending burn-in to " << burn << "\n";
    }
    out.summary = summarize(out.draws, config.level, config.pp_threshold);
    return out;
}

// ---- metrics -----------------------------------------------------------

std::string metrics_csv(const MetricsRow& row) {
    if (row.label.find_first_of(",\n") != std::string::npos) {
        throw ConfigError("label: must not contain commas or newlines");
    }
    return "label,edge_fpr,edge_fnr,node_fpr,node_fnr,mse_coefficient,mse_response\n" + row.label + ',' +
           optional_rate(row.rates.edge_fpr) + ',' + optional_rate(row.rates.edge_fnr) + ',' +
           optional_rate(row.rates.node_fpr) + ',' + optional_rate(row.rates.node_fnr) + ',' +
           format_double(row.mse.coefficient) + ',' + format_double(row.mse.response) + '\n';
}

MetricsRow parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
    if (f.size() != 7) throw IoError("metrics: expected 7 fields");
    MetricsRow r;
    r.label = f[0];
    r.rates.edge_fpr = parse_optional_rate(f[1], "edge_fpr");
    r.rates.edge_fnr = parse_optional_rate(f[2], "edge_fnr");
    r.rates.node_fpr = parse_optional_rate(f[3], "node_fpr");
    r.rates.node_fnr = parse_optional_rate(f[4], "node_fnr");
    r.mse.coefficient = parse_double(f[5], "mse_coefficient");
    r.mse.response = parse_double(f[6], "mse_response");
    return r;
}

// ---- commands ----------------------------------------------------------

int cmd_simulate(const fs::path& config_path, const CliOverrides& cli, std::ostream& log) {
    const KeyValues kv = KeyValues::load(config_path);
    const SimConfig config = sim_config_from(kv, cli);
    const fs::path out = cli.output ? fs::path(*cli.output) : fs::path(kv.get_string("output", ""));
    if (out.empty()) throw ConfigError("output: no output directory given");
    const SimResult sim = simulate(config);
    write_dataset(out, sim.data);
    write_truth(out / "truth.txt", config, sim.truth);
    KeyValues manifest = sim_manifest(config);
    manifest.set("capped", std::to_string(sim.truth.capped));
    atomic_write(out / "manifest.txt", manifest.to_string());
    log << "wrote " << sim.data.n() << " samples over " << sim.data.V() << " nodes to " << out.string() << "\n";
    return kExitOk;
}

int cmd_fit(const fs::path& config_path, const CliOverrides& cli, std::ostream& log) {
    const RunConfig config = RunConfig::from(KeyValues::load(config_path), cli);
    if (config.dataset.empty()) throw ConfigError("dataset: no dataset directory given");
    if (config.output.empty()) throw ConfigError("output: no output directory given");
    const NetworkDataset data = read_dataset(config.dataset);
    fs::create_directories(config.output);
    const FitOutcome fit = fit_model(data, config, log, config.output / "checkpoints");

    write_draws(config.output / "draws.bin", fit.draws);
    write_convergence(config.output, fit.convergence);
    write_summary(config.output, fit.summary);
    KeyValues manifest = config.manifest();
    manifest.set("burn_in_used", std::to_string(fit.burn_in_used));
    manifest.set("attempts", std::to_string(fit.attempts));
    manifest.set("converged", bool_text(fit.convergence.converged));
    manifest.set("n", std::to_string(data.n()));
    manifest.set("V", std::to_string(data.V()));
    atomic_write(config.output / "manifest.txt", manifest.to_string());
    if (!fit.convergence.converged) {
        log << "not converged: max R-hat " << format_double(fit.convergence.max_rhat) << " > "
            << format_double(config.rhat_threshold) << " after burn-in " << fit.burn_in_used << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_evaluate(const fs::path& config_path, const CliOverrides& cli, std::ostream& log) {
    const KeyValues kv = KeyValues::load(config_path);
    kv.require_known({"run", "truth", "dataset", "label", "output"});
    const fs::path run = kv.get_string("run", "");
    const fs::path truth_path = kv.get_string("truth", "");
    if (run.empty()) throw ConfigError("run: no fit output directory given");
    if (truth_path.empty()) throw ConfigError("truth: no truth file given");
    const KeyValues fit_manifest = KeyValues::load(run / "manifest.txt");
    const fs::path dataset = kv.get_string("dataset", fit_manifest.get_string("dataset", ""));
    const fs::path out = cli.output ? fs::path(*cli.output) : fs::path(kv.get_string("output", run.string()));

    const NetworkDataset data = read_dataset(dataset);
    const TruthRecord truth = read_truth(truth_path);
    const PosteriorDraws draws = read_draws(run / "draws.bin");
    if (truth.V != data.V() || truth.n != data.n()) {
        throw ConfigError("truth: dimensions (n=" + std::to_string(truth.n) + ", V=" + std::to_string(truth.V) +
                          ") do not match the dataset (n=" + std::to_string(data.n()) +
                          ", V=" + std::to_string(data.V()) + ")");
    }
    if (draws.V != data.V()) throw ConfigError("run: draws do not match the dataset dimensions");

    const SummaryReport summary = summarize(draws, fit_manifest.get_double("level", 0.95),
                                            fit_manifest.get_double("pp_threshold", 0.5));
    MetricsRow row;
    row.label = kv.get_string("label", run.filename().string());
    row.rates = classification_rates(summary, truth.edges, truth.nodes);
    row.mse = mse_metrics(summary, truth.B, data);
    atomic_write(out / "metrics.csv", metrics_csv(row));
    log << "wrote " << (out / "metrics.csv").string() << "\n";
    return kExitOk;
}

int cmd_diagnose(const fs::path& config_path, const CliOverrides& cli, std::ostream& log) {
    const KeyValues kv = KeyValues::load(config_path);
    kv.require_known({"run", "rhat_threshold", "output"});
    const fs::path run = kv.get_string("run", "");
    if (run.empty()) throw ConfigError("run: no fit output directory given");
    const double threshold = cli.rhat_threshold ? *cli.rhat_threshold : kv.get_double("rhat_threshold", 1.2);
    if (!(threshold > 1.0)) throw ConfigError("rhat_threshold: must exceed 1");
    const fs::path out = cli.output ? fs::path(*cli.output) : fs::path(kv.get_string("output", run.string()));
    const PosteriorDraws draws = read_draws(run / "draws.bin");
    if (draws.chains == 1) log << "warning: single chain; R-hat compares its two halves only\n";
    const ConvergenceReport report = assess_convergence(draws, threshold);
    write_convergence(out, report);
    log << "max R-hat " << format_double(report.max_rhat) << (report.converged ? " (converged)\n" : "\n");
    return report.converged ? kExitOk : kExitNotConverged;
}

int run_guarded(const std::function<int()>& fn, std::ostream& log) {
    try {
        return fn();
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << "\n";
        return kExitIoOrConfig;
    } catch (const IoError& e) {
        log << "i/o error: " << e.what() << "\n";
        return kExitIoOrConfig;
    } catch (const fs::filesystem_error& e) {
        log << "i/o error: " << e.what() << "\n";
        return kExitIoOrConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitIoOrConfig;
    }
}

}  // namespace bnr
