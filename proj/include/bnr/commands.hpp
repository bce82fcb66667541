#ifndef BNR_COMMANDS_HPP
#define BNR_COMMANDS_HPP

#include <functional>
#include <iosfwd>
#include <optional>

#include "bnr/gibbs.hpp"
#include "bnr/io.hpp"

namespace bnr {

enum ExitCode : int {
    kExitOk = 0,
    kExitNotConverged = 2,
    kExitNumerical = 3,
    kExitIoOrConfig = 4,
};

/// Command-line flags that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> chains;
    std::optional<std::size_t> burn_in;
    std::optional<std::size_t> retained;
    std::optional<double> rhat_threshold;
    std::optional<std::string> output;
};

enum class LowRankMode { Auto, On, Off };

struct RunConfig {
    fs::path dataset;
    fs::path output;
    Hyperparameters hyper;
    SweepConfig sweep;
    /// Burn-in doubles on non-convergence until it would exceed this.
    std::size_t max_burn_in = 340000;
    double rhat_threshold = 1.2;
    double level = 0.95;
    double pp_threshold = 0.5;
    LowRankMode low_rank = LowRankMode::Auto;
    bool write_checkpoints = true;

    static RunConfig from(const KeyValues& kv, const CliOverrides& cli = {});
    void validate() const;
    /// Every setting, defaults included, as key=value lines.
    KeyValues manifest() const;
};

SimConfig sim_config_from(const KeyValues& kv, const CliOverrides& cli = {});
KeyValues sim_manifest(const SimConfig& config);

struct FitOutcome {
    PosteriorDraws draws;
    ConvergenceReport convergence;
    SummaryReport summary;
    std::size_t burn_in_used = 0;
    std::size_t attempts = 0;
};

/// Runs config.sweep.chains chains concurrently, extending burn-in until
/// the R-hat threshold is met or the cap is reached. When `checkpoint_dir`
/// is set, each chain's post-burn-in state is saved there.
FitOutcome fit_model(const NetworkDataset& data, const RunConfig& config, std::ostream& log,
                     const std::optional<fs::path>& checkpoint_dir = std::nullopt);

struct MetricsRow {
    std::string label;
    ClassificationRates rates;
    MseMetrics mse;
};

std::string metrics_csv(const MetricsRow& row);
MetricsRow parse_metrics_csv(const std::string& text);

int cmd_simulate(const fs::path& config, const CliOverrides& cli, std::ostream& log);
int cmd_fit(const fs::path& config, const CliOverrides& cli, std::ostream& log);
int cmd_evaluate(const fs::path& config, const CliOverrides& cli, std::ostream& log);
int cmd_diagnose(const fs::path& config, const CliOverrides& cli, std::ostream& log);

/// Runs `fn`, mapping exceptions to exit codes with a message on `log`.
int run_guarded(const std::function<int()>& fn, std::ostream& log);

}  // namespace bnr

#endif
