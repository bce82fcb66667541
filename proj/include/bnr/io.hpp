#ifndef BNR_IO_HPP
#define BNR_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnr/core_types.hpp"
#include "bnr/diagnostics.hpp"
#include "bnr/simgen.hpp"
#include "bnr/summaries.hpp"

namespace bnr {

namespace fs = std::filesystem;

/// Shortest text that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& text, const std::string& what);
long long parse_integer(const std::string& text, const std::string& what);

/// Writes `content` to a temporary sibling, then renames it over `path`.
void atomic_write(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

// ---- key = value configuration ----------------------------------------

/// Flat config: one `key = value` per line, `#` starts a comment.
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& source = "config");
    static KeyValues load(const fs::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_integer(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws ConfigError naming the first key outside `allowed`.
    void require_known(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    /// Sorted `key=value` lines.
    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

// ---- datasets ----------------------------------------------------------

inline constexpr int kDatasetFormatVersion = 1;

// A dataset directory holds
//   dataset.txt    format_version, n, V, q as key=value lines
//   responses.csv  sample_id,y
//   edges.csv      sample_id,node_k,node_l,weight
// Ids are 1-based, node_k < node_l, and unlisted edges are zero.
void write_dataset(const fs::path& dir, const NetworkDataset& data);
NetworkDataset read_dataset(const fs::path& dir);

// ---- simulation truth --------------------------------------------------

/// What evaluation needs to score a fit against a simulated dataset.
struct TruthRecord {
    std::size_t n = 0;
    std::size_t V = 0;
    std::vector<bool> nodes;
    std::vector<bool> edges;
    Matrix B;
};

void write_truth(const fs::path& path, const SimConfig& config, const SimTruth& truth);
TruthRecord read_truth(const fs::path& path);

// ---- posterior draws ---------------------------------------------------

void write_draws(const fs::path& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(const fs::path& path);

// ---- reports -----------------------------------------------------------

/// convergence.txt (overall verdict) and rhat.csv (one row per coordinate).
void write_convergence(const fs::path& dir, const ConvergenceReport& report);
/// node_pp.csv, edge_ci.csv, map_B.csv and mean_B.csv.
void write_summary(const fs::path& dir, const SummaryReport& summary);

}  // namespace bnr

#endif
