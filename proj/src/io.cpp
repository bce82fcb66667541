#include "bnr/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace bnr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    return out;
}

std::string join_doubles(const double* x, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += format_double(x[i]);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, what));
    return out;
}

std::vector<std::string> read_csv_rows(const fs::path& path, const std::string& header) {
    auto lines = lines_of(read_file(path));
    if (lines.empty() || trim(lines.front()) != header) {
        throw IoError(path.string() + ": expected header '" + header + "'");
    }
    lines.erase(lines.begin());
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("draws file truncated");
    return v;
}

void put_block(std::ostream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_block(std::istream& in, double* p, std::size_t n) {
    if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)))) {
        throw IoError("draws file truncated");
    }
}

constexpr char kDrawsMagic[8] = {'B', 'N', 'R', 'D', 'R', 'A', 'W', '\0'};
constexpr std::uint32_t kDrawsVersion = 1;

std::string upper_triangle_csv(const Matrix& B) {
    std::string out = "node_k,node_l,value\n";
    for (Eigen::Index k = 0; k < B.rows(); ++k) {
        for (Eigen::Index l = k + 1; l < B.cols(); ++l) {
            out += std::to_string(k + 1) + ',' + std::to_string(l + 1) + ',' + format_double(B(k, l)) + '\n';
        }
    }
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(what + ": not a number: '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(what + ": not an integer: '" + text + "'");
    }
    return v;
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- KeyValues ---------------------------------------------------------

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
    KeyValues kv;
    std::size_t lineno = 0;
    for (const std::string& raw : lines_of(text)) {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        if (kv.has(key)) throw ConfigError(key + ": given more than once in " + source);
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::load(const fs::path& path) {
    return parse(read_file(path), path.string());
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_double(*v, key) : fallback;
}

long long KeyValues::get_integer(const std::string& key, long long fallback) const {
    const auto v = get(key);
    return v ? parse_integer(*v, key) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + *v + "'");
}

void KeyValues::require_known(const std::vector<std::string>& allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : values_) {
        if (!ok.count(k)) throw ConfigError(k + ": unknown configuration key");
    }
}

std::string KeyValues::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + '=' + v + '\n';
    return out;
}

// ---- datasets ----------------------------------------------------------

void write_dataset(const fs::path& dir, const NetworkDataset& data) {
    fs::create_directories(dir);
    const std::size_t n = data.n(), V = data.V();
    std::string header = "format_version=" + std::to_string(kDatasetFormatVersion) + "\n";
    header += "n=" + std::to_string(n) + "\nV=" + std::to_string(V) + "\nq=" + std::to_string(data.q()) + "\n";

    std::string responses = "sample_id,y\n";
    for (std::size_t i = 0; i < n; ++i) {
        responses += std::to_string(i + 1) + ',' + format_double(data.y()(static_cast<Eigen::Index>(i))) + '\n';
    }
    std::string edges = "sample_id,node_k,node_l,weight\n";
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t e = 0;
        for (std::size_t k = 0; k < V; ++k) {
            for (std::size_t l = k + 1; l < V; ++l, ++e) {
                const double w = data.X()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e));
                if (w == 0.0) continue;
                edges += std::to_string(i + 1) + ',' + std::to_string(k + 1) + ',' + std::to_string(l + 1) + ',' +
                         format_double(w) + '\n';
            }
        }
    }
    atomic_write(dir / "responses.csv", responses);
    atomic_write(dir / "edges.csv", edges);
    atomic_write(dir / "dataset.txt", header);
}

NetworkDataset read_dataset(const fs::path& dir) {
    const KeyValues header = KeyValues::load(dir / "dataset.txt");
    if (header.get_integer("format_version", -1) != kDatasetFormatVersion) {
        throw IoError((dir / "dataset.txt").string() + ": unsupported format_version");
    }
    const long long n_raw = header.get_integer("n", -1);
    const long long V_raw = header.get_integer("V", -1);
    if (n_raw < 1 || V_raw < 2) throw IoError((dir / "dataset.txt").string() + ": need n >= 1 and V >= 2");
    const auto n = static_cast<std::size_t>(n_raw);
    const auto V = static_cast<std::size_t>(V_raw);
    if (header.get_integer("q", -1) != static_cast<long long>(edge_count(V))) {
        throw IoError((dir / "dataset.txt").string() + ": q does not equal V(V-1)/2");
    }

    Vector y(static_cast<Eigen::Index>(n));
    std::vector<bool> seen(n, false);
    const fs::path rpath = dir / "responses.csv";
    for (const std::string& line : read_csv_rows(rpath, "sample_id,y")) {
        const auto f = split(line, ',');
        if (f.size() != 2) throw IoError(rpath.string() + ": expected 2 fields in '" + line + "'");
        const long long id = parse_integer(f[0], "sample_id");
        if (id < 1 || id > n_raw) throw IoError(rpath.string() + ": sample_id out of range: " + f[0]);
        const auto i = static_cast<std::size_t>(id - 1);
        if (seen[i]) throw IoError(rpath.string() + ": duplicate sample_id " + f[0]);
        seen[i] = true;
        y(static_cast<Eigen::Index>(i)) = parse_double(f[1], "y");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw IoError(rpath.string() + ": missing sample_id " + std::to_string(i + 1));
    }

    Matrix X = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(edge_count(V)));
    std::set<std::pair<std::size_t, std::size_t>> listed;
    const fs::path epath = dir / "edges.csv";
    for (const std::string& line : read_csv_rows(epath, "sample_id,node_k,node_l,weight")) {
        const auto f = split(line, ',');
        if (f.size() != 4) throw IoError(epath.string() + ": expected 4 fields in '" + line + "'");
        const long long id = parse_integer(f[0], "sample_id");
        const long long k = parse_integer(f[1], "node_k");
        const long long l = parse_integer(f[2], "node_l");
        if (id < 1 || id > n_raw) throw IoError(epath.string() + ": sample_id out of range: " + f[0]);
        if (k < 1 || l > V_raw || k >= l) {
            throw IoError(epath.string() + ": need 1 <= node_k < node_l <= V in '" + line + "'");
        }
        const double w = parse_double(f[3], "weight");
        if (!std::isfinite(w)) throw IoError(epath.string() + ": non-finite weight in '" + line + "'");
        const std::size_t e = pair_index(static_cast<std::size_t>(k - 1), static_cast<std::size_t>(l - 1), V);
        if (!listed.insert({static_cast<std::size_t>(id - 1), e}).second) {
            throw IoError(epath.string() + ": duplicate edge in '" + line + "'");
        }
        X(static_cast<Eigen::Index>(id - 1), static_cast<Eigen::Index>(e)) = w;
    }
    return NetworkDataset::from_design(std::move(y), std::move(X));
}

// ---- truth -------------------------------------------------------------

void write_truth(const fs::path& path, const SimConfig& config, const SimTruth& truth) {
    KeyValues kv;
    kv.set("format_version", "1");
    kv.set("model", to_string(config.model));
    kv.set("coefficients", to_string(config.coefficients));
    kv.set("n", std::to_string(config.n));
    kv.set("d", std::to_string(config.d));
    kv.set("k", std::to_string(config.k));
    kv.set("pi", format_double(config.pi));
    kv.set("mu", format_double(config.mu));
    kv.set("L", config.L ? format_double(*config.L) : "none");
    kv.set("pairs_once", config.pairs_once ? "true" : "false");
    kv.set("branch_min", format_double(config.branch_min));
    kv.set("branch_max", format_double(config.branch_max));
    kv.set("seed", std::to_string(config.seed));
    kv.set("capped", std::to_string(truth.capped));
    std::string xi;
    for (std::size_t i = 0; i < truth.xi.size(); ++i) xi += (i ? " " : "") + std::to_string(truth.xi[i]);
    kv.set("xi", xi);
    const Vector upper = upper_triangle_vectorize(truth.B);
    kv.set("B_upper", join_doubles(upper.data(), static_cast<std::size_t>(upper.size())));
    kv.set("b_main", join_doubles(truth.b_main.data(), static_cast<std::size_t>(truth.b_main.size())));
    const Matrix bp_rows = truth.b_pair.transpose();  // row-major order
    kv.set("b_pair", join_doubles(bp_rows.data(), static_cast<std::size_t>(bp_rows.size())));
    kv.set("noise", join_doubles(truth.noise.data(), static_cast<std::size_t>(truth.noise.size())));
    std::string parents;
    for (std::size_t i = 0; i < truth.tree.parent.size(); ++i) {
        parents += (i ? " " : "") + std::to_string(truth.tree.parent[i]);
    }
    kv.set("tree_parent", parents);
    kv.set("tree_branch", join_doubles(truth.tree.branch.data(), truth.tree.branch.size()));
    atomic_write(path, kv.to_string());
}

TruthRecord read_truth(const fs::path& path) {
    const KeyValues kv = KeyValues::load(path);
    TruthRecord t;
    const long long n = kv.get_integer("n", -1), d = kv.get_integer("d", -1);
    if (n < 1 || d < 2) throw IoError(path.string() + ": missing or invalid n / d");
    t.n = static_cast<std::size_t>(n);
    t.V = static_cast<std::size_t>(d);
    const auto xi = parse_doubles(kv.get_string("xi", ""), "xi");
    if (xi.size() != t.V) throw IoError(path.string() + ": xi has the wrong length");
    for (double x : xi) t.nodes.push_back(x != 0.0);
    const auto upper = parse_doubles(kv.get_string("B_upper", ""), "B_upper");
    if (upper.size() != edge_count(t.V)) throw IoError(path.string() + ": B_upper has the wrong length");
    const Vector u = Eigen::Map<const Vector>(upper.data(), static_cast<Eigen::Index>(upper.size()));
    t.B = gamma_to_B(2.0 * u);
    for (double b : upper) t.edges.push_back(b != 0.0);
    return t;
}

// ---- draws -------------------------------------------------------------

void write_draws(const fs::path& path, const PosteriorDraws& draws) {
    draws.check_shape();
    std::ostringstream out(std::ios::binary);
    out.write(kDrawsMagic, sizeof kDrawsMagic);
    put<std::uint32_t>(out, kDrawsVersion);
    put<std::uint64_t>(out, draws.chains);
    put<std::uint64_t>(out, draws.retained);
    put<std::uint64_t>(out, draws.V);
    for (std::size_t c = 0; c < draws.chains; ++c) {
        put_block(out, draws.gamma[c].data(), static_cast<std::size_t>(draws.gamma[c].size()));
        put_block(out, draws.xi[c].data(), static_cast<std::size_t>(draws.xi[c].size()));
        put_block(out, draws.mu[c].data(), draws.retained);
        put_block(out, draws.tau2[c].data(), draws.retained);
        put_block(out, draws.log_joint[c].data(), draws.retained);
    }
    atomic_write(path, out.str());
}

PosteriorDraws read_draws(const fs::path& path) {
    std::istringstream in(read_file(path), std::ios::binary);
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kDrawsMagic, sizeof magic) != 0) {
        throw IoError(path.string() + ": not a draws file");
    }
    if (get<std::uint32_t>(in) != kDrawsVersion) throw IoError(path.string() + ": unsupported draws version");
    const auto chains = get<std::uint64_t>(in);
    const auto retained = get<std::uint64_t>(in);
    const auto V = get<std::uint64_t>(in);
    if (chains == 0 || V < 2 || chains > 4096 || V > 1u << 16) throw IoError(path.string() + ": bad header");
    PosteriorDraws d = PosteriorDraws::allocate(chains, retained, V);
    for (std::size_t c = 0; c < chains; ++c) {
        get_block(in, d.gamma[c].data(), static_cast<std::size_t>(d.gamma[c].size()));
        get_block(in, d.xi[c].data(), static_cast<std::size_t>(d.xi[c].size()));
        get_block(in, d.mu[c].data(), retained);
        get_block(in, d.tau2[c].data(), retained);
        get_block(in, d.log_joint[c].data(), retained);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes");
    return d;
}

// ---- reports -----------------------------------------------------------

void write_convergence(const fs::path& dir, const ConvergenceReport& report) {
    std::string text;
    text += "converged=" + std::string(report.converged ? "true" : "false") + "\n";
    text += "max_rhat=" + format_double(report.max_rhat) + "\n";
    text += "threshold=" + format_double(report.threshold) + "\n";
    text += "single_chain=" + std::string(report.single_chain ? "true" : "false") + "\n";
    text += "coordinates=" + std::to_string(report.rhat_gamma.size() + report.rhat_xi.size()) + "\n";

    std::string csv = "parameter,index,node_k,node_l,rhat\n";
    const auto V = static_cast<std::size_t>(report.rhat_xi.size());
    for (Eigen::Index e = 0; e < report.rhat_gamma.size(); ++e) {
        const auto [k, l] = pair_from_index(static_cast<std::size_t>(e), V);
        csv += "gamma," + std::to_string(e + 1) + ',' + std::to_string(k + 1) + ',' + std::to_string(l + 1) + ',' +
               format_double(report.rhat_gamma(e)) + '\n';
    }
    for (Eigen::Index k = 0; k < report.rhat_xi.size(); ++k) {
        csv += "xi," + std::to_string(k + 1) + ',' + std::to_string(k + 1) + ",," + format_double(report.rhat_xi(k)) +
               '\n';
    }
    atomic_write(dir / "rhat.csv", csv);
    atomic_write(dir / "convergence.txt", text);
}

void write_summary(const fs::path& dir, const SummaryReport& s) {
    std::string pp = "node,pp,influential\n";
    for (Eigen::Index k = 0; k < s.nodePP.size(); ++k) {
        pp += std::to_string(k + 1) + ',' + format_double(s.nodePP(k)) + ',' +
              (s.nodePP(k) > s.ppThreshold ? "1" : "0") + '\n';
    }
    const auto V = static_cast<std::size_t>(s.nodePP.size());
    std::string ci = "node_k,node_l,mean,lower,upper,influential\n";
    for (Eigen::Index e = 0; e < s.meanGamma.size(); ++e) {
        const auto [k, l] = pair_from_index(static_cast<std::size_t>(e), V);
        ci += std::to_string(k + 1) + ',' + std::to_string(l + 1) + ',' + format_double(s.meanGamma(e)) + ',' +
              format_double(s.edges.lower(e)) + ',' + format_double(s.edges.upper(e)) + ',' +
              (s.edges.influential[static_cast<std::size_t>(e)] ? "1" : "0") + '\n';
    }
    atomic_write(dir / "node_pp.csv", pp);
    atomic_write(dir / "edge_ci.csv", ci);
    atomic_write(dir / "map_B.csv", upper_triangle_csv(s.mapB));
    atomic_write(dir / "mean_B.csv", upper_triangle_csv(s.meanB));
}

}  // namespace bnr
