#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "bnr/commands.hpp"

using namespace bnr;

namespace {

/// Fresh scratch directory per test case, removed afterwards.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name)
        : dir(fs::temp_directory_path() / ("bnr_cli_" + std::to_string(::getpid()) + "_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path operator/(const std::string& s) const { return dir / s; }
};

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BNR_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

NetworkDataset sparse_dataset(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> U;
    std::normal_distribution<double> N;
    std::vector<Matrix> A;
    Vector y(9);
    for (int i = 0; i < 9; ++i) {
        Matrix a = Matrix::Zero(5, 5);
        for (int k = 0; k < 5; ++k)
            for (int l = k + 1; l < 5; ++l)
                if (U(gen) < 0.4) a(k, l) = a(l, k) = N(gen);
        A.push_back(a);
        y(i) = N(gen);
    }
    return NetworkDataset(y, A);
}

const char* kSimConfig =
    "# small theoretical run\n"
    "model = theoretical\n"
    "n = 60\n"
    "d = 6\n"
    "k = 4\n"
    "seed = 3\n";

}  // namespace

TEST_CASE("doubles round trip through text") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> N;
    for (int i = 0; i < 1000; ++i) {
        const double x = N(gen) * std::pow(10.0, static_cast<int>(i % 40) - 20);
        CHECK(parse_double(format_double(x), "x") == x);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double("1.5x", "tau"), ConfigError);
    CHECK_THROWS_AS(parse_integer("12.5", "n"), ConfigError);
    try {
        parse_double("abc", "zeta");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("zeta") != std::string::npos);
    }
}

TEST_CASE("key value configuration") {
    const KeyValues kv = KeyValues::parse("# comment\n a = 1 \nb=two words\n\nflag = true # trailing\n");
    CHECK(kv.get_integer("a", 0) == 1);
    CHECK(kv.get_string("b", "") == "two words");
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(KeyValues::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(KeyValues::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(kv.require_known({"a", "b"}), ConfigError);
    CHECK_NOTHROW(kv.require_known({"a", "b", "flag"}));
    CHECK(KeyValues::parse(kv.to_string()).entries() == kv.entries());
    CHECK_THROWS_AS(KeyValues::load("/nonexistent/bnr.conf"), IoError);
}

TEST_CASE("datasets round trip through a directory") {
    Scratch s("dataset");
    std::mt19937_64 gen(2);
    const NetworkDataset d = sparse_dataset(gen);
    write_dataset(s / "data", d);
    const NetworkDataset back = read_dataset(s / "data");
    CHECK(back.n() == d.n());
    CHECK(back.V() == d.V());
    CHECK(back.X() == d.X());
    CHECK(back.y() == d.y());

    CHECK_THROWS_AS(read_dataset(s / "missing"), IoError);

    const fs::path edges = s / "data" / "edges.csv";
    const std::string original = read_file(edges);
    write_text(edges, original + "1,3,2,0.5\n");
    CHECK_THROWS_AS(read_dataset(s / "data"), IoError);
    write_text(edges, original + "1,2,9,0.5\n");
    CHECK_THROWS_AS(read_dataset(s / "data"), IoError);
    write_text(edges, "sample_id,node_k,node_l,weight\n1,1,2,0.5\n1,1,2,0.7\n");
    CHECK_THROWS_AS(read_dataset(s / "data"), IoError);
}

TEST_CASE("truth files round trip") {
    Scratch s("truth");
    SimConfig cfg;
    cfg.n = 20;
    cfg.d = 7;
    cfg.k = 3;
    cfg.model = SimModel::Interaction;
    const SimResult sim = simulate(cfg);
    write_truth(s / "truth.txt", cfg, sim.truth);
    const TruthRecord t = read_truth(s / "truth.txt");
    CHECK(t.n == 20);
    CHECK(t.V == 7);
    CHECK(t.nodes == sim.truth.truth_nodes());
    CHECK(t.edges == sim.truth.truth_edges());
    CHECK(t.B == sim.truth.B);
}

TEST_CASE("draws round trip bit for bit") {
    Scratch s("draws");
    std::mt19937_64 gen(3);
    std::normal_distribution<double> N;
    PosteriorDraws d = PosteriorDraws::allocate(2, 15, 4);
    for (std::size_t c = 0; c < 2; ++c) {
        for (Eigen::Index i = 0; i < d.gamma[c].size(); ++i) d.gamma[c].data()[i] = N(gen);
        for (Eigen::Index i = 0; i < d.xi[c].size(); ++i) d.xi[c].data()[i] = N(gen) > 0;
        for (Eigen::Index t = 0; t < 15; ++t) {
            d.mu[c](t) = N(gen);
            d.tau2[c](t) = std::exp(N(gen));
            d.log_joint[c](t) = N(gen);
        }
    }
    write_draws(s / "draws.bin", d);
    const PosteriorDraws b = read_draws(s / "draws.bin");
    CHECK(b.chains == 2);
    CHECK(b.retained == 15);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(b.gamma[c] == d.gamma[c]);
        CHECK(b.xi[c] == d.xi[c]);
        CHECK(b.mu[c] == d.mu[c]);
        CHECK(b.tau2[c] == d.tau2[c]);
        CHECK(b.log_joint[c] == d.log_joint[c]);
    }
    write_text(s / "bad.bin", "not a draws file");
    CHECK_THROWS_AS(read_draws(s / "bad.bin"), IoError);
}

TEST_CASE("metrics rows round trip with missing rates") {
    MetricsRow row;
    row.label = "seed1";
    row.rates.edge_fpr = 0.125;
    row.rates.node_fnr = 0.0;
    row.mse.coefficient = 0.3;
    row.mse.response = 1.25;
    const std::string csv = metrics_csv(row);
    CHECK(csv.rfind("label,edge_fpr,edge_fnr,node_fpr,node_fnr,mse_coefficient,mse_response\n", 0) == 0);
    CHECK(csv.find("NA") != std::string::npos);
    const MetricsRow back = parse_metrics_csv(csv);
    CHECK(back.label == "seed1");
    CHECK(*back.rates.edge_fpr == 0.125);
    CHECK_FALSE(back.rates.edge_fnr.has_value());
    CHECK_FALSE(back.rates.node_fpr.has_value());
    CHECK(*back.rates.node_fnr == 0.0);
    CHECK(back.mse.response == 1.25);
    row.label = "a,b";
    CHECK_THROWS_AS(metrics_csv(row), ConfigError);
}

TEST_CASE("run configuration") {
    const RunConfig d = RunConfig::from(KeyValues::parse("dataset = x\noutput = y\n"));
    CHECK(d.hyper.R == 7);
    CHECK(d.sweep.chains == 3);
    CHECK(d.sweep.burn_in == 30000);
    CHECK(d.sweep.retained == 20000);
    CHECK(d.sweep.thinning == 1);
    CHECK(d.rhat_threshold == 1.2);

    CliOverrides cli;
    cli.chains = 5;
    cli.seed = 42;
    cli.burn_in = 10;
    const RunConfig o = RunConfig::from(KeyValues::parse("chains = 2\nseed = 1\nR = 3\n"), cli);
    CHECK(o.sweep.chains == 5);
    CHECK(o.sweep.seed == 42);
    CHECK(o.sweep.burn_in == 10);
    CHECK(o.hyper.R == 3);
    CHECK(o.hyper.nu == 5.0);
    CHECK(RunConfig::from(o.manifest()).manifest().to_string() == o.manifest().to_string());

    CHECK_THROWS_AS(RunConfig::from(KeyValues::parse("chains = 0\n")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from(KeyValues::parse("eta = 0.5\n")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from(KeyValues::parse("rhat_threshold = 0.9\n")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from(KeyValues::parse("colour = red\n")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from(KeyValues::parse("low_rank = maybe\n")), ConfigError);
    CHECK_THROWS_AS(sim_config_from(KeyValues::parse("n = 0\n")), ConfigError);
    CHECK_THROWS_AS(sim_config_from(KeyValues::parse("model = additive\nL = 4\n")), ConfigError);
}

TEST_CASE("exit codes") {
    std::ostringstream log;
    CHECK(run_guarded([] { return 0; }, log) == kExitOk);
    CHECK(run_guarded([]() -> int { throw NumericalError("x"); }, log) == kExitNumerical);
    CHECK(run_guarded([]() -> int { throw ConfigError("x"); }, log) == kExitIoOrConfig);
    CHECK(run_guarded([]() -> int { throw IoError("x"); }, log) == kExitIoOrConfig);

    Scratch s("exit");
    CHECK(run_cli("fit --config " + (s / "missing.conf").string()) == kExitIoOrConfig);
    write_text(s / "bad.conf", "colour = red\n");
    CHECK(run_cli("fit --config " + (s / "bad.conf").string()) == kExitIoOrConfig);
    CHECK(run_cli("fit") == kExitIoOrConfig);
    write_text(s / "sim.conf", kSimConfig);
    CHECK(run_cli("fit --config " + (s / "sim.conf").string() + " --chains 0") == kExitIoOrConfig);

    // a hopeless threshold with a short run cannot converge
    write_text(s / "sim.conf", std::string(kSimConfig) + "output = " + (s / "data").string() + "\n");
    REQUIRE(run_cli("simulate --config " + (s / "sim.conf").string()) == kExitOk);
    write_text(s / "fit.conf", "dataset = " + (s / "data").string() + "\nR = 2\nburn_in = 20\nretained = 20\nmax_burn_in = 20\n");
    CHECK(run_cli("fit --config " + (s / "fit.conf").string() + " --output " + (s / "run").string() +
                  " --rhat-threshold 1.0000001") == kExitNotConverged);
    CHECK(fs::exists(s / "run" / "node_pp.csv"));
    write_text(s / "diag.conf", "run = " + (s / "run").string() + "\nrhat_threshold = 1000\n");
    CHECK(run_cli("diagnose --config " + (s / "diag.conf").string()) == kExitOk);
    CHECK(read_file(s / "run" / "convergence.txt").find("converged=true") != std::string::npos);
}

TEST_CASE("simulate and fit are deterministic end to end") {
    Scratch s("determinism");
    write_text(s / "sim.conf", kSimConfig);
    for (const char* out : {"a", "b"}) {
        REQUIRE(run_cli("simulate --config " + (s / "sim.conf").string() + " --output " + (s / out).string()) ==
                kExitOk);
    }
    for (const char* f : {"responses.csv", "edges.csv", "truth.txt", "dataset.txt"}) {
        CHECK(read_file(s / "a" / f) == read_file(s / "b" / f));
    }
    REQUIRE(run_cli("simulate --config " + (s / "sim.conf").string() + " --seed 4 --output " + (s / "c").string()) ==
            kExitOk);
    CHECK(read_file(s / "a" / "responses.csv") != read_file(s / "c" / "responses.csv"));

    write_text(s / "fit.conf", "dataset = " + (s / "a").string() + "\nR = 2\nchains = 2\nburn_in = 200\nretained = 200\nmax_burn_in = 200\n");
    for (const char* out : {"fit1", "fit2"}) {
        const int code = run_cli("fit --config " + (s / "fit.conf").string() + " --output " + (s / out).string());
        CHECK((code == kExitOk || code == kExitNotConverged));
    }
    for (const char* f : {"node_pp.csv", "edge_ci.csv", "map_B.csv", "mean_B.csv", "rhat.csv", "convergence.txt"}) {
        CHECK(read_file(s / "fit1" / f) == read_file(s / "fit2" / f));
    }
    CHECK(read_file(s / "fit1" / "draws.bin") == read_file(s / "fit2" / "draws.bin"));

    write_text(s / "eval.conf", "run = " + (s / "fit1").string() + "\ntruth = " + (s / "a" / "truth.txt").string() +
                                    "\nlabel = smoke\n");
    REQUIRE(run_cli("evaluate --config " + (s / "eval.conf").string()) == kExitOk);
    const MetricsRow m = parse_metrics_csv(read_file(s / "fit1" / "metrics.csv"));
    CHECK(m.label == "smoke");
    CHECK(m.mse.response >= 0.0);

    // truth from a dataset of another shape is refused
    SimConfig other;
    other.n = 60;
    other.d = 7;
    other.k = 4;
    write_truth(s / "other.txt", other, simulate(other).truth);
    write_text(s / "eval2.conf", "run = " + (s / "fit1").string() + "\ntruth = " + (s / "other.txt").string() + "\n");
    CHECK(run_cli("evaluate --config " + (s / "eval2.conf").string()) == kExitIoOrConfig);
}

TEST_CASE("evaluation of a perfect fit reports zero error rates") {
    Scratch s("perfect");
    SimConfig cfg;
    cfg.n = 30;
    cfg.d = 6;
    cfg.k = 4;
    cfg.pi = 0.5;
    cfg.seed = 8;
    const SimResult sim = simulate(cfg);
    write_dataset(s / "data", sim.data);
    write_truth(s / "truth.txt", cfg, sim.truth);

    // draws pinned at the truth; null edges straddle zero
    PosteriorDraws d = PosteriorDraws::allocate(2, 10, 6);
    const Vector gamma = B_to_gamma(sim.truth.B);
    for (std::size_t c = 0; c < 2; ++c) {
        for (Eigen::Index t = 0; t < 10; ++t) {
            for (Eigen::Index e = 0; e < gamma.size(); ++e) d.gamma[c](t, e) = gamma(e) != 0.0 ? gamma(e) : (t % 2 ? 0.1 : -0.1);
            for (Eigen::Index k = 0; k < 6; ++k) d.xi[c](t, k) = sim.truth.xi[static_cast<std::size_t>(k)];
        }
    }
    fs::create_directories(s / "run");
    write_draws(s / "run" / "draws.bin", d);
    write_text(s / "run" / "manifest.txt", "dataset=" + (s / "data").string() + "\nlevel=0.95\npp_threshold=0.5\n");
    write_text(s / "eval.conf", "run = " + (s / "run").string() + "\ntruth = " + (s / "truth.txt").string() + "\n");
    std::ostringstream log;
    REQUIRE(cmd_evaluate(s / "eval.conf", {}, log) == kExitOk);
    const MetricsRow m = parse_metrics_csv(read_file(s / "run" / "metrics.csv"));
    for (const auto& r : {m.rates.edge_fpr, m.rates.edge_fnr, m.rates.node_fpr, m.rates.node_fnr}) {
        if (r) CHECK(*r == 0.0);
    }
    CHECK(m.mse.coefficient == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("a single chain fits with a warning") {
    std::mt19937_64 gen(9);
    const NetworkDataset d = sparse_dataset(gen);
    RunConfig cfg = RunConfig::from(KeyValues::parse("R = 2\nchains = 1\nburn_in = 50\nretained = 50\nmax_burn_in = 50\n"));
    std::ostringstream log;
    const FitOutcome out = fit_model(d, cfg, log);
    CHECK(log.str().find("warning") != std::string::npos);
    CHECK(out.convergence.single_chain);
    CHECK(out.convergence.rhat_gamma.size() == 10);
    CHECK(out.draws.chains == 1);
}
