#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mma/experiment.hpp"
#include "mma/metrics.hpp"

using namespace mma;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

ExperimentConfig small_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.channel_id = "channel-1";
    cfg.eq_len = 7;
    cfg.init_index = 3;
    cfg.algorithms = {"mma"};
    cfg.num_symbols = 1000;
    cfg.num_runs["mma"] = 3;
    cfg.record_every = 100;
    cfg.base_seed = 9;
    cfg.output_path = out;
    return cfg;
}

}  // namespace

TEST_CASE("parse_cli flag mapping") {
    const auto cfg = parse_cli({"--channel", "channel-2", "--algo", "mma,sd-mma",
                                "--qam", "64", "--equalizer-length", "11",
                                "--init-index", "5", "--mu", "sd-mma=0.002",
                                "--lambda", "fixed:0.01", "--snr-db", "25",
                                "--symbols", "5000", "--runs", "7", "--seed", "99",
                                "--record-every", "10", "--out", "x.csv",
                                "--workers", "2"});
    CHECK(cfg.channel_id == "channel-2");
    CHECK(cfg.algorithms == std::vector<std::string>{"mma", "sd-mma"});
    CHECK(cfg.qam_order == 64);
    CHECK(cfg.eq_len == 11);
    CHECK(cfg.init_index == 5);
    CHECK(cfg.mu_for("mma") == 1e-4);
    CHECK(cfg.mu_for("sd-mma") == 0.002);
    CHECK(cfg.lambda_policy.mode == ForgettingPolicy::Mode::fixed);
    CHECK(cfg.lambda_policy.lambda == 0.01);
    CHECK(cfg.snr_db == 25.0);
    CHECK(cfg.noise_on);
    CHECK(cfg.num_symbols == 5000);
    CHECK(cfg.runs_for("mma") == 7);
    CHECK(cfg.runs_for("sd-mma") == 7);
    CHECK(cfg.base_seed == 99);
    CHECK(cfg.record_every == 10);
    CHECK(cfg.output_path == "x.csv");
    CHECK(cfg.workers == 2);
}

TEST_CASE("parse_cli defaults match the reference setup") {
    const auto cfg = parse_cli({});
    CHECK(cfg.channel_id == "channel-1");
    CHECK(cfg.qam_order == 16);
    CHECK(cfg.eq_len == 15);
    CHECK(cfg.init_index == 7);
    CHECK(cfg.mu_for("mma") == 1e-4);
    CHECK(cfg.mu_for("sd-mma") == 1e-4);
    CHECK(cfg.lambda_policy.mode == ForgettingPolicy::Mode::harmonic);
    CHECK(cfg.noise_on);
    CHECK(cfg.snr_db == 30.0);
    CHECK(cfg.num_symbols == 20000);
    CHECK(cfg.runs_for("mma") == 400);
    CHECK(cfg.runs_for("sd-mma") == 50);
    CHECK(cfg.algorithms == std::vector<std::string>{"mma", "sd-mma"});
}

TEST_CASE("parse_cli errors") {
    CHECK_THROWS_AS(parse_cli({"--equalizer-length", "0"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--no-such-flag"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--algo", "mma,bogus"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--mu", "bogus=0.1"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--mu", "abc"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--lambda", "fixed:2"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--init-index", "20"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--qam", "6"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--snr-db", "loud"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--channel", "channel-3"}), usage_error);
    CHECK_THROWS_AS(parse_cli({"--runs", "0"}), usage_error);
}

TEST_CASE("parse_cli snr off") {
    const auto cfg = parse_cli({"--snr-db", "off"});
    CHECK_FALSE(cfg.noise_on);
}

TEST_CASE("run_single: perfect initialization stays at the floor") {
    ExperimentConfig cfg = small_config(tmp_path("unused.csv"));
    cfg.channel_id = "identity";
    // 4-QAM: |y_R| = sqrt(R_m) at the solution, so the per-sample error is
    // identically zero and the taps never move off the perfect spike.
    cfg.qam_order = 4;
    cfg.eq_len = 5;
    cfg.init_index = 2;
    cfg.noise_on = false;
    cfg.num_symbols = 500;
    cfg.record_every = 50;
    const RunResult r = run_single(cfg, "mma", 0);
    REQUIRE_FALSE(r.diverged);
    REQUIRE(r.trajectory.ratios.size() == 10);
    for (double ratio : r.trajectory.ratios) CHECK(ratio < 1e-20);
}

TEST_CASE("run_single determinism") {
    const ExperimentConfig cfg = small_config(tmp_path("unused.csv"));
    for (const std::string algo : {"mma", "sd-mma"}) {
        const RunResult a = run_single(cfg, algo, 1);
        const RunResult b = run_single(cfg, algo, 1);
        CHECK(a.trajectory.indices == b.trajectory.indices);
        CHECK(a.trajectory.ratios == b.trajectory.ratios);
        CHECK((a.final_taps - b.final_taps).norm() == 0.0);
    }
}

TEST_CASE("run_experiment ensemble equals single run for one run") {
    ExperimentConfig cfg = small_config(tmp_path("single_run.csv"));
    cfg.num_runs["mma"] = 1;
    const ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.time_table);
    const RunResult r = run_single(cfg, "mma", 0);
    REQUIRE(out.time_table->indices == r.trajectory.indices);
    for (std::size_t i = 0; i < r.trajectory.ratios.size(); ++i) {
        CHECK(out.time_table->db[0][i] ==
              doctest::Approx(isi_ensemble_db({r.trajectory.ratios[i]})).epsilon(1e-12));
    }
}

TEST_CASE("run_experiment ensemble matches independent aggregation") {
    ExperimentConfig cfg = small_config(tmp_path("ensemble.csv"));
    const ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.time_table);
    for (std::size_t row = 0; row < out.time_table->indices.size(); ++row) {
        std::vector<double> ratios;
        for (int k = 0; k < 3; ++k) {
            ratios.push_back(run_single(cfg, "mma", k).trajectory.ratios[row]);
        }
        CHECK(out.time_table->db[0][row] ==
              doctest::Approx(isi_ensemble_db(ratios)).epsilon(1e-12));
    }
}

TEST_CASE("seed isolation") {
    ExperimentConfig cfg = small_config(tmp_path("unused.csv"));
    const RunResult base = run_single(cfg, "mma", 0);

    ExperimentConfig other = cfg;
    other.base_seed = cfg.base_seed + 1000;
    const RunResult moved = run_single(other, "mma", 0);
    CHECK(base.trajectory.ratios != moved.trajectory.ratios);

    // Adding a run leaves earlier runs untouched.
    ExperimentConfig more = cfg;
    more.num_runs["mma"] = 4;
    for (int k = 0; k < 3; ++k) {
        const RunResult a = run_single(cfg, "mma", k);
        const RunResult b = run_single(more, "mma", k);
        CHECK(a.trajectory.ratios == b.trajectory.ratios);
    }
}

TEST_CASE("emit_csv format") {
    ExperimentTable t;
    t.index_label = "n";
    t.algorithms = {"mma"};
    t.indices = {50, 100};
    t.db = {{-20.0, kIsiFloorDb}};
    const std::string path = tmp_path("fmt.csv");
    emit_csv(t, path);
    CHECK(slurp(path) == "n,isi_db_mma\n50,-20.000000\n100,-150.000000\n");

    ExperimentTable empty;
    empty.algorithms = {"mma"};
    CHECK_THROWS_AS(emit_csv(empty, path), std::invalid_argument);
}

TEST_CASE("identical experiments produce byte-identical outputs") {
    ExperimentConfig cfg = small_config(tmp_path("det_a.csv"));
    cfg.algorithms = {"mma", "sd-mma"};
    cfg.num_runs["sd-mma"] = 2;
    cfg.workers = 1;
    run_experiment(cfg);
    const std::string csv_a = slurp(cfg.output_path);
    const std::string meta_a = slurp(tmp_path("det_a.meta"));

    cfg.output_path = tmp_path("det_b.csv");
    cfg.workers = 3;
    run_experiment(cfg);
    CHECK(slurp(cfg.output_path) == csv_a);
    // Meta differs only in the recorded output path and worker count.
    std::istringstream a(meta_a), b(slurp(tmp_path("det_b.meta")));
    std::string la, lb;
    while (std::getline(a, la) && std::getline(b, lb)) {
        if (la.rfind("out=", 0) == 0 || la.rfind("workers=", 0) == 0) continue;
        CHECK(la == lb);
    }
}

TEST_CASE("fp-mma alongside a symbol-indexed algorithm") {
    ExperimentConfig cfg = small_config(tmp_path("mixed.csv"));
    cfg.channel_id = "identity";
    cfg.noise_on = false;
    cfg.eq_len = 5;
    cfg.init_index = 2;
    cfg.algorithms = {"mma", "fp-mma"};
    cfg.num_runs["mma"] = 1;
    cfg.num_runs["fp-mma"] = 1;
    cfg.num_symbols = 2000;
    cfg.fp_max_iters = 300;
    const ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.time_table);
    REQUIRE(out.fp_table);
    CHECK(out.fp_csv_path == tmp_path("mixed_fp.csv"));
    const std::string fp_csv = slurp(out.fp_csv_path);
    CHECK(fp_csv.rfind("iter,isi_db_fp-mma\n", 0) == 0);
    CHECK(out.fp_table->indices.back() == 300);
    // fp-mma alone goes straight to the main CSV with the iteration header.
    cfg.algorithms = {"fp-mma"};
    cfg.output_path = tmp_path("fponly.csv");
    const ExperimentOutput solo = run_experiment(cfg);
    CHECK_FALSE(solo.time_table);
    CHECK(slurp(cfg.output_path).rfind("iter,isi_db_fp-mma\n", 0) == 0);
}

TEST_CASE("meta file records the resolved config") {
    ExperimentConfig cfg = small_config(tmp_path("meta.csv"));
    run_experiment(cfg);
    const std::string meta = slurp(tmp_path("meta.meta"));
    CHECK(meta.find("channel=channel-1\n") != std::string::npos);
    CHECK(meta.find("qam=16\n") != std::string::npos);
    CHECK(meta.find("equalizer_length=7\n") != std::string::npos);
    CHECK(meta.find("lambda=harmonic\n") != std::string::npos);
    CHECK(meta.find("snr_db=30\n") != std::string::npos);
    CHECK(meta.find("runs_mma=3\n") != std::string::npos);
}
