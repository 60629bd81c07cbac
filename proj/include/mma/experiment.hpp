#ifndef MMA_EXPERIMENT_HPP
#define MMA_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mma/channel.hpp"
#include "mma/tensorops.hpp"

namespace mma {

class usage_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when --help is requested; carries the help text.
struct cli_help {
    std::string text;
};

struct ExperimentConfig {
    std::string channel_id = "channel-1";
    int qam_order = 16;
    int eq_len = 15;
    int init_index = 7;
    std::vector<std::string> algorithms = {"mma", "sd-mma"};
    std::map<std::string, double> mu = {
        {"mma", 1e-4}, {"sd-mma", 1e-4}, {"fp-mma", 0.01}};
    ForgettingPolicy lambda_policy = ForgettingPolicy::harmonic();
    bool noise_on = true;
    double snr_db = 30.0;
    long num_symbols = 20000;
    std::map<std::string, int> num_runs = {
        {"mma", 400}, {"sd-mma", 50}, {"fp-mma", 1}};
    std::uint64_t base_seed = 1;
    int record_every = 50;
    std::string output_path = "isi.csv";
    std::string plot_script_path;
    int workers = 0;  // 0 = hardware concurrency

    // FP-MMA2-2 iteration budget and stopping tolerance.
    int fp_max_iters = 10000;
    double fp_tol = 1e-8;

    double mu_for(const std::string& algo) const;
    int runs_for(const std::string& algo) const;
    void validate() const;
};

struct IsiTrajectory {
    std::vector<long> indices;
    std::vector<double> ratios;
};

struct RunResult {
    std::string algorithm;
    int run_index = 0;
    IsiTrajectory trajectory;
    CVector final_taps;
    bool diverged = false;
};

/// One ensemble table: rows are recorded indices, one dB column per algorithm.
struct ExperimentTable {
    std::string index_label = "n";
    std::vector<std::string> algorithms;
    std::vector<long> indices;
    std::vector<std::vector<double>> db;  // db[a][row] for algorithms[a]
};

struct ExperimentOutput {
    std::optional<ExperimentTable> time_table;  // symbol-indexed algorithms
    std::optional<ExperimentTable> fp_table;    // iteration-indexed fp-mma
    std::map<std::string, int> diverged;        // per-algorithm diverged counts
    std::string csv_path;
    std::string fp_csv_path;  // empty unless both table kinds were written
    std::string meta_path;
};

/// Parses CLI flags (without the program name) into a config. Unknown flags,
/// unparsable values and invariant violations raise usage_error; --help
/// raises cli_help.
ExperimentConfig parse_cli(const std::vector<std::string>& args);

/// Executes one seeded run of one algorithm. Deterministic in
/// (cfg, algo, run_index); divergence yields a truncated trajectory with the
/// diverged flag set.
RunResult run_single(const ExperimentConfig& cfg, const std::string& algo,
                     int run_index);

/// Runs the whole experiment (runs in parallel up to cfg.workers), writes the
/// CSV, the .meta sidecar and the optional plot script, and returns the
/// aggregated tables.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes a table as UTF-8 CSV with LF endings and 6-decimal dB values.
void emit_csv(const ExperimentTable& table, const std::string& path);

}  // namespace mma

#endif
