#include "mma/experiment.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "mma/constellation.hpp"
#include "mma/equalizer.hpp"
#include "mma/metrics.hpp"

namespace mma {

namespace {

const std::vector<std::string> kKnownAlgos = {"mma", "sd-mma", "fp-mma"};

bool known_algo(const std::string& a) {
    return std::find(kKnownAlgos.begin(), kKnownAlgos.end(), a) != kKnownAlgos.end();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string meta_path_for(const std::string& csv_path) {
    const std::size_t slash = csv_path.find_last_of("/\\");
    const std::size_t dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return csv_path + ".meta";
    }
    return csv_path.substr(0, dot) + ".meta";
}

std::string fp_path_for(const std::string& csv_path) {
    const std::size_t slash = csv_path.find_last_of("/\\");
    const std::size_t dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return csv_path + "_fp";
    }
    return csv_path.substr(0, dot) + "_fp" + csv_path.substr(dot);
}

}  // namespace

double ExperimentConfig::mu_for(const std::string& algo) const {
    const auto it = mu.find(algo);
    if (it == mu.end()) throw usage_error("no step size configured for " + algo);
    return it->second;
}

int ExperimentConfig::runs_for(const std::string& algo) const {
    const auto it = num_runs.find(algo);
    if (it == num_runs.end()) throw usage_error("no run count configured for " + algo);
    return it->second;
}

void ExperimentConfig::validate() const {
    try {
        builtin_channel(channel_id);
        make_square_qam(qam_order);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    if (eq_len < 1) throw usage_error("--equalizer-length must be >= 1");
    if (init_index < 0 || init_index >= eq_len) {
        throw usage_error("--init-index must satisfy 0 <= i < N");
    }
    if (num_symbols < eq_len) throw usage_error("--symbols must be >= equalizer length");
    if (record_every < 1) throw usage_error("--record-every must be >= 1");
    if (algorithms.empty()) throw usage_error("--algo: at least one algorithm required");
    for (const auto& a : algorithms) {
        if (!known_algo(a)) throw usage_error("--algo: unknown algorithm '" + a + "'");
        if (!(mu_for(a) > 0.0)) throw usage_error("--mu: step size for " + a + " must be > 0");
        if (runs_for(a) < 1) throw usage_error("--runs: run count for " + a + " must be >= 1");
    }
}

ExperimentConfig parse_cli(const std::vector<std::string>& args) {
    ExperimentConfig cfg;

    CLI::App app{"Blind multimodulus (MMA2-2) equalizer Monte Carlo harness"};
    app.set_config("--config");

    std::string algo_list;
    std::vector<std::string> mu_specs;
    std::vector<std::string> run_specs;
    std::string lambda_spec;
    std::string snr_spec;

    app.add_option("--channel", cfg.channel_id, "channel-1 | channel-2 | identity");
    app.add_option("--qam", cfg.qam_order, "square QAM order (4, 16, 64, ...)");
    app.add_option("--algo", algo_list, "comma list from {mma, sd-mma, fp-mma}");
    app.add_option("--equalizer-length", cfg.eq_len, "number of equalizer taps N");
    app.add_option("--init-index", cfg.init_index, "unit-spike initialization index");
    app.add_option("--mu", mu_specs, "step size, plain float or <algo>=<float>; repeatable");
    app.add_option("--lambda", lambda_spec, "harmonic | fixed:<float>");
    app.add_option("--snr-db", snr_spec, "SNR in dB, or 'off' for noiseless");
    app.add_option("--symbols", cfg.num_symbols, "symbols per run");
    app.add_option("--runs", run_specs, "runs per algorithm, plain int or <algo>=<int>; repeatable");
    app.add_option("--seed", cfg.base_seed, "base seed; run k uses base_seed + k");
    app.add_option("--record-every", cfg.record_every, "ISI recording cadence in symbols");
    app.add_option("--out", cfg.output_path, "output CSV path");
    app.add_option("--plot-script", cfg.plot_script_path, "emit a gnuplot script here");
    app.add_option("--workers", cfg.workers, "parallel run limit (0 = hardware)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw cli_help{app.help()};
    } catch (const CLI::ParseError& e) {
        throw usage_error(e.what());
    }

    if (!algo_list.empty()) {
        cfg.algorithms.clear();
        for (const auto& a : split(algo_list, ',')) {
            if (a.empty()) throw usage_error("--algo: empty entry in list");
            cfg.algorithms.push_back(a);
        }
    }

    auto apply_specs = [](const std::vector<std::string>& specs, auto& per_algo,
                          const char* flag, auto parse_value) {
        for (const auto& spec : specs) {
            const std::size_t eq = spec.find('=');
            if (eq == std::string::npos) {
                const auto v = parse_value(spec, flag);
                for (auto& [algo, val] : per_algo) val = v;
            } else {
                const std::string algo = spec.substr(0, eq);
                if (!known_algo(algo)) {
                    throw usage_error(std::string(flag) + ": unknown algorithm '" + algo + "'");
                }
                per_algo[algo] = parse_value(spec.substr(eq + 1), flag);
            }
        }
    };
    auto parse_double = [](const std::string& s, const char* flag) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw usage_error(std::string(flag) + ": cannot parse '" + s + "'");
        }
    };
    auto parse_int = [](const std::string& s, const char* flag) {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw usage_error(std::string(flag) + ": cannot parse '" + s + "'");
        }
    };
    apply_specs(mu_specs, cfg.mu, "--mu", parse_double);
    apply_specs(run_specs, cfg.num_runs, "--runs", parse_int);

    if (!lambda_spec.empty()) {
        if (lambda_spec == "harmonic") {
            cfg.lambda_policy = ForgettingPolicy::harmonic();
        } else if (lambda_spec.rfind("fixed:", 0) == 0) {
            const double l = parse_double(lambda_spec.substr(6), "--lambda");
            if (!(l > 0.0 && l < 1.0)) throw usage_error("--lambda: fixed value must be in (0,1)");
            cfg.lambda_policy = ForgettingPolicy::fixed(l);
        } else {
            throw usage_error("--lambda: expected 'harmonic' or 'fixed:<float>'");
        }
    }
    if (!snr_spec.empty()) {
        if (snr_spec == "off") {
            cfg.noise_on = false;
        } else {
            cfg.noise_on = true;
            cfg.snr_db = parse_double(snr_spec, "--snr-db");
        }
    }

    cfg.validate();
    return cfg;
}

namespace {

struct RunContext {
    Constellation constellation;
    ChannelModel channel;
    CVector received;
};

// Substreams per run: seed = base_seed + run_index; the symbol stream uses
// 2*seed and the noise stream 2*seed + 1, so all algorithms of one run see
// identical data.
RunContext make_run_context(const ExperimentConfig& cfg, int run_index) {
    RunContext ctx;
    ctx.constellation = make_square_qam(cfg.qam_order);
    ctx.channel = builtin_channel(cfg.channel_id);

    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(run_index);
    const auto symbols_vec = draw_symbols(ctx.constellation,
                                          static_cast<std::size_t>(cfg.num_symbols),
                                          2 * seed);
    CVector symbols(cfg.num_symbols);
    for (long i = 0; i < cfg.num_symbols; ++i) symbols(i) = symbols_vec[static_cast<std::size_t>(i)];

    const NoiseSpec noise = cfg.noise_on ? NoiseSpec::at(cfg.snr_db, 2 * seed + 1)
                                         : NoiseSpec::off();
    ctx.received = transmit(symbols, ctx.channel, noise, ctx.constellation.mean_power());
    return ctx;
}

CVector center_spike(int N, int index) {
    CVector w = CVector::Zero(N);
    w(index) = 1.0;
    return w;
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, const std::string& algo,
                     int run_index) {
    const RunContext ctx = make_run_context(cfg, run_index);
    const int N = cfg.eq_len;
    const double r_m = ctx.constellation.r_m;
    const double mu = cfg.mu_for(algo);

    RunResult res;
    res.algorithm = algo;
    res.run_index = run_index;

    CVector w = center_spike(N, cfg.init_index);
    auto record = [&](long index) {
        res.trajectory.indices.push_back(index);
        res.trajectory.ratios.push_back(isi_ratio(combined_response(ctx.channel, w)));
    };

    try {
        if (algo == "mma") {
            for (long n = 0; n < cfg.num_symbols; ++n) {
                w = mma_stochastic_step(w, regressor(ctx.received, n, N), mu, r_m);
                if ((n + 1) % cfg.record_every == 0) record(n + 1);
            }
        } else if (algo == "sd-mma") {
            SdState state{w, MomentSet(N), cfg.lambda_policy, mu, r_m};
            for (long n = 0; n < cfg.num_symbols; ++n) {
                sd_step(state, regressor(ctx.received, n, N));
                w = state.taps;
                if ((n + 1) % cfg.record_every == 0) record(n + 1);
            }
        } else if (algo == "fp-mma") {
            std::vector<CVec> regs;
            regs.reserve(static_cast<std::size_t>(cfg.num_symbols));
            for (long n = 0; n < cfg.num_symbols; ++n) {
                regs.push_back(regressor(ctx.received, n, N));
            }
            const MomentSet m = batch_moments(regs);
            const FpResult fp = fp_solve(
                m, w, mu, r_m, cfg.fp_tol, cfg.fp_max_iters,
                [&](int it, const CVec& taps) {
                    w = taps;
                    if (it % cfg.record_every == 0) record(it);
                });
            w = fp.taps;
            // Hold the converged value on the fixed iteration grid so all
            // runs share identical indices.
            const double last = isi_ratio(combined_response(ctx.channel, w));
            for (long it = res.trajectory.indices.empty()
                               ? cfg.record_every
                               : res.trajectory.indices.back() + cfg.record_every;
                 it <= cfg.fp_max_iters; it += cfg.record_every) {
                res.trajectory.indices.push_back(it);
                res.trajectory.ratios.push_back(last);
            }
        } else {
            throw usage_error("run_single: unknown algorithm '" + algo + "'");
        }
    } catch (const divergence_error&) {
        res.diverged = true;
    }
    res.final_taps = w;
    return res;
}

void emit_csv(const ExperimentTable& table, const std::string& path) {
    if (table.indices.empty()) {
        throw std::invalid_argument("emit_csv: empty table");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);

    out << table.index_label;
    for (const auto& a : table.algorithms) out << ",isi_db_" << a;
    out << "\n";
    char buf[64];
    for (std::size_t r = 0; r < table.indices.size(); ++r) {
        out << table.indices[r];
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            std::snprintf(buf, sizeof(buf), ",%.6f", table.db[a][r]);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

namespace {

ExperimentTable aggregate(const std::string& index_label,
                          const std::vector<std::string>& algos,
                          const std::map<std::string, std::vector<const RunResult*>>& by_algo) {
    ExperimentTable t;
    t.index_label = index_label;
    t.algorithms = algos;
    for (const auto& algo : algos) {
        const auto& runs = by_algo.at(algo);
        if (t.indices.empty()) t.indices = runs.front()->trajectory.indices;
        std::vector<double> col;
        col.reserve(t.indices.size());
        for (std::size_t r = 0; r < t.indices.size(); ++r) {
            std::vector<double> ratios;
            ratios.reserve(runs.size());
            for (const RunResult* rr : runs) ratios.push_back(rr->trajectory.ratios[r]);
            col.push_back(isi_ensemble_db(ratios));
        }
        t.db.push_back(std::move(col));
    }
    return t;
}

void write_meta(const ExperimentConfig& cfg, const ExperimentOutput& out,
                const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "channel=" << cfg.channel_id << "\n";
    f << "qam=" << cfg.qam_order << "\n";
    f << "equalizer_length=" << cfg.eq_len << "\n";
    f << "init_index=" << cfg.init_index << "\n";
    f << "algorithms=";
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
        f << (i ? "," : "") << cfg.algorithms[i];
    }
    f << "\n";
    char buf[64];
    for (const auto& a : cfg.algorithms) {
        std::snprintf(buf, sizeof(buf), "%.10g", cfg.mu_for(a));
        f << "mu_" << a << "=" << buf << "\n";
        f << "runs_" << a << "=" << cfg.runs_for(a) << "\n";
    }
    if (cfg.lambda_policy.mode == ForgettingPolicy::Mode::harmonic) {
        f << "lambda=harmonic\n";
    } else {
        std::snprintf(buf, sizeof(buf), "%.10g", cfg.lambda_policy.lambda);
        f << "lambda=fixed:" << buf << "\n";
    }
    if (cfg.noise_on) {
        std::snprintf(buf, sizeof(buf), "%.10g", cfg.snr_db);
        f << "snr_db=" << buf << "\n";
    } else {
        f << "snr_db=off\n";
    }
    f << "symbols=" << cfg.num_symbols << "\n";
    f << "seed=" << cfg.base_seed << "\n";
    f << "record_every=" << cfg.record_every << "\n";
    f << "out=" << cfg.output_path << "\n";
    f << "workers=" << cfg.workers << "\n";
    f << "fp_max_iters=" << cfg.fp_max_iters << "\n";
    std::snprintf(buf, sizeof(buf), "%.10g", cfg.fp_tol);
    f << "fp_tol=" << buf << "\n";
    if (!out.fp_csv_path.empty()) f << "fp_out=" << out.fp_csv_path << "\n";
    for (const auto& [algo, count] : out.diverged) {
        f << "diverged_" << algo << "=" << count << "\n";
    }
}

void write_plot_script(const ExperimentConfig& cfg, const ExperimentOutput& out) {
    std::ofstream f(cfg.plot_script_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + cfg.plot_script_path);
    f << "set datafile separator ','\n";
    f << "set xlabel 'symbol index'\n";
    f << "set ylabel 'ISI (dB)'\n";
    f << "set key top right\n";
    const ExperimentTable& t = out.time_table ? *out.time_table : *out.fp_table;
    const std::string& csv = out.time_table || out.fp_csv_path.empty()
                                 ? out.csv_path
                                 : out.fp_csv_path;
    f << "plot";
    for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
        if (a) f << ",";
        f << " '" << csv << "' using 1:" << (a + 2)
          << " with lines title '" << t.algorithms[a] << "'";
    }
    f << "\n";
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    struct Task {
        std::string algo;
        int run_index;
    };
    std::vector<Task> tasks;
    for (const auto& algo : cfg.algorithms) {
        for (int r = 0; r < cfg.runs_for(algo); ++r) tasks.push_back({algo, r});
    }

    std::vector<RunResult> results(tasks.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : hw;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            try {
                results[i] = run_single(cfg, tasks[i].algo, tasks[i].run_index);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned nthreads = std::min<std::size_t>(workers, tasks.size());
    for (unsigned i = 0; i + 1 < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("run failed: " + failure);

    ExperimentOutput out;
    std::map<std::string, std::vector<const RunResult*>> by_algo;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const RunResult& r = results[i];
        if (r.diverged) {
            ++out.diverged[r.algorithm];
        } else {
            by_algo[r.algorithm].push_back(&r);
        }
    }
    for (const auto& algo : cfg.algorithms) {
        if (!by_algo.count(algo)) {
            throw std::runtime_error("all runs diverged for algorithm " + algo);
        }
    }

    std::vector<std::string> time_algos, fp_algos;
    for (const auto& a : cfg.algorithms) {
        (a == "fp-mma" ? fp_algos : time_algos).push_back(a);
    }

    out.csv_path = cfg.output_path;
    out.meta_path = meta_path_for(cfg.output_path);
    if (!time_algos.empty()) {
        out.time_table = aggregate("n", time_algos, by_algo);
    }
    if (!fp_algos.empty()) {
        out.fp_table = aggregate("iter", fp_algos, by_algo);
    }

    // The iteration-indexed fp-mma trajectory goes to a sibling *_fp file
    // when mixed with symbol-indexed algorithms.
    if (out.time_table) {
        emit_csv(*out.time_table, out.csv_path);
        if (out.fp_table) {
            out.fp_csv_path = fp_path_for(cfg.output_path);
            emit_csv(*out.fp_table, out.fp_csv_path);
        }
    } else {
        emit_csv(*out.fp_table, out.csv_path);
    }
    write_meta(cfg, out, out.meta_path);
    if (!cfg.plot_script_path.empty()) write_plot_script(cfg, out);
    return out;
}

}  // namespace mma
