#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "mma/experiment.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const mma::ExperimentConfig cfg = mma::parse_cli(args);
        const mma::ExperimentOutput out = mma::run_experiment(cfg);
        std::printf("wrote %s\n", out.csv_path.c_str());
        if (!out.fp_csv_path.empty()) std::printf("wrote %s\n", out.fp_csv_path.c_str());
        std::printf("wrote %s\n", out.meta_path.c_str());
        for (const auto& [algo, count] : out.diverged) {
            std::printf("excluded %d diverged run(s) of %s\n", count, algo.c_str());
        }
        return 0;
    } catch (const mma::cli_help& h) {
        std::printf("%s", h.text.c_str());
        return 0;
    } catch (const mma::usage_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
