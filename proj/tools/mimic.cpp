#include <cstring>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "mimic/experiment.hpp"

namespace {

int usage() {
    std::cerr << "usage: mimic <command> [args]\n"
              << "  simulate <config-file>            run an experiment; prints the run directory\n"
              << "  compare <runA> <runB> <testspec>  marginal comparison, e.g. "
                 "\"times=1.0;significance=0.01\"\n"
              << "  fpke-residual <run> [functions]   weak-identity residual report\n"
              << "  hypotheses <run>                  integrability and growth diagnostics\n"
              << "\n"
              << "Run directories default to $MIMIC_OUTPUT_ROOT/<config name> unless the\n"
              << "config sets output_dir. Exit codes: 0 ok, 1 runtime failure, 2 bad config.\n";
    return 2;
}

int run_simulate(int argc, char** argv) {
    if (argc != 1) {
        return usage();
    }
    const auto directory = mimic::run_experiment(argv[0]);
    std::cout << directory.string() << "\n";
    return 0;
}

int run_compare(int argc, char** argv) {
    if (argc != 3) {
        return usage();
    }
    const mimic::CompareSpec spec = mimic::CompareSpec::parse(argv[2]);
    const mimic::ComparisonReport report = mimic::compare_runs(argv[0], argv[1], spec);
    std::cout << report.to_text();
    return 0;
}

int run_fpke(int argc, char** argv) {
    if (argc < 1 || argc > 2) {
        return usage();
    }
    std::size_t functions = 5;
    if (argc == 2) {
        functions = static_cast<std::size_t>(std::stoul(argv[1]));
    }
    const mimic::SimulationResult run = mimic::load_run(argv[0]);
    const mimic::FpkeRunReport report = mimic::fpke_run_report(run, functions);
    mimic::write_table(std::filesystem::path(argv[0]) / "fpke_report.tsv", report.to_table());
    std::cout << report.summary();
    return 0;
}

int run_hypotheses(int argc, char** argv) {
    if (argc != 1) {
        return usage();
    }
    const mimic::SimulationResult run = mimic::load_run(argv[0]);
    const mimic::HypothesesReport report = mimic::hypotheses_report(run);
    std::ofstream out(std::filesystem::path(argv[0]) / "hypotheses.txt");
    out << report.to_text();
    std::cout << report.to_text();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        return usage();
    }
    const std::string command = argv[1];
    try {
        if (command == "simulate") {
            return run_simulate(argc - 2, argv + 2);
        }
        if (command == "compare") {
            return run_compare(argc - 2, argv + 2);
        }
        if (command == "fpke-residual") {
            return run_fpke(argc - 2, argv + 2);
        }
        if (command == "hypotheses") {
            return run_hypotheses(argc - 2, argv + 2);
        }
        return usage();
    } catch (const mimic::ConfigError& error) {
        std::cerr << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
