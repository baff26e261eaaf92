#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimic/fpke.hpp"
#include "mimic/processes.hpp"
#include "mimic/stats.hpp"
#include "mimic/tables.hpp"

namespace mimic {

/// Configuration problem: carries the offending field and, when the problem
/// is tied to a specific config line, its line number (1-based, 0 if none).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, int line, const std::string& message)
        : std::runtime_error(line > 0
                                 ? "config error at line " + std::to_string(line) + ", field '" +
                                       field + "': " + message
                                 : "config error, field '" + field + "': " + message),
          field_(std::move(field)),
          line_(line) {}

    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

/// Parsed experiment description: which model to run, at what resolution,
/// with which estimator, and which reports to emit.
struct ExperimentConfig {
    std::string name;
    std::string model;  // lv | lsv | li | lsi | hawkes | fake_hawkes
    SimulationConfig sim;

    // lv / lsv
    double rate = 0.0;
    double sigma = 0.0;
    double initial_price = 1.0;
    // li / lsi: lambda(t) = lambda_const + lambda_time_slope * t
    double lambda_const = 0.0;
    double lambda_time_slope = 0.0;
    double lambda_bound = 0.0;
    // hawkes / fake_hawkes
    double base_rate = 0.0;
    double excitation = 0.0;
    double reversion = 0.0;

    StochasticFactorSpec factor;

    // reports written by `simulate`
    std::size_t fpke_functions = 0;  // 0 = skip the residual report
    double fpke_radius = 0.0;        // 0 = auto from the marginal support
    bool hypotheses = false;

    std::string output_dir;
    FlatMap raw;  // parsed key/value pairs, echoed into the manifest

    static ExperimentConfig parse_file(const std::filesystem::path& path);
    static ExperimentConfig parse_text(const std::string& text, const std::string& name);

    bool is_mckean_vlasov() const {
        return model == "lsv" || model == "lsi" || model == "fake_hawkes";
    }
};

/// Builds the model named by the config and simulates it.
SimulationResult run_model(const ExperimentConfig& config);

/// Runs the experiment and persists everything into the run directory:
/// snapshot tables, characteristics log, per-path integrability log, jump
/// events, requested reports, and a manifest with content digests.
std::filesystem::path run_experiment(const std::filesystem::path& config_path);

/// Resolves the run directory: explicit output_dir, else
/// $MIMIC_OUTPUT_ROOT/<config name>.
std::filesystem::path resolve_run_directory(const ExperimentConfig& config);

void write_run(const SimulationResult& run, const ExperimentConfig& config,
               const std::filesystem::path& directory);

/// Reads a run directory back into memory. Tables re-parse to the exact
/// values that were written.
SimulationResult load_run(const std::filesystem::path& directory);

struct CompareSpec {
    std::vector<double> times;
    double significance = 0.01;

    /// Text form: "times=0.5,1.0;significance=0.01".
    static CompareSpec parse(const std::string& text);
};

struct CoordinateComparison {
    double time = 0.0;
    std::size_t coordinate = 0;
    std::string test;  // "ks" or "chi2"
    double statistic = 0.0;
    double p_value = 1.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<CoordinateComparison> rows;
    double significance = 0.01;
    bool all_pass = false;

    std::string to_text() const;
};

/// Per-time, per-coordinate marginal comparison between two runs:
/// Kolmogorov-Smirnov on continuous coordinates, two-sample chi-square on
/// integer-valued ones. Coordinate-wise testing is a surrogate for equality
/// of the full laws and is labeled as such in the report.
ComparisonReport compare_runs(const std::filesystem::path& run_a,
                              const std::filesystem::path& run_b, const CompareSpec& spec);

struct HypothesesReport {
    IntegrabilityEstimate integrability;
    GrowthEstimate growth;
    std::size_t probe_count = 0;
    double truncation_radius = 0.0;

    std::string to_text() const;
};

/// Integrability and growth diagnostics of a simulated run, probing the
/// projected coefficients on the simulated marginals plus a deterministic
/// tail grid.
HypothesesReport hypotheses_report(const SimulationResult& run, std::size_t bins = 0,
                                   double tail_radius = 1000.0);

struct FpkeRunReport {
    std::vector<ResidualReport> functions;
    double budget_constant = 0.0;
    bool within_budget = false;

    Table to_table() const;
    std::string summary() const;
};

/// Weak-identity residual over a suite of test functions covering the
/// simulated marginal support.
FpkeRunReport fpke_run_report(const SimulationResult& run, std::size_t function_count,
                              double radius = 0.0, std::size_t bins = 0);

}  // namespace mimic
