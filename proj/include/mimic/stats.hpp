#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mimic {

/// Sorted sample of a one-dimensional marginal.
class EmpiricalDistribution {
public:
    static EmpiricalDistribution from_samples(std::vector<double> samples);

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

private:
    std::vector<double> samples_;
};

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov: D = sup |ECDF_A - ECDF_B| with the
/// asymptotic p-value. Throws on empty samples.
KsResult ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// One-sample KS against a reference CDF. The CDF is probed on the sample
/// and must be nondecreasing there.
KsResult ks_vs_cdf(const EmpiricalDistribution& a, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t dof = 0;
    std::size_t cells = 0;  // after tail pooling
};

enum class ExpectedKind {
    ProbabilityMass,  // expected is a pmf (any scale); rescaled to the observed total
    Histogram,        // expected is a second sample's histogram (two-sample test)
};

/// Pearson chi-square over integer-count cells. Tail cells are pooled from
/// the right into a ">= K" cell until the pooled expectation reaches 5
/// (combined count 10 in the two-sample case). Throws if expected is all
/// zero.
ChiSquareResult chi_square_counts(const std::vector<double>& observed,
                                  const std::vector<double>& expected, ExpectedKind kind);

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Plug-in moment of order 1 or 2 with its Monte Carlo standard error.
MomentEstimate moment_ci(const std::vector<double>& samples, int order);

// Reference distribution functions used by the tests and oracles.
double kolmogorov_tail(double lambda);
double chi_square_sf(double x, double dof);
double normal_cdf(double z);
double lognormal_cdf(double x, double mu_log, double sigma_log);
double poisson_pmf(unsigned k, double mean);

/// Counts of round(x) == k for k = 0..max_value, with one extra cell for
/// everything above. Throws on negative values.
std::vector<double> integer_histogram(const std::vector<double>& samples,
                                      std::size_t max_value);

/// Poisson pmf over the same cell layout as integer_histogram.
std::vector<double> poisson_cells(double mean, std::size_t max_value);

}  // namespace mimic
