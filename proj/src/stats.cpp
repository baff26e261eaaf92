#include "mimic/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mimic/summation.hpp"

namespace mimic {

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical distribution requires at least one sample");
    }
    for (double x : samples) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("empirical distribution samples must be finite");
        }
    }
    std::sort(samples.begin(), samples.end());
    EmpiricalDistribution out;
    out.samples_ = std::move(samples);
    return out;
}

double kolmogorov_tail(double lambda) {
    if (lambda <= 1e-3) {
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_p_value(double statistic, double effective_n) {
    const double root = std::sqrt(effective_n);
    return kolmogorov_tail((root + 0.12 + 0.11 / root) * statistic);
}

}  // namespace

KsResult ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& xs = a.samples();
    const auto& ys = b.samples();
    const double na = static_cast<double>(xs.size());
    const double nb = static_cast<double>(ys.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        const double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= v) {
            ++i;
        }
        while (j < ys.size() && ys[j] <= v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult out;
    out.statistic = d;
    out.p_value = ks_p_value(d, na * nb / (na + nb));
    return out;
}

KsResult ks_vs_cdf(const EmpiricalDistribution& a, const std::function<double(double)>& cdf) {
    const auto& xs = a.samples();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    double previous = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        if (!std::isfinite(f) || f < previous - 1e-12) {
            throw std::invalid_argument("reference cdf is not nondecreasing on the sample");
        }
        previous = std::max(previous, f);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    KsResult out;
    out.statistic = d;
    out.p_value = ks_p_value(d, n);
    return out;
}

namespace {

struct PooledCells {
    std::vector<double> observed;
    std::vector<double> expected;
};

// Pools trailing cells into one ">= K" cell until its pooled expectation
// passes the threshold. Leading and interior cells are left alone; if the
// rightmost cell already meets the threshold nothing is pooled.
PooledCells pool_tail(const std::vector<double>& observed, const std::vector<double>& expected,
                      double threshold) {
    std::size_t keep = observed.size();
    double pooled_obs = 0.0;
    double pooled_exp = 0.0;
    bool have_tail = false;
    while (keep > 1) {
        const double tail_exp = have_tail ? pooled_exp : expected[keep - 1];
        if (tail_exp >= threshold) {
            break;
        }
        --keep;
        pooled_obs += observed[keep];
        pooled_exp += expected[keep];
        have_tail = true;
    }
    PooledCells out;
    out.observed.assign(observed.begin(), observed.begin() + keep);
    out.expected.assign(expected.begin(), expected.begin() + keep);
    if (have_tail) {
        out.observed.push_back(pooled_obs);
        out.expected.push_back(pooled_exp);
    }
    return out;
}

}  // namespace

ChiSquareResult chi_square_counts(const std::vector<double>& observed,
                                  const std::vector<double>& expected, ExpectedKind kind) {
    if (observed.size() != expected.size() || observed.empty()) {
        throw std::invalid_argument("observed and expected cell lists must match and be nonempty");
    }
    const double total_obs = accurate_sum(observed);
    const double total_exp = accurate_sum(expected);
    if (!(total_exp > 0.0)) {
        throw std::invalid_argument("expected counts are all zero");
    }

    ChiSquareResult out;
    if (kind == ExpectedKind::ProbabilityMass) {
        const double scale = total_obs / total_exp;
        std::vector<double> scaled(expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            scaled[i] = expected[i] * scale;
        }
        const PooledCells cells = pool_tail(observed, scaled, 5.0);
        NeumaierSum stat;
        for (std::size_t i = 0; i < cells.observed.size(); ++i) {
            if (cells.expected[i] <= 0.0) {
                if (cells.observed[i] > 0.0) {
                    throw std::invalid_argument(
                        "observed mass in a cell with zero expectation at cell " +
                        std::to_string(i));
                }
                continue;
            }
            const double diff = cells.observed[i] - cells.expected[i];
            stat.add(diff * diff / cells.expected[i]);
        }
        out.statistic = stat.value();
        out.cells = cells.observed.size();
    } else {
        if (!(total_obs > 0.0)) {
            throw std::invalid_argument("observed counts are all zero");
        }
        const PooledCells cells = pool_tail(observed, expected, 10.0);
        const double k1 = std::sqrt(total_exp / total_obs);
        const double k2 = std::sqrt(total_obs / total_exp);
        NeumaierSum stat;
        for (std::size_t i = 0; i < cells.observed.size(); ++i) {
            const double combined = cells.observed[i] + cells.expected[i];
            if (combined <= 0.0) {
                continue;
            }
            const double diff = k1 * cells.observed[i] - k2 * cells.expected[i];
            stat.add(diff * diff / combined);
        }
        out.statistic = stat.value();
        out.cells = cells.observed.size();
    }
    out.dof = out.cells > 1 ? out.cells - 1 : 1;
    out.p_value = chi_square_sf(out.statistic, static_cast<double>(out.dof));
    return out;
}

MomentEstimate moment_ci(const std::vector<double>& samples, int order) {
    if (samples.empty()) {
        throw std::invalid_argument("moment estimate requires samples");
    }
    if (order != 1 && order != 2) {
        throw std::invalid_argument("moment order must be 1 or 2");
    }
    std::vector<double> transformed(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        transformed[i] = order == 1 ? samples[i] : samples[i] * samples[i];
    }
    const MeanAndError stats = mean_and_standard_error(transformed);
    return MomentEstimate{stats.mean, stats.standard_error};
}

namespace {

// Regularized incomplete gamma functions, series and continued-fraction
// branches (Numerical Recipes style).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) {
            break;
        }
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) {
        throw std::invalid_argument("invalid incomplete gamma arguments");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_continued_fraction(a, x);
}

}  // namespace

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) {
        return 1.0;
    }
    return std::clamp(gamma_q(0.5 * dof, 0.5 * x), 0.0, 1.0);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double lognormal_cdf(double x, double mu_log, double sigma_log) {
    if (x <= 0.0) {
        return 0.0;
    }
    return normal_cdf((std::log(x) - mu_log) / sigma_log);
}

double poisson_pmf(unsigned k, double mean) {
    if (mean < 0.0) {
        throw std::invalid_argument("Poisson mean must be nonnegative");
    }
    if (mean == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    return std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

std::vector<double> integer_histogram(const std::vector<double>& samples,
                                      std::size_t max_value) {
    std::vector<double> cells(max_value + 2, 0.0);
    for (double x : samples) {
        const long k = std::lround(x);
        if (k < 0) {
            throw std::invalid_argument("integer histogram requires nonnegative values");
        }
        if (static_cast<std::size_t>(k) > max_value) {
            cells.back() += 1.0;
        } else {
            cells[static_cast<std::size_t>(k)] += 1.0;
        }
    }
    return cells;
}

std::vector<double> poisson_cells(double mean, std::size_t max_value) {
    std::vector<double> cells(max_value + 2, 0.0);
    double cumulative = 0.0;
    for (std::size_t k = 0; k <= max_value; ++k) {
        cells[k] = poisson_pmf(static_cast<unsigned>(k), mean);
        cumulative += cells[k];
    }
    cells.back() = std::max(0.0, 1.0 - cumulative);
    return cells;
}

}  // namespace mimic
