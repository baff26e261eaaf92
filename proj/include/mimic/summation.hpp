#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace mimic {

/// Neumaier compensated accumulator. Keeps long reductions accurate to a few
/// ulps independent of length, which the estimator exactness contracts
/// (tower property, per-bin orthogonality) depend on.
struct NeumaierSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + compensation; }
};

inline double accurate_sum(std::span<const double> xs) {
    NeumaierSum acc;
    for (double x : xs) {
        acc.add(x);
    }
    return acc.value();
}

/// Mean and standard error (divisor n-1) of a sample, compensated.
struct MeanAndError {
    double mean = 0.0;
    double standard_error = 0.0;
};

MeanAndError mean_and_standard_error(std::span<const double> xs);

}  // namespace mimic
