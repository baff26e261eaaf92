#include "mimic/summation.hpp"

namespace mimic {

MeanAndError mean_and_standard_error(std::span<const double> xs) {
    MeanAndError out;
    if (xs.empty()) {
        return out;
    }
    const double n = static_cast<double>(xs.size());
    out.mean = accurate_sum(xs) / n;
    if (xs.size() < 2) {
        return out;
    }
    NeumaierSum sq;
    for (double x : xs) {
        const double d = x - out.mean;
        sq.add(d * d);
    }
    const double variance = sq.value() / (n - 1.0);
    out.standard_error = std::sqrt(variance > 0.0 ? variance / n : 0.0);
    return out;
}

}  // namespace mimic
