#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mimic {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// Small dense matrix, row-major. Dimensions here are the state dimension
/// of a model (1 or 2 in practice), so everything is O(d^2) and plain.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Mat& operator+=(const Mat& other);
    Mat& operator*=(double s);

    friend bool operator==(const Mat& a, const Mat& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double frobenius_norm(const Mat& m);
double trace_product(const Mat& a, const Mat& b);

Mat symmetrize(const Mat& m);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
std::vector<double> symmetric_eigenvalues(const Mat& m);

/// Symmetrize, then clip eigenvalues in [-tol, 0) to zero. Eigenvalues below
/// -tol are treated as data corruption and raise std::invalid_argument.
Mat clip_to_psd(const Mat& m, double tol = 1e-12);

bool is_psd(const Mat& m, double tol = 1e-12);

}  // namespace mimic
