#include "mimic/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mimic {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Mat& Mat::operator+=(const Mat& other) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& x : data_) {
        x *= s;
    }
    return *this;
}

double frobenius_norm(const Mat& m) {
    return norm(m.data());
}

double trace_product(const Mat& a, const Mat& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * b(j, i);
        }
    }
    return s;
}

Mat symmetrize(const Mat& m) {
    Mat out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    return out;
}

namespace {

// One pass of cyclic Jacobi rotations; returns the sum of squared
// off-diagonal entries before the sweep.
double jacobi_sweep(Mat& a, Mat* vectors) {
    const std::size_t n = a.rows();
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            off += 2.0 * a(p, q) * a(p, q);
        }
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const double apq = a(p, q);
            if (apq == 0.0) {
                continue;
            }
            const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            for (std::size_t k = 0; k < n; ++k) {
                const double akp = a(k, p);
                const double akq = a(k, q);
                a(k, p) = c * akp - s * akq;
                a(k, q) = s * akp + c * akq;
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double apk = a(p, k);
                const double aqk = a(q, k);
                a(p, k) = c * apk - s * aqk;
                a(q, k) = s * apk + c * aqk;
            }
            if (vectors != nullptr) {
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = (*vectors)(k, p);
                    const double vkq = (*vectors)(k, q);
                    (*vectors)(k, p) = c * vkp - s * vkq;
                    (*vectors)(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    return off;
}

void jacobi_decompose(Mat& a, Mat* vectors) {
    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (jacobi_sweep(a, vectors) < 1e-300) {
            break;
        }
    }
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Mat& m) {
    Mat a = symmetrize(m);
    jacobi_decompose(a, nullptr);
    std::vector<double> eig(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        eig[i] = a(i, i);
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

Mat clip_to_psd(const Mat& m, double tol) {
    Mat a = symmetrize(m);
    Mat v = Mat::identity(a.rows());
    jacobi_decompose(a, &v);
    const std::size_t n = a.rows();
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = a(i, i);
        if (eig[i] < -tol) {
            throw std::invalid_argument("matrix is not positive semi-definite: eigenvalue " +
                                        std::to_string(eig[i]));
        }
        if (eig[i] < 0.0) {
            eig[i] = 0.0;
        }
    }
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += v(i, k) * eig[k] * v(j, k);
            }
            out(i, j) = s;
        }
    }
    return symmetrize(out);
}

bool is_psd(const Mat& m, double tol) {
    const auto eig = symmetric_eigenvalues(m);
    return eig.empty() || eig.front() >= -tol;
}

}  // namespace mimic
