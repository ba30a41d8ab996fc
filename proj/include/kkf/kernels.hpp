#ifndef KKF_KERNELS_HPP
#define KKF_KERNELS_HPP

#include <cmath>
#include <string>

#include "kkf/common.hpp"

namespace kkf {

enum class KernelFamily { Matern12, Linear, SquaredExponential };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::Matern12: return "matern12";
        case KernelFamily::Linear: return "linear";
        case KernelFamily::SquaredExponential: return "squared_exponential";
    }
    return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "matern12" || s == "matern-1/2" || s == "exponential") return KernelFamily::Matern12;
    if (s == "linear") return KernelFamily::Linear;
    if (s == "squared_exponential" || s == "rbf" || s == "se") return KernelFamily::SquaredExponential;
    throw ConfigError("unknown kernel family: " + s);
}

/// Positive-definite kernel with hyperparameters. Immutable after construction,
/// safe for concurrent reads.
struct Kernel {
    KernelFamily family = KernelFamily::Matern12;
    double length_scale = 1.0;
    double variance = 1.0;

    double operator()(const Vector& x, const Vector& y) const {
        require(x.size() == y.size(), "kernel eval: dimension mismatch");
        if (!x.allFinite() || !y.allFinite())
            throw NumericalError("kernel eval: non-finite input");
        require(length_scale > 0.0, "kernel: length_scale must be positive");
        switch (family) {
            case KernelFamily::Linear:
                return variance * x.dot(y);
            case KernelFamily::Matern12:
                return variance * std::exp(-(x - y).norm() / length_scale);
            case KernelFamily::SquaredExponential: {
                const double r2 = (x - y).squaredNorm();
                return variance * std::exp(-0.5 * r2 / (length_scale * length_scale));
            }
        }
        return 0.0;
    }
};

namespace detail {
// Mirrors the lower triangle onto the upper so G == G.transpose() entrywise.
inline void enforce_symmetry(Matrix& G) {
    for (Eigen::Index j = 0; j < G.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) G(i, j) = G(j, i);
}
}  // namespace detail

/// Gram matrix: entry (i, j) = k(A.col(i), B.col(j)). Columns are points.
inline Matrix gram(const Kernel& k, const Matrix& A, const Matrix& B) {
    require(A.rows() == B.rows(), "gram: point dimension mismatch");
    if (!A.allFinite() || !B.allFinite())
        throw NumericalError("gram: non-finite input points");
    require(k.length_scale > 0.0, "kernel: length_scale must be positive");

    const Eigen::Index N = A.cols(), M = B.cols();
    const bool same = (N == M && A.rows() == B.rows() && A == B);
    Matrix G;
    switch (k.family) {
        case KernelFamily::Linear:
            G = k.variance * (A.transpose() * B);
            break;
        case KernelFamily::Matern12:
        case KernelFamily::SquaredExponential: {
            // squared distances via the expansion ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b,
            // clamped at zero against cancellation
            Vector a2 = A.colwise().squaredNorm();
            Vector b2 = B.colwise().squaredNorm();
            Matrix d2 = (-2.0 * (A.transpose() * B));
            d2.colwise() += a2;
            d2.rowwise() += b2.transpose();
            d2 = d2.cwiseMax(0.0);
            if (same) d2.diagonal().setZero();
            if (k.family == KernelFamily::Matern12)
                G = k.variance * (-d2.array().sqrt() / k.length_scale).exp().matrix();
            else
                G = k.variance *
                    (-0.5 * d2.array() / (k.length_scale * k.length_scale)).exp().matrix();
            break;
        }
    }
    if (same) detail::enforce_symmetry(G);
    return G;
}

}  // namespace kkf

#endif
