#ifndef KKF_COMMON_HPP
#define KKF_COMMON_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kkf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Raised on invalid arguments or configuration (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised on numerical failures: singular systems, non-finite values (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

/// SplitMix64 step, used to derive independent stream seeds from a base seed.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// In-place (m + m^T)/2 for square matrices; avoids the temporary.
inline void symmetrize_in_place(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
}

/// In-place mirror of the lower triangle onto the upper one.
inline void mirror_lower_in_place(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
}

/// Lower Cholesky factor of a symmetric PSD matrix, escalating jitter
/// before giving up. Used for sampling and for innovation-covariance solves.
inline Matrix safe_cholesky(const Matrix& cov, const std::string& what) {
    const Matrix sym = symmetrized(cov);
    const double scale = sym.rows() > 0 ? sym.trace() / static_cast<double>(sym.rows()) : 0.0;
    for (double mult : {0.0, 1e-10, 1e-8, 1e-6}) {
        Matrix trial = sym;
        if (mult > 0.0) trial += mult * std::max(scale, 1.0) * Matrix::Identity(sym.rows(), sym.cols());
        Eigen::LLT<Matrix> llt(trial);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError("Cholesky factorization failed for " + what +
                         " after jitter escalation");
}

/// Draw from N(mean, cov).
inline Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng) {
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stdnorm(rng);
    if ((cov.array() == 0.0).all()) return mean;
    return mean + safe_cholesky(cov, "gaussian sampling covariance") * z;
}

}  // namespace kkf

#endif
