#ifndef KKF_KEDMD_HPP
#define KKF_KEDMD_HPP

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "kkf/common.hpp"
#include "kkf/io.hpp"
#include "kkf/kernels.hpp"
#include "kkf/systems.hpp"

namespace kkf {

/// Fitted kernel-EDMD artifact. With lambda = 0 and a well-conditioned Gram
/// matrix the fitted matrices interpolate the training nodes:
///   U Phi(x_i) = Phi(x_i+),  C Phi(x_i) = y_i,  B Phi(x_i) = x_i,
/// where Phi(x) = (k(x_1, x), ..., k(x_N, x)). Immutable after fit.
struct KoopmanModel {
    Matrix nodes;         // n x N sample points
    Matrix successors;    // n x N one-step images
    Matrix observations;  // p x N sampled observations
    Kernel kernel;
    double lambda = 0.0;

    Matrix U;  // N x N feature propagation
    Matrix C;  // p x N feature -> observation
    Matrix B;  // n x N feature -> state (lift back)

    int sample_count() const { return static_cast<int>(nodes.cols()); }
    int state_dim() const { return static_cast<int>(nodes.rows()); }
    int obs_dim() const { return static_cast<int>(observations.rows()); }

    /// Feature embedding Phi(x): kernel evaluated against every node.
    Vector embed(const Vector& x) const {
        return gram(kernel, nodes, Matrix(x)).col(0);
    }

    /// Column-wise embedding of a batch of points.
    Matrix embed_all(const Matrix& points) const { return gram(kernel, nodes, points); }

    /// State recovered from a feature vector, x = B z.
    Vector lift_back(const Vector& feature) const {
        require(feature.size() == sample_count(), "lift_back: feature length mismatch");
        return B * feature;
    }

    /// Feature-space covariance mapped to state space, P_x = B P_z B^T.
    Matrix lift_back_cov(const Matrix& P_z) const {
        require(P_z.rows() == sample_count() && P_z.cols() == sample_count(),
                "lift_back_cov: covariance size mismatch");
        return symmetrized(B * P_z * B.transpose());
    }
};

using StateSampler = std::function<Vector(Rng&)>;

inline StateSampler uniform_box_sampler(const Vector& lo, const Vector& hi) {
    require(lo.size() == hi.size(), "uniform_box_sampler: bound dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        require(lo[i] < hi[i], "uniform_box_sampler: lower bound must be below upper bound");
    return [lo, hi](Rng& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector x(lo.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
        return x;
    };
}

inline StateSampler gaussian_sampler(const Vector& mean, const Matrix& cov) {
    return [mean, cov](Rng& rng) { return sample_gaussian(mean, cov, rng); };
}

/// Default Gram regularization, scaled to the kernel amplitude.
inline double default_lambda(const Matrix& K) {
    return 1e-8 * K.trace() / static_cast<double>(K.rows());
}

namespace detail {
// Solves M (K + lambda I) = RHS_cols for M given the factorization, i.e.
// returns (solve(Kreg, RHS_cols^T))^T.
inline Matrix solve_right(const Eigen::LDLT<Matrix>& fact, const Matrix& rhs_cols) {
    return fact.solve(rhs_cols.transpose()).transpose();
}
}  // namespace detail

/// Fit the finite Koopman approximation from N i.i.d. node samples:
/// x_i ~ state_sampler, x_i+ ~ rho_f(x_i, .), y_i ~ rho_g(x_i, .).
/// One symmetric factorization of (K + lambda I) is reused for U, C, B.
inline KoopmanModel fit(const ObservedSystem& system, const StateSampler& state_sampler,
                        const Kernel& kernel, int N, std::optional<double> lambda_opt,
                        Rng& rng) {
    require(N >= 2, "kedmd::fit: N must be >= 2");
    if (lambda_opt) require(*lambda_opt >= 0.0, "kedmd::fit: lambda must be >= 0");

    KoopmanModel model;
    model.kernel = kernel;
    model.nodes.resize(system.state_dim, N);
    model.successors.resize(system.state_dim, N);
    model.observations.resize(system.obs_dim, N);
    for (int i = 0; i < N; ++i) {
        Vector x = state_sampler(rng);
        require(x.size() == system.state_dim, "kedmd::fit: sampler dimension mismatch");
        model.nodes.col(i) = x;
        model.successors.col(i) = system.step_sampler(x, rng);
        model.observations.col(i) = system.obs_sampler(x, rng);
    }
    if (!model.successors.allFinite() || !model.observations.allFinite())
        throw NumericalError("kedmd::fit: non-finite sampled data");

    const Matrix K = gram(kernel, model.nodes, model.nodes);
    const double lambda = lambda_opt.value_or(default_lambda(K));
    model.lambda = lambda;
    Matrix Kreg = K;
    Kreg.diagonal().array() += lambda;
    Eigen::LDLT<Matrix> fact(Kreg);
    if (fact.info() != Eigen::Success)
        throw NumericalError("kedmd::fit: (K + lambda I) factorization failed; "
                             "try a larger lambda");

    // Column j of Kplus is Phi(x_j+).
    const Matrix Kplus = gram(kernel, model.nodes, model.successors);
    model.U = detail::solve_right(fact, Kplus);
    model.C = detail::solve_right(fact, model.observations);
    model.B = detail::solve_right(fact, model.nodes);
    if (!model.U.allFinite() || !model.C.allFinite() || !model.B.allFinite())
        throw NumericalError("kedmd::fit: non-finite solution; (K + lambda I) is "
                             "numerically singular, try a larger lambda");
    return model;
}

inline KoopmanModel fit(const ObservedSystem& system, const StateSampler& state_sampler,
                        const Kernel& kernel, int N, Rng& rng) {
    return fit(system, state_sampler, kernel, N, std::nullopt, rng);
}

/// Max node-interpolation residuals, relative to the data scale.
struct InterpolationResiduals {
    double propagation = 0.0;  // ||U Phi(x_i) - Phi(x_i+)||_inf over nodes
    double observation = 0.0;  // ||C Phi(x_i) - y_i||_inf
    double state = 0.0;        // ||B Phi(x_i) - x_i||_inf
};

inline InterpolationResiduals interpolation_residuals(const KoopmanModel& model) {
    const Matrix K = gram(model.kernel, model.nodes, model.nodes);
    const Matrix Kplus = gram(model.kernel, model.nodes, model.successors);
    InterpolationResiduals r;
    r.propagation = (model.U * K - Kplus).cwiseAbs().maxCoeff();
    r.observation = (model.C * K - model.observations).cwiseAbs().maxCoeff();
    r.state = (model.B * K - model.nodes).cwiseAbs().maxCoeff();
    return r;
}

/// Unbiased sample covariance (divisor N-1) of optionally transformed samples.
inline Matrix empirical_cov(const std::vector<Vector>& samples,
                            const std::function<Vector(const Vector&)>& map = nullptr) {
    require(samples.size() >= 2, "empirical_cov: need at least 2 samples");
    std::vector<Vector> mapped;
    mapped.reserve(samples.size());
    for (const auto& s : samples) mapped.push_back(map ? map(s) : s);
    Vector mean = Vector::Zero(mapped.front().size());
    for (const auto& z : mapped) mean += z;
    mean /= static_cast<double>(mapped.size());
    Matrix cov = Matrix::Zero(mean.size(), mean.size());
    for (const auto& z : mapped) {
        Vector d = z - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(mapped.size() - 1);
    return symmetrized(cov);
}

/// Unbiased sample covariance (divisor S-1) of the columns of a matrix.
inline Matrix empirical_cov_cols(const Matrix& samples) {
    require(samples.cols() >= 2, "empirical_cov_cols: need at least 2 samples");
    const Matrix centered = samples.colwise() - Vector(samples.rowwise().mean());
    Matrix cov = Matrix::Zero(samples.rows(), samples.rows());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(
        centered, 1.0 / static_cast<double>(samples.cols() - 1));
    return cov.selfadjointView<Eigen::Lower>();
}

/// Feature-space initialization: mean and unbiased covariance of embedded
/// draws from the initial-state distribution.
inline std::pair<Vector, Matrix> embedding_init(const KoopmanModel& model,
                                                const StateSampler& x0_sampler, int n_samples,
                                                Rng& rng) {
    require(n_samples >= 2, "embedding_init: need at least 2 samples");
    Matrix draws(model.state_dim(), n_samples);
    for (int i = 0; i < n_samples; ++i) draws.col(i) = x0_sampler(rng);
    const Matrix feats = model.embed_all(draws);
    return {feats.rowwise().mean(), empirical_cov_cols(feats)};
}

// ---------------------------------------------------------------------------
// Serialization: precompute-once / filter-many workflows
// ---------------------------------------------------------------------------

inline Json to_json(const KoopmanModel& m) {
    return Json{{"kernel",
                 {{"family", to_string(m.kernel.family)},
                  {"length_scale", m.kernel.length_scale},
                  {"variance", m.kernel.variance}}},
                {"lambda", m.lambda},
                {"nodes", matrix_to_json(m.nodes)},
                {"successors", matrix_to_json(m.successors)},
                {"observations", matrix_to_json(m.observations)},
                {"U", matrix_to_json(m.U)},
                {"C", matrix_to_json(m.C)},
                {"B", matrix_to_json(m.B)}};
}

inline KoopmanModel koopman_model_from_json(const Json& j) {
    KoopmanModel m;
    m.kernel.family = kernel_family_from_string(j.at("kernel").at("family").get<std::string>());
    m.kernel.length_scale = j.at("kernel").at("length_scale").get<double>();
    m.kernel.variance = j.at("kernel").at("variance").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.nodes = matrix_from_json(j.at("nodes"));
    m.successors = matrix_from_json(j.at("successors"));
    m.observations = matrix_from_json(j.at("observations"));
    m.U = matrix_from_json(j.at("U"));
    m.C = matrix_from_json(j.at("C"));
    m.B = matrix_from_json(j.at("B"));
    require(m.U.rows() == m.nodes.cols() && m.U.cols() == m.nodes.cols(),
            "koopman model artifact: inconsistent U shape");
    return m;
}

}  // namespace kkf

#endif
