#ifndef KKF_FILTERS_HPP
#define KKF_FILTERS_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "kkf/common.hpp"
#include "kkf/kedmd.hpp"
#include "kkf/systems.hpp"

namespace kkf {

struct GaussianPrior {
    Vector mean;
    Matrix cov;
};

/// Output of one filter run. Column 0 of `estimates` is the prior mean;
/// all stored covariances are symmetrized. Feature-space fields are only
/// populated by the Koopman Kalman filter.
struct FilterTrace {
    Matrix estimates;                  // n x (T+1)
    std::vector<Matrix> covariances;   // T+1 state-space covariances
    Matrix innovations;                // p x T
    Matrix feature_state;              // N x (T+1), KKF only
    std::vector<Matrix> feature_cov;   // KKF only
    double wall_time = 0.0;            // seconds, excluding model fitting

    int horizon() const { return static_cast<int>(innovations.cols()); }
};

namespace detail {

class StopWatch {
  public:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Solves S X = RHS for symmetric positive (semi)definite S, escalating
// diagonal jitter {0, 1e-10, 1e-8, 1e-6} * trace(S)/p before failing.
inline Matrix solve_spd(const Matrix& S, const Matrix& rhs, const std::string& what) {
    const Matrix sym = symmetrized(S);
    const double scale = sym.rows() > 0 ? std::abs(sym.trace()) / static_cast<double>(sym.rows()) : 0.0;
    for (double mult : {0.0, 1e-10, 1e-8, 1e-6}) {
        Matrix trial = sym;
        if (mult > 0.0) trial.diagonal().array() += mult * std::max(scale, 1.0);
        Eigen::LLT<Matrix> llt(trial);
        if (llt.info() != Eigen::Success) continue;
        Matrix x = llt.solve(rhs);
        if (x.allFinite()) return x;
    }
    throw NumericalError("singular innovation covariance in " + what);
}

inline void check_finite(const Vector& v, const std::string& what, int step) {
    if (!v.allFinite())
        throw NumericalError(what + ": non-finite estimate at step " + std::to_string(step));
}

}  // namespace detail

/// Classical Kalman filter for linear Gaussian systems.
inline FilterTrace kalman_filter(const LinearGaussianSystem& sys, const GaussianPrior& prior,
                                 const Matrix& observations) {
    const int n = sys.state_dim, p = sys.obs_dim;
    const int T = static_cast<int>(observations.cols());
    require(prior.mean.size() == n, "kalman_filter: prior mean dimension mismatch");
    require(observations.rows() == p, "kalman_filter: observation dimension mismatch");

    detail::StopWatch timer;
    FilterTrace trace;
    trace.estimates.resize(n, T + 1);
    trace.innovations.resize(p, T);
    trace.covariances.reserve(T + 1);

    Vector x = prior.mean;
    Matrix P = symmetrized(prior.cov);
    trace.estimates.col(0) = x;
    trace.covariances.push_back(P);

    const Matrix I = Matrix::Identity(n, n);
    for (int k = 0; k < T; ++k) {
        Vector x_pred = sys.A * x;
        Matrix P_pred = symmetrized(sys.A * P * sys.A.transpose() + sys.process_cov);
        Vector innovation = observations.col(k) - sys.C * x_pred;
        Matrix S = sys.C * P_pred * sys.C.transpose() + sys.obs_cov;
        // K = P- C^T S^{-1}; solve S K^T = C P- instead of inverting S
        Matrix gain = detail::solve_spd(S, Matrix(sys.C * P_pred), "kalman_filter").transpose();
        x = x_pred + gain * innovation;
        P = symmetrized((I - gain * sys.C) * P_pred);
        detail::check_finite(x, "kalman_filter", k + 1);
        trace.estimates.col(k + 1) = x;
        trace.covariances.push_back(P);
        trace.innovations.col(k) = innovation;
    }
    trace.wall_time = timer.elapsed();
    return trace;
}

struct KkfOptions {
    bool freeze_observation_cov = false;  // estimate R once and reuse
};

/// Koopman Kalman filter: Kalman recursion in the kernel feature space with
/// empirical covariance estimates, lifted back to the state space per step.
inline FilterTrace kkf(const ObservedSystem& sys, const KoopmanModel& model,
                       const GaussianPrior& prior, const Matrix& observations, int n_samples,
                       Rng& rng, const KkfOptions& options = {}) {
    const int n = sys.state_dim, p = sys.obs_dim, N = model.sample_count();
    const int T = static_cast<int>(observations.cols());
    require(n_samples >= 2, "kkf: n_samples must be >= 2");
    require(model.state_dim() == n, "kkf: model/state dimension mismatch");
    require(model.obs_dim() == p, "kkf: model/observation dimension mismatch");
    require(prior.mean.size() == n, "kkf: prior mean dimension mismatch");
    require(observations.rows() == p, "kkf: observation dimension mismatch");

    FilterTrace trace;
    trace.estimates.resize(n, T + 1);
    trace.innovations.resize(p, T);
    trace.feature_state.resize(N, T + 1);
    trace.covariances.reserve(T + 1);
    trace.feature_cov.reserve(T + 1);

    detail::StopWatch timer;
    Vector x_hat = prior.mean;
    Vector z_hat = model.embed(x_hat);

    trace.estimates.col(0) = x_hat;
    trace.covariances.push_back(symmetrized(prior.cov));
    trace.feature_state.col(0) = z_hat;
    // The trace owns the current feature covariance; each step appends the
    // posterior and reads its predecessor in place, avoiding copies.
    trace.feature_cov.push_back(
        embedding_init(model, gaussian_sampler(prior.mean, prior.cov), n_samples, rng).second);

    Matrix R_frozen;
    Matrix state_draws(n, n_samples);
    Matrix obs_draws(p, n_samples);
    Matrix W(N, N), P_z_pred(N, N);
    const double cov_scale = 1.0 / static_cast<double>(n_samples - 1);

    for (int k = 0; k < T; ++k) {
        // Prediction: state mean propagated in the original space, re-embedded.
        Vector x_pred = sys.step_mean(x_hat, n_samples, rng);
        Vector z_pred = model.embed(x_pred);
        for (int i = 0; i < n_samples; ++i)
            state_draws.col(i) = sys.step_sampler(x_hat, rng);
        // P^z- = U P^z U^T + Q_k with Q_k the sample covariance of the
        // embedded draws, added as a symmetric rank update; the final mirror
        // makes P^z- exactly symmetric.
        Matrix feats = model.embed_all(state_draws);
        feats.colwise() -= Vector(feats.rowwise().mean());
        W.noalias() = model.U * trace.feature_cov.back();
        P_z_pred.noalias() = W * model.U.transpose();
        P_z_pred.selfadjointView<Eigen::Lower>().rankUpdate(feats, cov_scale);
        mirror_lower_in_place(P_z_pred);

        // Update.
        Vector y_pred = sys.obs_mean(x_pred, n_samples, rng);
        Vector innovation = observations.col(k) - y_pred;
        Matrix R_k;
        if (options.freeze_observation_cov && R_frozen.size() > 0) {
            R_k = R_frozen;
        } else {
            for (int i = 0; i < n_samples; ++i)
                obs_draws.col(i) = sys.obs_sampler(x_pred, rng);
            R_k = empirical_cov_cols(obs_draws);
            if (options.freeze_observation_cov) R_frozen = R_k;
        }
        const Matrix CP = model.C * P_z_pred;  // p x N
        Matrix S = CP * model.C.transpose() + R_k;
        Matrix gain = detail::solve_spd(S, CP, "kkf").transpose();  // N x p
        z_hat = z_pred + gain * innovation;
        x_hat = model.lift_back(z_hat);
        // (I - K C) P- written as P- minus the rank-p correction K (C P-).
        Matrix P_z(N, N);
        P_z.noalias() = P_z_pred - gain * CP;
        symmetrize_in_place(P_z);
        detail::check_finite(x_hat, "kkf", k + 1);

        trace.estimates.col(k + 1) = x_hat;
        trace.covariances.push_back(model.lift_back_cov(P_z));
        trace.feature_state.col(k + 1) = z_hat;
        trace.feature_cov.push_back(std::move(P_z));
        trace.innovations.col(k) = innovation;
    }
    trace.wall_time = timer.elapsed();
    return trace;
}

namespace detail {

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double step) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step * (1.0 + std::abs(x[j]));
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

}  // namespace detail

/// Extended Kalman filter baseline with central finite-difference Jacobians.
inline FilterTrace ekf(const ObservedSystem& sys, const GaussianPrior& prior,
                       const Matrix& observations, double jacobian_step = 1e-6) {
    require(sys.has_deterministic_parts(),
            "ekf: system must expose deterministic parts and noise covariances");
    const int n = sys.state_dim, p = sys.obs_dim;
    const int T = static_cast<int>(observations.cols());

    detail::StopWatch timer;
    FilterTrace trace;
    trace.estimates.resize(n, T + 1);
    trace.innovations.resize(p, T);
    Vector x = prior.mean;
    Matrix P = symmetrized(prior.cov);
    trace.estimates.col(0) = x;
    trace.covariances.push_back(P);

    const Matrix I = Matrix::Identity(n, n);
    for (int k = 0; k < T; ++k) {
        Matrix F = detail::fd_jacobian(sys.step_det, x, jacobian_step);
        Vector x_pred = sys.step_det(x);
        Matrix P_pred = symmetrized(F * P * F.transpose() + sys.process_cov);
        Matrix H = detail::fd_jacobian(sys.obs_det, x_pred, jacobian_step);
        Vector innovation = observations.col(k) - sys.obs_det(x_pred);
        Matrix S = H * P_pred * H.transpose() + sys.obs_cov;
        Matrix gain = detail::solve_spd(S, Matrix(H * P_pred), "ekf").transpose();
        x = x_pred + gain * innovation;
        P = symmetrized((I - gain * H) * P_pred);
        detail::check_finite(x, "ekf", k + 1);
        trace.estimates.col(k + 1) = x;
        trace.covariances.push_back(P);
        trace.innovations.col(k) = innovation;
    }
    trace.wall_time = timer.elapsed();
    return trace;
}

/// Unscented Kalman filter baseline: scaled unscented transform with 2n+1
/// sigma points, additive-noise form.
inline FilterTrace ukf(const ObservedSystem& sys, const GaussianPrior& prior,
                       const Matrix& observations, double alpha = 1e-3, double beta = 2.0,
                       double kappa = 0.0) {
    require(sys.has_deterministic_parts(),
            "ukf: system must expose deterministic parts and noise covariances");
    const int n = sys.state_dim, p = sys.obs_dim;
    const int T = static_cast<int>(observations.cols());
    const double lambda = alpha * alpha * (n + kappa) - n;
    const double scale = n + lambda;
    require(scale > 0.0, "ukf: invalid sigma-point scaling (n + lambda must be positive)");

    const int n_sigma = 2 * n + 1;
    Vector wm(n_sigma), wc(n_sigma);
    wm[0] = lambda / scale;
    wc[0] = lambda / scale + (1.0 - alpha * alpha + beta);
    for (int i = 1; i < n_sigma; ++i) wm[i] = wc[i] = 0.5 / scale;

    auto sigma_points = [&](const Vector& mean, const Matrix& cov) {
        Matrix L = safe_cholesky(scale * cov, "ukf sigma-point covariance");
        Matrix pts(n, n_sigma);
        pts.col(0) = mean;
        for (int i = 0; i < n; ++i) {
            pts.col(1 + i) = mean + L.col(i);
            pts.col(1 + n + i) = mean - L.col(i);
        }
        return pts;
    };

    detail::StopWatch timer;
    FilterTrace trace;
    trace.estimates.resize(n, T + 1);
    trace.innovations.resize(p, T);
    Vector x = prior.mean;
    Matrix P = symmetrized(prior.cov);
    trace.estimates.col(0) = x;
    trace.covariances.push_back(P);

    for (int k = 0; k < T; ++k) {
        Matrix sp = sigma_points(x, P);
        Matrix sp_prop(n, n_sigma);
        for (int i = 0; i < n_sigma; ++i) sp_prop.col(i) = sys.step_det(sp.col(i));
        Vector x_pred = sp_prop * wm;
        Matrix P_pred = sys.process_cov;
        for (int i = 0; i < n_sigma; ++i) {
            Vector d = sp_prop.col(i) - x_pred;
            P_pred.noalias() += wc[i] * (d * d.transpose());
        }
        P_pred = symmetrized(P_pred);

        Matrix sp2 = sigma_points(x_pred, P_pred);
        Matrix yp(p, n_sigma);
        for (int i = 0; i < n_sigma; ++i) yp.col(i) = sys.obs_det(sp2.col(i));
        Vector y_pred = yp * wm;
        Matrix S = sys.obs_cov;
        Matrix Pxy = Matrix::Zero(n, p);
        for (int i = 0; i < n_sigma; ++i) {
            Vector dy = yp.col(i) - y_pred;
            Vector dx = sp2.col(i) - x_pred;
            S.noalias() += wc[i] * (dy * dy.transpose());
            Pxy.noalias() += wc[i] * (dx * dy.transpose());
        }
        Vector innovation = observations.col(k) - y_pred;
        Matrix gain = detail::solve_spd(S, Matrix(Pxy.transpose()), "ukf").transpose();
        x = x_pred + gain * innovation;
        P = symmetrized(P_pred - gain * S * gain.transpose());
        detail::check_finite(x, "ukf", k + 1);
        trace.estimates.col(k + 1) = x;
        trace.covariances.push_back(P);
        trace.innovations.col(k) = innovation;
    }
    trace.wall_time = timer.elapsed();
    return trace;
}

/// Bootstrap particle filter: propagate through the step sampler, weight by
/// the Gaussian observation likelihood, systematic resampling every step.
inline FilterTrace particle_filter(const ObservedSystem& sys, const GaussianPrior& prior,
                                   const Matrix& observations, int n_particles, Rng& rng) {
    require(n_particles >= 2, "particle_filter: need at least 2 particles");
    require(sys.has_deterministic_parts(),
            "particle_filter: system must expose the observation model");
    const int n = sys.state_dim, p = sys.obs_dim;
    const int T = static_cast<int>(observations.cols());

    detail::StopWatch timer;
    FilterTrace trace;
    trace.estimates.resize(n, T + 1);
    trace.innovations.resize(p, T);
    trace.estimates.col(0) = prior.mean;
    trace.covariances.push_back(symmetrized(prior.cov));

    Matrix particles(n, n_particles);
    for (int i = 0; i < n_particles; ++i)
        particles.col(i) = sample_gaussian(prior.mean, prior.cov, rng);

    // Gaussian log-likelihood pieces for y ~ N(g(x), R).
    const Matrix L = safe_cholesky(sys.obs_cov, "particle filter observation covariance");
    const auto solver = L.triangularView<Eigen::Lower>();

    Vector log_w(n_particles), weights(n_particles);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (int k = 0; k < T; ++k) {
        Matrix predicted_obs(p, n_particles);
        for (int i = 0; i < n_particles; ++i) {
            particles.col(i) = sys.step_sampler(particles.col(i), rng);
            predicted_obs.col(i) = sys.obs_det(particles.col(i));
        }
        trace.innovations.col(k) =
            observations.col(k) - predicted_obs.rowwise().mean();

        for (int i = 0; i < n_particles; ++i) {
            Vector r = solver.solve(observations.col(k) - predicted_obs.col(i));
            log_w[i] = -0.5 * r.squaredNorm();
        }
        const double max_log = log_w.maxCoeff();
        if (!std::isfinite(max_log))
            throw NumericalError("particle_filter: likelihood underflow at step " +
                                 std::to_string(k + 1));
        weights = (log_w.array() - max_log).exp();
        const double total = weights.sum();
        if (!(total > 0.0) || !std::isfinite(total))
            throw NumericalError("particle_filter: all weights vanished at step " +
                                 std::to_string(k + 1));
        weights /= total;

        Vector mean = particles * weights;
        Matrix cov = Matrix::Zero(n, n);
        for (int i = 0; i < n_particles; ++i) {
            Vector d = particles.col(i) - mean;
            cov.noalias() += weights[i] * (d * d.transpose());
        }
        detail::check_finite(mean, "particle_filter", k + 1);
        trace.estimates.col(k + 1) = mean;
        trace.covariances.push_back(symmetrized(cov));

        // Systematic resampling.
        Matrix resampled(n, n_particles);
        const double u0 = unif(rng) / n_particles;
        double cumulative = weights[0];
        int idx = 0;
        for (int i = 0; i < n_particles; ++i) {
            const double target = u0 + static_cast<double>(i) / n_particles;
            while (cumulative < target && idx + 1 < n_particles) cumulative += weights[++idx];
            resampled.col(i) = particles.col(idx);
        }
        particles = resampled;
    }
    trace.wall_time = timer.elapsed();
    return trace;
}

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

enum class CiSpread {
    Diagonal,        // sigma_i = sqrt(P_ii)
    SingularValues,  // singular values reassigned to their dominant coordinate
};

struct ConfidenceBands {
    Matrix lower;  // n x (T+1)
    Matrix upper;  // n x (T+1)
};

namespace detail {

inline Vector coordinate_spread(const Matrix& P, CiSpread mode) {
    if (mode == CiSpread::Diagonal) return P.diagonal().cwiseMax(0.0).cwiseSqrt();
    Eigen::JacobiSVD<Matrix> svd(symmetrized(P), Eigen::ComputeFullU);
    const Vector s = svd.singularValues();
    const Matrix& Umat = svd.matrixU();
    Vector sigma = Vector::Zero(P.rows());
    std::vector<bool> taken(static_cast<std::size_t>(P.rows()), false);
    // Assign each singular value (largest first) to the coordinate its
    // singular vector loads most heavily on.
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        Eigen::Index best = -1;
        double best_load = -1.0;
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double load = std::abs(Umat(i, j));
            if (load > best_load) {
                best_load = load;
                best = i;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        sigma[best] = std::sqrt(std::max(s[j], 0.0));
    }
    return sigma;
}

}  // namespace detail

/// Per-step per-coordinate intervals estimate_i +- t * sigma_i using a
/// Student-t quantile with `dof` degrees of freedom.
inline ConfidenceBands confidence_intervals(const FilterTrace& trace, double level, int dof = 99,
                                            CiSpread mode = CiSpread::Diagonal) {
    require(level > 0.0 && level < 1.0, "confidence_intervals: level must be in (0, 1)");
    require(dof >= 1, "confidence_intervals: dof must be >= 1");
    boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    const double z = boost::math::quantile(dist, 0.5 + level / 2.0);

    ConfidenceBands bands;
    bands.lower.resizeLike(trace.estimates);
    bands.upper.resizeLike(trace.estimates);
    for (std::size_t k = 0; k < trace.covariances.size(); ++k) {
        const Vector sigma = detail::coordinate_spread(trace.covariances[k], mode);
        const Eigen::Index col = static_cast<Eigen::Index>(k);
        bands.lower.col(col) = trace.estimates.col(col) - z * sigma;
        bands.upper.col(col) = trace.estimates.col(col) + z * sigma;
    }
    return bands;
}

/// Trajectory discrepancy, root mean square over time steps:
/// sqrt((1/T) sum_k ||a_k - b_k||^2) with one column per step.
inline double l2_trajectory_error(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "l2_trajectory_error: shape mismatch");
    require(a.cols() > 0, "l2_trajectory_error: empty trajectories");
    return (a - b).norm() / std::sqrt(static_cast<double>(a.cols()));
}

}  // namespace kkf

#endif
