#ifndef KKF_PARAMEST_HPP
#define KKF_PARAMEST_HPP

#include <algorithm>
#include <future>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "kkf/common.hpp"
#include "kkf/filters.hpp"
#include "kkf/kedmd.hpp"
#include "kkf/systems.hpp"

namespace kkf {

/// Parameter estimates from one iterated-filtering chain. Row 0 of
/// `param_trace` is the prior mean; one row per iteration follows.
struct ChainResult {
    Matrix param_trace;  // (iters+1) x n_p
    int warmup = 0;
    std::uint64_t chain_seed = 0;
};

/// Iterated-filtering estimation: repeatedly run the Koopman Kalman filter on
/// the parameter-augmented system, feeding each iteration's final parameter
/// estimate and parameter-block covariance into the next iteration's prior.
inline ChainResult param_estim(const ObservedSystem& aug_system, const KoopmanModel& model,
                               const GaussianPrior& x0_prior, const GaussianPrior& p0_prior,
                               const Matrix& observations, int iters, int n_samples, Rng& rng,
                               int warmup = -1) {
    require(iters >= 1, "param_estim: iters must be >= 1");
    const int np = static_cast<int>(p0_prior.mean.size());
    const int n = aug_system.state_dim - np;
    require(n >= 1 && x0_prior.mean.size() == n,
            "param_estim: prior dimensions inconsistent with the augmented system");

    ChainResult result;
    result.warmup = warmup >= 0 ? warmup : iters / 2;
    result.param_trace.resize(iters + 1, np);

    Vector p_cur = p0_prior.mean;
    Matrix Pp_cur = symmetrized(p0_prior.cov);
    result.param_trace.row(0) = p_cur.transpose();

    GaussianPrior prior;
    prior.mean.resize(n + np);
    prior.cov = Matrix::Zero(n + np, n + np);
    prior.cov.topLeftCorner(n, n) = symmetrized(x0_prior.cov);

    for (int it = 1; it <= iters; ++it) {
        prior.mean << x0_prior.mean, p_cur;
        prior.cov.bottomRightCorner(np, np) = Pp_cur;
        try {
            FilterTrace trace = kkf(aug_system, model, prior, observations, n_samples, rng);
            p_cur = trace.estimates.rightCols(1).col(0).tail(np);
            Pp_cur = trace.covariances.back().bottomRightCorner(np, np);
        } catch (const NumericalError& e) {
            throw NumericalError("param_estim iteration " + std::to_string(it) + ": " +
                                 e.what());
        }
        result.param_trace.row(it) = p_cur.transpose();
    }
    if (!result.param_trace.allFinite())
        throw NumericalError("param_estim: non-finite parameter trace");
    return result;
}

/// Independent chains with seeds derived deterministically from `base_seed`.
/// Results are a pure function of the inputs regardless of scheduling.
inline std::vector<ChainResult> run_chains(int chain_count, const ObservedSystem& aug_system,
                                           const KoopmanModel& model,
                                           const GaussianPrior& x0_prior,
                                           const GaussianPrior& p0_prior,
                                           const Matrix& observations, int iters, int n_samples,
                                           std::uint64_t base_seed, int warmup = -1,
                                           int workers = 0) {
    require(chain_count >= 1, "run_chains: chain_count must be >= 1");
    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());

    std::vector<ChainResult> results(static_cast<std::size_t>(chain_count));
    std::vector<std::string> failures;
    auto run_one = [&](int c) {
        const std::uint64_t seed = split_seed(base_seed, static_cast<std::uint64_t>(c));
        Rng rng = make_rng(seed);
        ChainResult r =
            param_estim(aug_system, model, x0_prior, p0_prior, observations, iters, n_samples,
                        rng, warmup);
        r.chain_seed = seed;
        return r;
    };

    for (int start = 0; start < chain_count; start += workers) {
        const int end = std::min(chain_count, start + workers);
        std::vector<std::future<ChainResult>> batch;
        for (int c = start; c < end; ++c)
            batch.push_back(std::async(std::launch::async, run_one, c));
        for (int c = start; c < end; ++c) {
            try {
                results[static_cast<std::size_t>(c)] = batch[static_cast<std::size_t>(c - start)].get();
            } catch (const std::exception& e) {
                failures.push_back("chain " + std::to_string(c) + ": " + e.what());
            }
        }
    }
    if (!failures.empty()) {
        std::string msg = "run_chains: " + std::to_string(failures.size()) + " chain(s) failed";
        for (const auto& f : failures) msg += "; " + f;
        throw NumericalError(msg);
    }
    return results;
}

struct ParamDensity {
    Vector grid;
    Vector values;  // trapezoid-normalized to integrate to 1 on the grid
};

struct EstimationSummary {
    Vector mean;
    Vector ci_lower;
    Vector ci_upper;
    std::vector<ParamDensity> densities;
    std::vector<Matrix> chain_traces;
    int warmup = 0;
    double level = 0.95;
};

/// Post-warm-up samples concatenated across chains, one row per sample.
inline Matrix pooled_samples(const std::vector<ChainResult>& chains, int warmup) {
    require(!chains.empty(), "pooled_samples: no chains");
    const Eigen::Index np = chains.front().param_trace.cols();
    Eigen::Index total = 0;
    for (const auto& c : chains) {
        const Eigen::Index iters = c.param_trace.rows() - 1;
        require(warmup < iters, "summarize: warmup must be smaller than the iteration count");
        total += iters - warmup;
    }
    Matrix pooled(total, np);
    Eigen::Index at = 0;
    for (const auto& c : chains) {
        const Eigen::Index keep = c.param_trace.rows() - 1 - warmup;
        pooled.middleRows(at, keep) = c.param_trace.bottomRows(keep);
        at += keep;
    }
    return pooled;
}

namespace detail {

inline ParamDensity kde_density(const Vector& samples) {
    ParamDensity d;
    const Eigen::Index m = samples.size();
    const double mean = samples.mean();
    const double sd = m > 1 ? std::sqrt((samples.array() - mean).square().sum() / (m - 1)) : 0.0;

    if (sd <= 0.0) {
        // Degenerate sample: a unit-mass spike around the single value.
        const double eps = std::max(1e-9, 1e-9 * std::abs(mean));
        d.grid = Vector{{mean - eps, mean, mean + eps}};
        d.values = Vector{{0.0, 1.0 / eps, 0.0}};
        return d;
    }

    const double bandwidth = 0.9 * sd * std::pow(static_cast<double>(m), -0.2);  // Silverman
    const int grid_size = 256;
    const double lo = samples.minCoeff() - 3.0 * bandwidth;
    const double hi = samples.maxCoeff() + 3.0 * bandwidth;
    d.grid = Vector::LinSpaced(grid_size, lo, hi);
    d.values.resize(grid_size);
    const double norm = 1.0 / (static_cast<double>(m) * bandwidth * std::sqrt(2.0 * M_PI));
    for (int g = 0; g < grid_size; ++g) {
        const double u = d.grid[g];
        d.values[g] = norm * ((samples.array() - u).square() /
                              (-2.0 * bandwidth * bandwidth)).exp().sum();
    }
    // Trapezoid renormalization so the discrete density integrates to 1.
    double integral = 0.0;
    for (int g = 0; g + 1 < grid_size; ++g)
        integral += 0.5 * (d.values[g] + d.values[g + 1]) * (d.grid[g + 1] - d.grid[g]);
    if (integral > 0.0) d.values /= integral;
    return d;
}

}  // namespace detail

/// Pool post-warm-up samples across chains; normal-approximation CI and a
/// kernel-density estimate per parameter.
inline EstimationSummary summarize(const std::vector<ChainResult>& chains, int warmup,
                                   double level) {
    require(level > 0.0 && level < 1.0, "summarize: level must be in (0, 1)");
    const Matrix pooled = pooled_samples(chains, warmup);
    const Eigen::Index np = pooled.cols(), m = pooled.rows();

    EstimationSummary s;
    s.warmup = warmup;
    s.level = level;
    s.mean.resize(np);
    s.ci_lower.resize(np);
    s.ci_upper.resize(np);
    boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 + level / 2.0);
    for (Eigen::Index j = 0; j < np; ++j) {
        const Vector col = pooled.col(j);
        s.mean[j] = col.mean();
        const double sd =
            m > 1 ? std::sqrt((col.array() - s.mean[j]).square().sum() / (m - 1)) : 0.0;
        s.ci_lower[j] = s.mean[j] - z * sd;
        s.ci_upper[j] = s.mean[j] + z * sd;
        s.densities.push_back(detail::kde_density(col));
    }
    for (const auto& c : chains) s.chain_traces.push_back(c.param_trace);
    return s;
}

struct PushforwardResult {
    std::vector<Matrix> trajectories;  // state trajectories, n x (T+1)
    Vector errors;                     // per-trajectory L2 error vs truth
    double mean_error = 0.0;
};

/// Propagate the pooled parameter distribution through the dynamics: sample a
/// parameter row per draw, iterate the deterministic map, score vs truth.
inline PushforwardResult pushforward_trajectories(const ParametricFamily& family,
                                                  const Matrix& samples,
                                                  const std::vector<int>& param_indices,
                                                  const Vector& x0, int T, int draws,
                                                  const Matrix& truth, Rng& rng) {
    require(draws >= 1, "pushforward_trajectories: draws must be >= 1");
    require(samples.rows() >= 1, "pushforward_trajectories: empty sample pool");
    require(static_cast<Eigen::Index>(param_indices.size()) == samples.cols(),
            "pushforward_trajectories: index/sample column mismatch");

    PushforwardResult out;
    out.errors.resize(draws);
    std::uniform_int_distribution<Eigen::Index> pick(0, samples.rows() - 1);
    for (int d = 0; d < draws; ++d) {
        Vector params = family.nominal_params;
        const Eigen::Index row = pick(rng);
        for (std::size_t i = 0; i < param_indices.size(); ++i)
            params[param_indices[i]] = samples(row, static_cast<Eigen::Index>(i));
        // Deterministic iterates: the randomness of the pushforward comes
        // from the parameter draw alone.
        Matrix states(x0.size(), T + 1);
        states.col(0) = x0;
        for (int k = 0; k < T; ++k) states.col(k + 1) = family.det_step(states.col(k), params);
        if (!states.allFinite())
            throw NumericalError("pushforward_trajectories: non-finite trajectory");
        out.errors[d] = (states - truth).norm();
        out.trajectories.push_back(std::move(states));
    }
    out.mean_error = out.errors.mean();
    return out;
}

}  // namespace kkf

#endif
