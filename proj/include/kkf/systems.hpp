#ifndef KKF_SYSTEMS_HPP
#define KKF_SYSTEMS_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kkf/common.hpp"

namespace kkf {

/// Stochastic observed dynamical system x+ = f(x, w), y = g(x, v).
/// Samplers draw the noise internally; the conditional-mean hooks return
/// E[f(x,.)] / E[g(x,.)] estimates (exact for the additive-noise model zoo).
/// Systems are immutable descriptors; each simulation owns its RNG stream.
struct ObservedSystem {
    int state_dim = 0;
    int obs_dim = 0;

    std::function<Vector(const Vector&, Rng&)> step_sampler;
    std::function<Vector(const Vector&, Rng&)> obs_sampler;
    std::function<Vector(const Vector&, int, Rng&)> step_mean;
    std::function<Vector(const Vector&, int, Rng&)> obs_mean;

    // Deterministic parts and noise covariances, available for the
    // additive-noise model zoo. EKF/UKF/PF require them.
    std::function<Vector(const Vector&)> step_det;
    std::function<Vector(const Vector&)> obs_det;
    Matrix process_cov;
    Matrix obs_cov;

    bool has_deterministic_parts() const {
        return static_cast<bool>(step_det) && static_cast<bool>(obs_det) &&
               process_cov.size() > 0 && obs_cov.size() > 0;
    }
};

/// Monte-Carlo conditional mean from a sampler; O(n_samples^{-1/2}) error.
inline Vector monte_carlo_mean(const std::function<Vector(const Vector&, Rng&)>& sampler,
                               const Vector& x, int n_samples, Rng& rng) {
    require(n_samples >= 1, "monte_carlo_mean: n_samples must be >= 1");
    Vector acc = sampler(x, rng);
    for (int i = 1; i < n_samples; ++i) acc += sampler(x, rng);
    return acc / static_cast<double>(n_samples);
}

/// Assemble an ObservedSystem with additive Gaussian noise around
/// deterministic maps. Conditional means are exact.
inline ObservedSystem make_additive_system(int n, int p,
                                           std::function<Vector(const Vector&)> f,
                                           std::function<Vector(const Vector&)> g,
                                           Matrix Q, Matrix R) {
    require(Q.rows() == n && Q.cols() == n, "make_additive_system: Q must be n x n");
    require(R.rows() == p && R.cols() == p, "make_additive_system: R must be p x p");
    ObservedSystem sys;
    sys.state_dim = n;
    sys.obs_dim = p;
    sys.step_det = f;
    sys.obs_det = g;
    sys.process_cov = std::move(Q);
    sys.obs_cov = std::move(R);
    sys.step_sampler = [f = sys.step_det, Q = sys.process_cov](const Vector& x, Rng& rng) {
        return sample_gaussian(f(x), Q, rng);
    };
    sys.obs_sampler = [g = sys.obs_det, R = sys.obs_cov](const Vector& x, Rng& rng) {
        return sample_gaussian(g(x), R, rng);
    };
    sys.step_mean = [f = sys.step_det](const Vector& x, int, Rng&) { return f(x); };
    sys.obs_mean = [g = sys.obs_det](const Vector& x, int, Rng&) { return g(x); };
    return sys;
}

/// Linear Gaussian system x+ = A x + w, y = C x + v.
struct LinearGaussianSystem : ObservedSystem {
    Matrix A;
    Matrix C;

    LinearGaussianSystem() = default;
    LinearGaussianSystem(Matrix A_, Matrix C_, Matrix Q_, Matrix R_) : A(std::move(A_)), C(std::move(C_)) {
        const int n = static_cast<int>(A.rows());
        const int p = static_cast<int>(C.rows());
        require(A.cols() == n, "LinearGaussianSystem: A must be square");
        require(C.cols() == n, "LinearGaussianSystem: C column count must match state dim");
        Matrix Ac = A, Cc = C;
        static_cast<ObservedSystem&>(*this) = make_additive_system(
            n, p, [Ac](const Vector& x) { return Vector(Ac * x); },
            [Cc](const Vector& x) { return Vector(Cc * x); }, std::move(Q_), std::move(R_));
    }
};

/// Random 3-state / 2-observation linear system: A entries i.i.d. centered
/// normal (variance 0.5 by default), C selects the first two coordinates,
/// Q = 0.01 I3, R = 0.01 I2. Draws whose spectral radius exceeds
/// `max_spectral_radius` are redrawn to avoid rapid exponential growth.
inline LinearGaussianSystem make_random_linear(Rng& rng, int n = 3, int p = 2,
                                               double entry_variance = 0.5,
                                               double max_spectral_radius = 1.2) {
    std::normal_distribution<double> dist(0.0, std::sqrt(entry_variance));
    Matrix A(n, n);
    for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = dist(rng);
        const double radius = A.eigenvalues().cwiseAbs().maxCoeff();
        if (radius <= max_spectral_radius) break;
        if (attempt >= 1000)
            throw NumericalError("make_random_linear: no stable draw after 1000 attempts");
    }
    Matrix C = Matrix::Zero(p, n);
    for (int i = 0; i < p && i < n; ++i) C(i, i) = 1.0;
    return LinearGaussianSystem(A, C, 0.01 * Matrix::Identity(n, n),
                                0.01 * Matrix::Identity(p, p));
}

// ---------------------------------------------------------------------------
// Epidemic model zoo
// ---------------------------------------------------------------------------

enum class EpidemicModel { SIRp, SIRS, SEIRS };

inline std::string to_string(EpidemicModel m) {
    switch (m) {
        case EpidemicModel::SIRp: return "sir";
        case EpidemicModel::SIRS: return "sirs";
        case EpidemicModel::SEIRS: return "seirs";
    }
    return "unknown";
}

inline EpidemicModel epidemic_model_from_string(const std::string& s) {
    if (s == "sir" || s == "sir_p" || s == "sirp") return EpidemicModel::SIRp;
    if (s == "sirs") return EpidemicModel::SIRS;
    if (s == "seirs") return EpidemicModel::SEIRS;
    throw ConfigError("unknown epidemic model: " + s);
}

inline int epidemic_state_dim(EpidemicModel m) { return m == EpidemicModel::SEIRS ? 4 : 3; }

/// Free parameters estimated per model: SIR_p -> (beta, gamma),
/// SIRS -> (alpha, beta, gamma), SEIRS -> (alpha, beta, gamma, delta).
inline int epidemic_param_dim(EpidemicModel m) {
    switch (m) {
        case EpidemicModel::SIRp: return 2;
        case EpidemicModel::SIRS: return 3;
        case EpidemicModel::SEIRS: return 4;
    }
    return 0;
}

struct EpidemicParams {
    double beta = 1.3;
    double gamma = 0.4;
    double alpha = 0.2;
    double delta = 0.5;
    double p_exponent = 1.0;
};

inline Vector epidemic_param_vector(EpidemicModel m, const EpidemicParams& p) {
    switch (m) {
        case EpidemicModel::SIRp: return Vector{{p.beta, p.gamma}};
        case EpidemicModel::SIRS: return Vector{{p.alpha, p.beta, p.gamma}};
        case EpidemicModel::SEIRS: return Vector{{p.alpha, p.beta, p.gamma, p.delta}};
    }
    return {};
}

inline EpidemicParams epidemic_params_from_vector(EpidemicModel m, const Vector& v,
                                                  const EpidemicParams& base = {}) {
    require(v.size() == epidemic_param_dim(m), "epidemic params: wrong vector length");
    EpidemicParams p = base;
    switch (m) {
        case EpidemicModel::SIRp:
            p.beta = v[0];
            p.gamma = v[1];
            break;
        case EpidemicModel::SIRS:
            p.alpha = v[0];
            p.beta = v[1];
            p.gamma = v[2];
            break;
        case EpidemicModel::SEIRS:
            p.alpha = v[0];
            p.beta = v[1];
            p.gamma = v[2];
            p.delta = v[3];
            break;
    }
    return p;
}

/// Deterministic one-step update of the epidemic maps. The flow terms cancel
/// algebraically, so the population total is conserved exactly.
inline Vector epidemic_det_step(EpidemicModel m, const EpidemicParams& prm, const Vector& x) {
    Vector out(x.size());
    switch (m) {
        case EpidemicModel::SIRp: {
            require(x.size() == 3, "SIR_p state must be 3-dimensional");
            const double S = x[0], I = x[1], R = x[2];
            const double infect = prm.beta * S * std::pow(I, prm.p_exponent);
            const double recover = prm.gamma * I;
            out << S - infect, I + infect - recover, R + recover;
            break;
        }
        case EpidemicModel::SIRS: {
            require(x.size() == 3, "SIRS state must be 3-dimensional");
            const double S = x[0], I = x[1], R = x[2];
            const double infect = prm.beta * S * I;
            const double recover = prm.gamma * I;
            const double relapse = prm.alpha * R;
            out << S - infect + relapse, I + infect - recover, R + recover - relapse;
            break;
        }
        case EpidemicModel::SEIRS: {
            require(x.size() == 4, "SEIRS state must be 4-dimensional");
            const double S = x[0], E = x[1], I = x[2], R = x[3];
            const double infect = prm.beta * S * I;
            const double incubate = prm.delta * E;
            const double recover = prm.gamma * I;
            const double relapse = prm.alpha * R;
            out << S - infect + relapse, E + infect - incubate, I + incubate - recover,
                R + recover - relapse;
            break;
        }
    }
    return out;
}

/// Parameterized family of additive-noise systems: the deterministic step
/// depends on a parameter vector, so members can be instantiated at any
/// parameter value or augmented with parameter random-walk states.
struct ParametricFamily {
    int state_dim = 0;
    int obs_dim = 0;
    int param_dim = 0;
    std::function<Vector(const Vector& x, const Vector& params)> det_step;
    std::function<Vector(const Vector& x)> det_obs;
    Matrix process_cov;
    Matrix obs_cov;
    Vector nominal_params;

    ObservedSystem fixed(const Vector& params) const {
        require(params.size() == param_dim, "ParametricFamily::fixed: wrong parameter count");
        auto f = det_step;
        Vector p = params;
        return make_additive_system(
            state_dim, obs_dim, [f, p](const Vector& x) { return f(x, p); }, det_obs,
            process_cov, obs_cov);
    }
    ObservedSystem fixed() const { return fixed(nominal_params); }
};

/// Observation map selecting a subset of coordinates.
inline std::function<Vector(const Vector&)> coordinate_selector(std::vector<int> coords) {
    return [coords = std::move(coords)](const Vector& x) {
        Vector y(static_cast<Eigen::Index>(coords.size()));
        for (std::size_t i = 0; i < coords.size(); ++i) y[static_cast<Eigen::Index>(i)] = x[coords[i]];
        return y;
    };
}

/// Epidemic family with Gaussian process/observation noise; `observed` lists
/// the state coordinates visible to the filter (0-based).
inline ParametricFamily make_epidemic_family(EpidemicModel m, const EpidemicParams& prm,
                                             const Matrix& process_cov, const Matrix& obs_cov,
                                             const std::vector<int>& observed,
                                             bool clamp = false) {
    const int n = epidemic_state_dim(m);
    for (int c : observed)
        require(c >= 0 && c < n, "observed coordinate out of range");
    ParametricFamily fam;
    fam.state_dim = n;
    fam.obs_dim = static_cast<int>(observed.size());
    fam.param_dim = epidemic_param_dim(m);
    fam.nominal_params = epidemic_param_vector(m, prm);
    fam.det_step = [m, prm, clamp](const Vector& x, const Vector& pv) {
        Vector out = epidemic_det_step(m, epidemic_params_from_vector(m, pv, prm), x);
        if (clamp) out = out.cwiseMax(0.0).cwiseMin(1.0);
        return out;
    };
    fam.det_obs = coordinate_selector(observed);
    fam.process_cov = process_cov;
    fam.obs_cov = obs_cov;
    require(fam.process_cov.rows() == n && fam.process_cov.cols() == n,
            "epidemic process noise covariance must be n x n");
    require(fam.obs_cov.rows() == fam.obs_dim && fam.obs_cov.cols() == fam.obs_dim,
            "epidemic observation noise covariance must match observed coordinate count");
    return fam;
}

inline ObservedSystem make_epidemic(EpidemicModel m, const EpidemicParams& prm,
                                    const Matrix& process_cov, const Matrix& obs_cov,
                                    const std::vector<int>& observed, bool clamp = false) {
    return make_epidemic_family(m, prm, process_cov, obs_cov, observed, clamp).fixed();
}

/// State augmentation for parameter estimation: the selected parameters
/// become extra states following a random walk x_{k+1} = x_k + noise, the
/// dynamics read them from the appended coordinates, and the observation
/// function is unchanged.
inline ObservedSystem augment_with_parameters(const ParametricFamily& fam,
                                              const std::vector<int>& param_indices,
                                              const Matrix& param_noise_cov) {
    const int np = static_cast<int>(param_indices.size());
    require(np >= 1, "augment_with_parameters: need at least one parameter index");
    for (int idx : param_indices)
        require(idx >= 0 && idx < fam.param_dim, "augment_with_parameters: index out of range");
    require(param_noise_cov.rows() == np && param_noise_cov.cols() == np,
            "augment_with_parameters: param noise covariance must be np x np");

    const int n = fam.state_dim;
    auto det_step = fam.det_step;
    Vector nominal = fam.nominal_params;
    auto full_params = [nominal, param_indices](const Vector& tail) {
        Vector p = nominal;
        for (std::size_t i = 0; i < param_indices.size(); ++i)
            p[param_indices[i]] = tail[static_cast<Eigen::Index>(i)];
        return p;
    };
    auto f_aug = [det_step, full_params, n, np](const Vector& z) {
        Vector out(n + np);
        out.head(n) = det_step(z.head(n), full_params(z.tail(np)));
        out.tail(np) = z.tail(np);
        return out;
    };
    auto obs = fam.det_obs;
    auto g_aug = [obs, n](const Vector& z) { return obs(z.head(n)); };

    Matrix Q = Matrix::Zero(n + np, n + np);
    Q.topLeftCorner(n, n) = fam.process_cov;
    Q.bottomRightCorner(np, np) = param_noise_cov;
    return make_additive_system(n + np, fam.obs_dim, f_aug, g_aug, Q, fam.obs_cov);
}

/// Simulate T steps: states has T+1 columns starting at x0, observations has
/// one column per post-step state.
inline std::pair<Matrix, Matrix> simulate(const ObservedSystem& sys, const Vector& x0, int T,
                                          Rng& rng) {
    require(T >= 1, "simulate: T must be >= 1");
    require(x0.size() == sys.state_dim, "simulate: x0 dimension mismatch");
    Matrix states(sys.state_dim, T + 1);
    Matrix obs(sys.obs_dim, T);
    states.col(0) = x0;
    for (int k = 0; k < T; ++k) {
        states.col(k + 1) = sys.step_sampler(states.col(k), rng);
        if (!states.col(k + 1).allFinite())
            throw NumericalError("simulate: non-finite state at step " + std::to_string(k + 1));
        obs.col(k) = sys.obs_sampler(states.col(k + 1), rng);
        if (!obs.col(k).allFinite())
            throw NumericalError("simulate: non-finite observation at step " +
                                 std::to_string(k + 1));
    }
    return {states, obs};
}

}  // namespace kkf

#endif
