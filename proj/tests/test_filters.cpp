#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "kkf/filters.hpp"

using namespace kkf;

namespace {

LinearGaussianSystem scalar_system() {
    return LinearGaussianSystem(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, 1.0),
                                Matrix::Constant(1, 1, 0.04), Matrix::Constant(1, 1, 0.09));
}

void check_covariances(const FilterTrace& trace) {
    for (const Matrix& P : trace.covariances) {
        CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + P.cwiseAbs().maxCoeff()));
        Eigen::SelfAdjointEigenSolver<Matrix> eig(P);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * (1.0 + P.trace()));
    }
}

}  // namespace

TEST_CASE("kalman filter one-step hand example") {
    // Static state, prior N(0, 1), no process noise, unit observation noise,
    // observation 1 -> posterior mean 1/2, variance 1/2.
    LinearGaussianSystem sys(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                             Matrix::Zero(1, 1), Matrix::Identity(1, 1));
    GaussianPrior prior{Vector::Zero(1), Matrix::Identity(1, 1)};
    Matrix obs(1, 1);
    obs << 1.0;
    const FilterTrace trace = kalman_filter(sys, prior, obs);
    CHECK(std::abs(trace.estimates(0, 1) - 0.5) <= 1e-12);
    CHECK(std::abs(trace.covariances[1](0, 0) - 0.5) <= 1e-12);
    CHECK(std::abs(trace.innovations(0, 0) - 1.0) <= 1e-12);
}

TEST_CASE("EKF and UKF reduce to the Kalman filter on linear systems") {
    const LinearGaussianSystem sys = scalar_system();
    GaussianPrior prior{Vector{{0.5}}, 0.2 * Matrix::Identity(1, 1)};
    Rng rng = make_rng(42);
    auto [states, obs] = simulate(sys, Vector{{1.0}}, 25, rng);
    (void)states;

    const FilterTrace kf = kalman_filter(sys, prior, obs);
    const FilterTrace e = ekf(sys, prior, obs);
    const FilterTrace u = ukf(sys, prior, obs);
    CHECK((e.estimates - kf.estimates).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((u.estimates - kf.estimates).cwiseAbs().maxCoeff() <= 1e-6);
    for (std::size_t k = 0; k < kf.covariances.size(); ++k) {
        CHECK((e.covariances[k] - kf.covariances[k]).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((u.covariances[k] - kf.covariances[k]).cwiseAbs().maxCoeff() <= 1e-6);
    }
    check_covariances(kf);
    check_covariances(e);
    check_covariances(u);
}

TEST_CASE("particle filter tracks the Kalman posterior") {
    const LinearGaussianSystem sys = scalar_system();
    GaussianPrior prior{Vector{{0.5}}, 0.2 * Matrix::Identity(1, 1)};
    Rng rng = make_rng(7);
    auto [states, obs] = simulate(sys, Vector{{1.0}}, 20, rng);
    (void)states;

    const FilterTrace kf = kalman_filter(sys, prior, obs);
    Rng pf_rng = make_rng(123);
    const FilterTrace pf = particle_filter(sys, prior, obs, 10000, pf_rng);
    for (int k = 1; k <= kf.horizon(); ++k) {
        const double sd = std::sqrt(kf.covariances[static_cast<std::size_t>(k)](0, 0));
        CHECK(std::abs(pf.estimates(0, k) - kf.estimates(0, k)) <= 3.0 * sd);
    }
    check_covariances(pf);
}

TEST_CASE("KKF approximates the Kalman filter on a seeded linear system") {
    Rng rng = make_rng(42);
    const LinearGaussianSystem sys = make_random_linear(rng);
    GaussianPrior prior{Vector{{0.1, 0.2, 0.3}}, 0.1 * Matrix::Identity(3, 3)};
    auto [states, obs] = simulate(sys, Vector{{1.0, 1.5, 2.0}}, 20, rng);
    (void)states;
    const FilterTrace kf = kalman_filter(sys, prior, obs);

    const Kernel kernel{KernelFamily::Matern12, 1e3, 1.0};
    const int N = 200;
    const KoopmanModel model =
        fit(sys, uniform_box_sampler(Vector::Constant(3, -1000.0), Vector::Constant(3, 1000.0)),
            kernel, N, rng);
    const FilterTrace trace = kkf::kkf(sys, model, prior, obs, 100, rng);

    CHECK(trace.estimates.cols() == 21);
    CHECK(trace.feature_state.rows() == N);
    CHECK(trace.feature_cov.size() == 21);
    CHECK(l2_trajectory_error(trace.estimates, kf.estimates) <=
          8000.0 / std::sqrt(static_cast<double>(N)));
    check_covariances(trace);
}

TEST_CASE("KKF runs are deterministic in the seed") {
    Rng sys_rng = make_rng(1);
    const LinearGaussianSystem sys = make_random_linear(sys_rng);
    GaussianPrior prior{Vector::Zero(3), 0.1 * Matrix::Identity(3, 3)};
    auto [states, obs] = simulate(sys, Vector{{1.0, 1.5, 2.0}}, 10, sys_rng);
    (void)states;
    const Kernel kernel{KernelFamily::Matern12, 1e3, 1.0};

    auto run = [&] {
        Rng rng = make_rng(99);
        const KoopmanModel model = fit(
            sys, uniform_box_sampler(Vector::Constant(3, -1000.0), Vector::Constant(3, 1000.0)),
            kernel, 80, rng);
        return kkf::kkf(sys, model, prior, obs, 50, rng);
    };
    const FilterTrace a = run(), b = run();
    CHECK((a.estimates - b.estimates).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.feature_state - b.feature_state).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frozen observation covariance reuses the first estimate") {
    Rng rng = make_rng(3);
    const LinearGaussianSystem sys = make_random_linear(rng);
    GaussianPrior prior{Vector::Zero(3), 0.1 * Matrix::Identity(3, 3)};
    auto [states, obs] = simulate(sys, Vector{{1.0, 1.5, 2.0}}, 8, rng);
    (void)states;
    const Kernel kernel{KernelFamily::Matern12, 1e3, 1.0};
    const KoopmanModel model = fit(
        sys, uniform_box_sampler(Vector::Constant(3, -1000.0), Vector::Constant(3, 1000.0)),
        kernel, 60, rng);
    KkfOptions opt;
    opt.freeze_observation_cov = true;
    const FilterTrace trace = kkf::kkf(sys, model, prior, obs, 50, rng, opt);
    CHECK(trace.estimates.allFinite());
}

TEST_CASE("filters validate dimensions") {
    const LinearGaussianSystem sys = scalar_system();
    GaussianPrior bad{Vector::Zero(2), Matrix::Identity(2, 2)};
    Matrix obs = Matrix::Zero(1, 3);
    CHECK_THROWS_AS(kalman_filter(sys, bad, obs), ConfigError);
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(particle_filter(sys, bad, obs, 1, rng), ConfigError);
}

TEST_CASE("confidence intervals bracket the estimates") {
    const LinearGaussianSystem sys = scalar_system();
    GaussianPrior prior{Vector{{0.5}}, 0.2 * Matrix::Identity(1, 1)};
    Rng rng = make_rng(11);
    auto [states, obs] = simulate(sys, Vector{{1.0}}, 10, rng);
    (void)states;
    const FilterTrace trace = kalman_filter(sys, prior, obs);
    const ConfidenceBands bands = confidence_intervals(trace, 0.95);
    CHECK(((trace.estimates - bands.lower).array() >= 0.0).all());
    CHECK(((bands.upper - trace.estimates).array() >= 0.0).all());

    // Scalar hand check: half-width = t-quantile times the posterior sd.
    boost::math::students_t_distribution<double> dist(99.0);
    const double z = boost::math::quantile(dist, 0.975);
    const double sd = std::sqrt(trace.covariances[0](0, 0));
    CHECK(bands.upper(0, 0) - trace.estimates(0, 0) == doctest::Approx(z * sd).epsilon(1e-12));
    CHECK_THROWS_AS(confidence_intervals(trace, 1.5), ConfigError);

    const ConfidenceBands sv = confidence_intervals(trace, 0.95, 99, CiSpread::SingularValues);
    // On scalar covariances both spread conventions coincide.
    CHECK((sv.lower - bands.lower).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("trajectory error is the root mean square over steps") {
    Matrix a = Matrix::Zero(2, 4);
    Matrix b = Matrix::Constant(2, 4, 1.0);
    // Every step contributes ||(1,1)|| = sqrt(2).
    CHECK(l2_trajectory_error(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(l2_trajectory_error(a, Matrix::Zero(2, 3)), ConfigError);
}
