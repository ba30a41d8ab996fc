#include <doctest.h>

#include "kkf/kedmd.hpp"

using namespace kkf;

namespace {

ObservedSystem noiseless_sir() {
    EpidemicParams prm;
    return make_epidemic(EpidemicModel::SIRp, prm, Matrix::Zero(3, 3), Matrix::Zero(1, 1),
                         {1});
}

}  // namespace

TEST_CASE("lambda = 0 fit interpolates the training nodes") {
    ObservedSystem sys = noiseless_sir();
    const Kernel kernel{KernelFamily::Matern12, 1.0, 1.0};
    Rng rng = make_rng(42);
    // A modest node count keeps random draws separated and the Gram matrix
    // well conditioned.
    const KoopmanModel model =
        fit(sys, uniform_box_sampler(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0)),
            kernel, 60, 0.0, rng);

    const InterpolationResiduals res = interpolation_residuals(model);
    CHECK(res.propagation <= 1e-6);
    CHECK(res.observation <= 1e-6);
    CHECK(res.state <= 1e-6);

    for (int i = 0; i < model.sample_count(); i += 7) {
        const Vector phi = model.embed(model.nodes.col(i));
        CHECK((model.U * phi - model.embed(model.successors.col(i))).cwiseAbs().maxCoeff() <=
              1e-6);
        CHECK((model.C * phi - model.observations.col(i)).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((model.lift_back(phi) - model.nodes.col(i)).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("default lambda scales with the kernel amplitude") {
    Matrix K = 4.0 * Matrix::Identity(10, 10);
    CHECK(default_lambda(K) == doctest::Approx(1e-8 * 4.0).epsilon(1e-12));
}

TEST_CASE("fit validates its inputs") {
    ObservedSystem sys = noiseless_sir();
    const Kernel kernel{KernelFamily::Matern12, 1.0, 1.0};
    StateSampler box =
        uniform_box_sampler(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0));
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(fit(sys, box, kernel, 1, rng), ConfigError);
    CHECK_THROWS_AS(fit(sys, box, kernel, 10, -1.0, rng), ConfigError);
    StateSampler wrong_dim = [](Rng&) { return Vector{{0.5}}; };
    CHECK_THROWS_AS(fit(sys, wrong_dim, kernel, 10, rng), ConfigError);
    CHECK_THROWS_AS(uniform_box_sampler(Vector{{1.0}}, Vector{{0.0}}), ConfigError);
}

TEST_CASE("empirical covariance uses the unbiased divisor") {
    std::vector<Vector> samples = {Vector{{-1.0}}, Vector{{1.0}}};
    const Matrix cov = empirical_cov(samples);
    CHECK(cov(0, 0) == doctest::Approx(2.0).epsilon(1e-14));

    Matrix cols(1, 2);
    cols << -1.0, 1.0;
    CHECK(empirical_cov_cols(cols)(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(empirical_cov({Vector{{1.0}}}), ConfigError);
    CHECK_THROWS_AS(empirical_cov_cols(Matrix(2, 1)), ConfigError);
}

TEST_CASE("column covariance agrees with the vector version") {
    Rng rng = make_rng(9);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix cols(3, 25);
    std::vector<Vector> vecs;
    for (int j = 0; j < 25; ++j) {
        Vector v(3);
        for (int i = 0; i < 3; ++i) v[i] = d(rng);
        cols.col(j) = v;
        vecs.push_back(v);
    }
    CHECK((empirical_cov_cols(cols) - empirical_cov(vecs)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("empirical covariance supports a transform map") {
    std::vector<Vector> samples = {Vector{{-1.0}}, Vector{{1.0}}};
    const Matrix cov =
        empirical_cov(samples, [](const Vector& v) { return Vector(3.0 * v); });
    CHECK(cov(0, 0) == doctest::Approx(18.0).epsilon(1e-14));
}

TEST_CASE("embedding init returns the sample mean and covariance of features") {
    ObservedSystem sys = noiseless_sir();
    const Kernel kernel{KernelFamily::Matern12, 1.0, 1.0};
    Rng rng = make_rng(4);
    const KoopmanModel model =
        fit(sys, uniform_box_sampler(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0)),
            kernel, 20, rng);

    // A point-mass initial distribution embeds to a deterministic feature
    // vector with zero covariance.
    const Vector x0{{0.9, 0.1, 0.0}};
    StateSampler point = [x0](Rng&) { return x0; };
    auto [mean, cov] = embedding_init(model, point, 5, rng);
    CHECK((mean - model.embed(x0)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(cov.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(embedding_init(model, point, 1, rng), ConfigError);
}

TEST_CASE("model artifacts round trip through JSON") {
    ObservedSystem sys = noiseless_sir();
    const Kernel kernel{KernelFamily::SquaredExponential, 0.7, 1.2};
    Rng rng = make_rng(8);
    const KoopmanModel model =
        fit(sys, uniform_box_sampler(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0)),
            kernel, 15, 1e-6, rng);

    const KoopmanModel back = koopman_model_from_json(to_json(model));
    CHECK(back.kernel.family == model.kernel.family);
    CHECK(back.kernel.length_scale == model.kernel.length_scale);
    CHECK(back.kernel.variance == model.kernel.variance);
    CHECK(back.lambda == model.lambda);
    CHECK((back.nodes - model.nodes).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.U - model.U).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.C - model.C).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.B - model.B).cwiseAbs().maxCoeff() == 0.0);

    Json corrupted = to_json(model);
    corrupted["U"] = matrix_to_json(Matrix::Identity(2, 2));
    CHECK_THROWS_AS(koopman_model_from_json(corrupted), ConfigError);
}

TEST_CASE("lift back validates feature dimensions") {
    ObservedSystem sys = noiseless_sir();
    const Kernel kernel{KernelFamily::Matern12, 1.0, 1.0};
    Rng rng = make_rng(2);
    const KoopmanModel model =
        fit(sys, uniform_box_sampler(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0)),
            kernel, 10, rng);
    CHECK_THROWS_AS(model.lift_back(Vector::Zero(3)), ConfigError);
    CHECK_THROWS_AS(model.lift_back_cov(Matrix::Zero(3, 3)), ConfigError);
}
