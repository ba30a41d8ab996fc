#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "kkf/kernels.hpp"

using namespace kkf;

TEST_CASE("matern12 kernel closed form") {
    Kernel k{KernelFamily::Matern12, 2.0, 1.0};
    Vector x{{0.0, 0.0}}, y{{2.0, 0.0}};
    CHECK(k(x, y) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(k(x, x) == doctest::Approx(1.0).epsilon(1e-14));
    k.variance = 3.0;
    CHECK(k(x, y) == doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("squared exponential kernel closed form") {
    Kernel k{KernelFamily::SquaredExponential, 1.5, 1.0};
    Vector x{{1.0}}, y{{-0.5}};
    const double r2 = 1.5 * 1.5;
    CHECK(k(x, y) == doctest::Approx(std::exp(-0.5 * r2 / (1.5 * 1.5))).epsilon(1e-14));
}

TEST_CASE("linear kernel is the scaled dot product") {
    Kernel k{KernelFamily::Linear, 1.0, 2.0};
    Vector x{{1.0, 2.0}}, y{{3.0, -1.0}};
    CHECK(k(x, y) == doctest::Approx(2.0 * (1.0 * 3.0 + 2.0 * -1.0)).epsilon(1e-14));
}

TEST_CASE("gram matrix matches pointwise evaluation and is symmetric PSD") {
    Rng rng = make_rng(7);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix pts(3, 12);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = d(rng);

    for (KernelFamily fam : {KernelFamily::Matern12, KernelFamily::SquaredExponential,
                             KernelFamily::Linear}) {
        Kernel k{fam, 0.8, 1.3};
        const Matrix G = gram(k, pts, pts);
        REQUIRE(G.rows() == 12);
        REQUIRE(G.cols() == 12);
        CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (Eigen::Index i = 0; i < 12; ++i)
            for (Eigen::Index j = 0; j < 12; ++j)
                CHECK(G(i, j) ==
                      doctest::Approx(k(pts.col(i), pts.col(j))).epsilon(1e-12));
        Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * G.trace());
    }
}

TEST_CASE("gram supports rectangular point sets") {
    Kernel k{KernelFamily::Matern12, 1.0, 1.0};
    Matrix A = Matrix::Random(2, 5), B = Matrix::Random(2, 3);
    const Matrix G = gram(k, A, B);
    REQUIRE(G.rows() == 5);
    REQUIRE(G.cols() == 3);
    CHECK(G(4, 2) == doctest::Approx(k(A.col(4), B.col(2))).epsilon(1e-12));
}

TEST_CASE("kernel family names round trip") {
    for (KernelFamily fam : {KernelFamily::Matern12, KernelFamily::SquaredExponential,
                             KernelFamily::Linear})
        CHECK(kernel_family_from_string(to_string(fam)) == fam);
    CHECK(kernel_family_from_string("rbf") == KernelFamily::SquaredExponential);
    CHECK(kernel_family_from_string("exponential") == KernelFamily::Matern12);
    CHECK_THROWS_AS(kernel_family_from_string("cubic"), ConfigError);
}

TEST_CASE("kernel input validation") {
    Kernel k{KernelFamily::Matern12, 1.0, 1.0};
    CHECK_THROWS_AS(k(Vector{{1.0}}, Vector{{1.0, 2.0}}), ConfigError);
    Kernel bad{KernelFamily::Matern12, 0.0, 1.0};
    CHECK_THROWS_AS(bad(Vector{{1.0}}, Vector{{2.0}}), ConfigError);
    Vector nan{{std::nan("")}};
    CHECK_THROWS_AS(k(nan, Vector{{0.0}}), NumericalError);
    Matrix bad_pts(1, 2);
    bad_pts << 0.0, std::nan("");
    CHECK_THROWS_AS(gram(k, bad_pts, bad_pts), NumericalError);
}
