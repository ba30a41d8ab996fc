#include <doctest.h>

#include "kkf/experiments.hpp"

using namespace kkf;

TEST_CASE("power-law fits are exact on synthetic decay data") {
    // err = 100 / sqrt(N) at two points pins C = 100 and alpha = -1/2.
    const PowerLawFit f = fit_power_law({{100.0, 10.0}, {400.0, 5.0}});
    CHECK(f.alpha == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.C == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(f.excluded == 0);

    const PowerLawFit flat = fit_power_law({{10.0, 2.0}, {100.0, 2.0}, {1000.0, 2.0}});
    CHECK(flat.alpha == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(flat.C == doctest::Approx(2.0).epsilon(1e-12));

    const PowerLawFit part = fit_power_law({{10.0, 1.0}, {20.0, 0.0}, {40.0, 0.25}});
    CHECK(part.excluded == 1);
    CHECK(part.alpha == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_power_law({{10.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(fit_power_law({{10.0, 1.0}, {10.0, 2.0}}), ConfigError);
    CHECK_THROWS_AS(fit_power_law({{-1.0, 1.0}, {10.0, 2.0}}), ConfigError);
}

TEST_CASE("benchmark settings define increasing nonlinearity") {
    CHECK(sir_setting(1).p_exponent == 1.0);
    CHECK(sir_setting(2).p_exponent == 2.0);
    CHECK(sir_setting(3).p_exponent == 3.0);
    CHECK(sir_setting(1).beta_lo == 0.3);
    CHECK(sir_setting(1).beta_hi == 1.5);
    CHECK(sir_setting(3).beta_hi == 10.0);
    CHECK_THROWS_AS(sir_setting(0), ConfigError);
    CHECK_THROWS_AS(sir_setting(4), ConfigError);
}

TEST_CASE("error-decay study is finite and deterministic on a reduced grid") {
    ErrorDecayConfig cfg;
    cfg.systems_count = 2;
    cfg.N_grid = {50, 100};
    cfg.T = 10;
    cfg.n_samples = 30;
    const ErrorDecayResult a = error_decay_study(cfg);
    REQUIRE(a.errors.rows() == 2);
    REQUIRE(a.errors.cols() == 2);
    CHECK(a.errors.allFinite());
    CHECK((a.errors.array() > 0.0).all());
    CHECK(a.fit.excluded == 0);

    const ErrorDecayResult b = error_decay_study(cfg);
    CHECK((a.errors - b.errors).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.fit.alpha == b.fit.alpha);

    ErrorDecayConfig bad = cfg;
    bad.N_grid = {100, 50};
    CHECK_THROWS_AS(error_decay_study(bad), ConfigError);
}

namespace {

SirBenchConfig tiny_bench() {
    SirBenchConfig cfg;
    cfg.replications = 2;
    cfg.T = 10;
    cfg.pf_sizes = {60};
    cfg.kkf_sizes = {60};
    cfg.n_samples = 30;
    return cfg;
}

double row_error(const SirBenchResult& res, const std::string& algorithm) {
    for (const auto& row : res.rows)
        if (row.algorithm == algorithm) return row.mean_error;
    FAIL("missing benchmark row: " << algorithm);
    return 0.0;
}

}  // namespace

TEST_CASE("filter benchmark produces one aggregate row per algorithm") {
    const SirBenchResult res = sir_benchmark(tiny_bench());
    REQUIRE(res.rows.size() == 4);  // ekf, ukf, pf_60, kkf_60
    for (const auto& row : res.rows) {
        CHECK(row.setting == 1);
        CHECK(row.replications == 2);
        CHECK(row.failures == 0);
        CHECK(row.mean_error > 0.0);
        CHECK(std::isfinite(row.mean_error));
        CHECK(row.mean_time >= 0.0);
    }
    CHECK(row_error(res, "pf_60") > 0.0);
    CHECK(row_error(res, "kkf_60") > 0.0);
    // Raw per-run records cover every (replication, algorithm) pair.
    CHECK(res.runs.size() == 8);
    for (const auto& run : res.runs) {
        CHECK(run.ok);
        CHECK(run.beta >= sir_setting(1).beta_lo);
        CHECK(run.beta <= sir_setting(1).beta_hi);
    }
}

TEST_CASE("benchmark errors do not depend on which other algorithms run") {
    const SirBenchConfig full = tiny_bench();
    SirBenchConfig kkf_only = full;
    kkf_only.pf_sizes = {};

    const double with_pf = row_error(sir_benchmark(full), "kkf_60");
    const double without_pf = row_error(sir_benchmark(kkf_only), "kkf_60");
    CHECK(with_pf == without_pf);
}

TEST_CASE("estimation benchmark runs end to end on a reduced budget") {
    EstimationConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 6;
    cfg.warmup = 3;
    cfg.T = 12;
    cfg.N = 60;
    cfg.n_samples = 30;
    cfg.pushforward_draws = 5;
    const EstimationBenchResult res = estimation_benchmark(cfg);
    CHECK(res.model == EpidemicModel::SIRp);
    REQUIRE(res.true_params.size() == 2);
    CHECK(res.true_params[0] == 1.3);
    CHECK(res.true_params[1] == 0.4);
    REQUIRE(res.summary.mean.size() == 2);
    CHECK(res.summary.mean.allFinite());
    CHECK(((res.summary.ci_upper - res.summary.ci_lower).array() >= 0.0).all());
    CHECK(res.summary.chain_traces.size() == 2);
    CHECK(res.truth_states.cols() == 13);
    CHECK(res.pushforward.errors.size() == 5);
    CHECK(res.pushforward.mean_error >= 0.0);
    CHECK(res.wall_time > 0.0);

    EstimationConfig bad = cfg;
    bad.warmup = 6;
    CHECK_THROWS_AS(estimation_benchmark(bad), ConfigError);
}

TEST_CASE("shared estimation constants") {
    const EpidemicParams p = estimation_truth();
    CHECK(p.beta == 1.3);
    CHECK(p.gamma == 0.4);
    CHECK(epidemic_x0(EpidemicModel::SIRp).size() == 3);
    CHECK(epidemic_x0(EpidemicModel::SEIRS).size() == 4);
    CHECK(epidemic_x0(EpidemicModel::SIRS).sum() == doctest::Approx(1.0).epsilon(1e-14));

    const auto refs = mcmc_reference_rows();
    CHECK(refs.size() == 6);
    for (const auto& r : refs) {
        CHECK((r.method == "demz" || r.method == "nuts"));
        CHECK(r.means.size() == 4);
        CHECK(r.l2_error > 0.0);
    }
}
