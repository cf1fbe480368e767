#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evidencenet/experiment.hpp"
#include "evidencenet/oracle.hpp"
#include "evidencenet/posterior.hpp"
#include "evidencenet/sampler.hpp"
#include "evidencenet/transform.hpp"
#include "support.hpp"

using namespace evidencenet;

TEST_CASE("pure-noise model") {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    CHECK(oracle::blr_log_evidence(phi, y) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("two-point set against grid quadrature") {
    Eigen::MatrixXd phi(2, 2);
    phi << 0.7, 1.0, -1.3, 1.0;
    Eigen::VectorXd y(2);
    y << 0.4, -0.9;
    const double analytic = oracle::blr_log_evidence(phi, y);
    const double grid = oracle::grid_log_evidence(
        [&](std::span<const double> u) {
            const double a = gaussian_quantile(u[0], 0.0, 1.0), b = gaussian_quantile(u[1], 0.0, 1.0);
            double chi2 = 0.0;
            for (int i = 0; i < 2; ++i) chi2 += std::pow(y(i) - a * phi(i, 0) - b * phi(i, 1), 2);
            return -0.5 * chi2 - std::log(2.0 * std::numbers::pi);
        },
        2, 1000);
    CHECK(std::abs(analytic - grid) < 1e-3);
}

TEST_CASE("grid quadrature") {
    CHECK(oracle::grid_log_evidence([](std::span<const double>) { return -4.5; }, 3, 20) ==
          doctest::Approx(-4.5).epsilon(1e-13));

    const double s = 0.05, c = 0.45;
    auto bump = [&](double u) { return -0.5 * (u - c) * (u - c) / (s * s); };
    const double one = oracle::grid_log_evidence([&](std::span<const double> u) { return bump(u[0]); }, 1, 1000000);
    CHECK(std::abs(one - std::log(std::sqrt(2.0 * std::numbers::pi) * s)) < 1e-6);

    auto bump2 = [&](double u) { return -0.5 * (u - 0.6) * (u - 0.6) / (0.1 * 0.1); };
    const double a = oracle::grid_log_evidence([&](std::span<const double> u) { return bump(u[0]); }, 1, 1000);
    const double b = oracle::grid_log_evidence([&](std::span<const double> u) { return bump2(u[0]); }, 1, 1000);
    const double ab = oracle::grid_log_evidence(
        [&](std::span<const double> u) { return bump(u[0]) + bump2(u[1]); }, 2, 1000);
    CHECK(std::abs(ab - (a + b)) < 1e-6);

    CHECK_THROWS_AS(oracle::grid_log_evidence([](std::span<const double>) { return 0.0; }, 4, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle::grid_log_evidence([](std::span<const double>) { return 0.0; }, 0, 2),
                    std::invalid_argument);
}

TEST_CASE("evidence ignores the order of training rows") {
    CounterRng rng(5, 0);
    Eigen::MatrixXd phi(40, 5);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) phi(i, j) = rng.normal();
        y(i) = rng.normal();
    }
    const double base = oracle::blr_log_evidence(phi, y);
    for (int t = 0; t < 10; ++t) {
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(40);
        perm.setIdentity();
        for (Eigen::Index i = 39; i > 0; --i) std::swap(perm.indices()(i), perm.indices()(rng.below(i + 1)));
        CHECK(std::abs(oracle::blr_log_evidence(perm * phi, perm * y) - base) < 1e-9);
    }
}

TEST_CASE("closed form matches the dense marginal") {
    CounterRng rng(6, 0);
    Eigen::MatrixXd phi(12, 3);
    Eigen::VectorXd y(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) phi(i, j) = rng.normal();
        y(i) = rng.normal();
    }
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(12, 12) + phi * phi.transpose();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
    const double dense = -0.5 * (y.dot(lu.solve(y)) + std::log(lu.determinant()) + 12 * std::log(2 * std::numbers::pi));
    CHECK(oracle::blr_log_evidence(phi, y) == doctest::Approx(dense).epsilon(1e-12));
}

TEST_CASE("housing splits reproduce the published evidence scale") {
    if (!testsupport::have_data()) return;
    const auto o = oracle_br(testsupport::housing(), 0, 10);
    CHECK(o.aggregate.log_z >= -297.5);
    CHECK(o.aggregate.log_z <= -291.0);
}

TEST_CASE("sampled linear regression matches the closed form") {
    if (!testsupport::have_data()) return;
    const auto data = testsupport::housing();
    const auto plan = make_split(data.size(), 0, 1);
    const auto train = data.subset(plan.train_idx), test = data.subset(plan.test_idx);
    const auto blr = oracle::AnalyticBLR::from_dataset(train);

    SamplerConfig cfg;
    cfg.n_live = 200;
    cfg.seed = 77;
    const auto spec = parse_name("br");
    const auto run = evidencenet::run(spec, train, cfg);
    CHECK(std::abs(run.log_z - blr.log_evidence()) <= 3.0 * run.log_z_err);

    const auto samples = posterior_samples(run, spec);
    const auto m = predictive(samples, test.features);
    Eigen::VectorXd mean, sd;
    blr.predict(test.features, mean, sd);
    const double ess = samples.effective_sample_size();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double se = m.sd(i) / std::sqrt(ess);
        worst = std::max(worst, std::abs(m.mean(i) - mean(i)) / se);
    }
    CAPTURE(ess);
    CHECK(worst <= 3.0);
}
