#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evidencenet/likelihood.hpp"
#include "evidencenet/network.hpp"
#include "evidencenet/rng.hpp"
#include "evidencenet/transform.hpp"

using namespace evidencenet;

namespace {

Dataset synthetic(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(n), 13);
    d.targets.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < 13; ++j) d.features(i, j) = rng.normal();
        d.targets(i) = rng.normal();
    }
    d.stats.assign(kColumnCount, ColumnStats{});
    for (std::size_t i = 0; i < n; ++i) d.row_ids.push_back(i);
    return d;
}

std::vector<double> random_theta(const ModelSpec& spec, CounterRng& rng) {
    const PriorTransform tr(spec);
    std::vector<double> u(tr.dim());
    for (auto& v : u) v = rng.uniform_open();
    return tr(u);
}

}  // namespace

TEST_CASE("closed-form values") {
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    CHECK(gaussian_log_like(0.0, 1, 1.0) == doctest::Approx(-half_log_2pi).epsilon(1e-14));
    CHECK(gaussian_log_like(0.0, 1, 1.0) == doctest::Approx(-0.91894).epsilon(1e-5));
    CHECK(gaussian_log_like(2.0, 2, 1.0) == doctest::Approx(-2.83788).epsilon(1e-5));
    CHECK(gaussian_log_like(0.0, 1, 2.0) == doctest::Approx(-1.61209).epsilon(1e-5));
}

TEST_CASE("likelihood on a dataset") {
    // br with theta = 0 predicts 0, so chi^2 is the sum of squared targets.
    const auto d = synthetic(2, 1);
    const auto spec = parse_name("br");
    const std::vector<double> zero(14, 0.0);
    const auto ll = log_like(spec, zero, d);
    CHECK(ll.value == doctest::Approx(gaussian_log_like(d.targets.squaredNorm(), 2, 1.0)).epsilon(1e-14));
    CHECK(ll.n_calls == 1);
}

TEST_CASE("variable sigma is read from the layout") {
    const auto d = synthetic(20, 2);
    const auto spec = parse_name("sh sv (2)");
    CounterRng rng(3, 0);
    auto theta = random_theta(spec, rng);
    const GaussianLikelihood like(spec, d);
    const double chi2 = like.chi_squared(theta);
    const auto layout = make_layout(spec);
    CHECK(like(theta) == doctest::Approx(gaussian_log_like(chi2, 20, theta[*layout.sigma_index])).epsilon(1e-13));
}

TEST_CASE("additive over records") {
    CounterRng rng(4, 0);
    const auto d = synthetic(30, 5);
    for (const char* name : {"br", "lh sv (4)", "r (2, 2)", "ih sv (2)"}) {
        const auto spec = parse_name(name);
        const auto theta = random_theta(spec, rng);
        double sum = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const std::size_t row[] = {i};
            sum += GaussianLikelihood(spec, d.subset(row))(theta);
        }
        CHECK(std::abs(GaussianLikelihood(spec, d)(theta) - sum) < 1e-9);
    }
}

TEST_CASE("sigma profile peaks at chi^2 / N") {
    const double chi2 = 7.3;
    const std::size_t n = 11;
    // Golden-section search on log sigma.
    double a = std::log(0.01), b = std::log(100.0);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double ls) { return -gaussian_log_like(chi2, n, std::exp(ls)); };
    double c = b - g * (b - a), e = a + g * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(e)) b = e; else a = c;
        c = b - g * (b - a);
        e = a + g * (b - a);
    }
    const double sigma = std::exp(0.5 * (a + b));
    CHECK(std::abs(sigma * sigma - chi2 / n) < 1e-6);
}

TEST_CASE("smaller residuals never lower the likelihood") {
    CounterRng rng(6, 0);
    for (int t = 0; t < 200; ++t) {
        const double r1 = rng.normal(), r2 = rng.normal(), shrink = rng.uniform();
        const double sigma = 0.1 + rng.uniform();
        const double before = gaussian_log_like(r1 * r1 + r2 * r2, 2, sigma);
        const double after = gaussian_log_like(r1 * r1 * shrink * shrink + r2 * r2, 2, sigma);
        CHECK(after >= before);
    }
}

TEST_CASE("overflowing network gives zero likelihood") {
    const auto d = synthetic(5, 7);
    const auto spec = parse_name("r (2)");
    std::vector<double> theta(total_dim(spec), 1e300);
    const double v = GaussianLikelihood(spec, d)(theta);
    CHECK(std::isinf(v));
    CHECK(v < 0);
}

TEST_CASE("dimension mismatch is rejected") {
    const auto d = synthetic(5, 8);
    const auto spec = parse_name("(2)");
    std::vector<double> theta(30, 0.0);
    CHECK_THROWS_AS(GaussianLikelihood(spec, d)(theta), std::invalid_argument);
}
