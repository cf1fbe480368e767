#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/binomial.hpp>

#include "evidencenet/rng.hpp"
#include "evidencenet/transform.hpp"
#include "support.hpp"

using namespace evidencenet;

namespace {

// CDF of the i-th (1-based) smallest of k uniforms: sum_{j>=i} C(k,j) t^j (1-t)^(k-j).
double order_statistic_cdf(std::size_t i, std::size_t k, double t) {
    double s = 0.0;
    for (std::size_t j = i; j <= k; ++j)
        s += boost::math::binomial_coefficient<double>(static_cast<unsigned>(k), static_cast<unsigned>(j)) *
             std::pow(t, static_cast<double>(j)) * std::pow(1.0 - t, static_cast<double>(k - j));
    return s;
}

}  // namespace

TEST_CASE("gaussian quantile") {
    CHECK(gaussian_quantile(0.5, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    const double u = testsupport::phi_by_quadrature(1.0);
    CHECK(u == doctest::Approx(0.841344746).epsilon(1e-9));
    CHECK(std::abs(gaussian_quantile(0.841344746, 0.0, 1.0) - 1.0) < 1e-6);
    CHECK(std::abs(gaussian_quantile(u, 0.0, 1.0) - 1.0) < 1e-10);
    CHECK(gaussian_quantile(0.5, 0.0, 2.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(gaussian_quantile(0.841344746, 0.0, 2.5) - 2.5) < 2.5e-6);
    CHECK_THROWS_AS(gaussian_quantile(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gaussian_quantile(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gaussian_quantile(0.5, 0.0, 0.0), std::domain_error);
}

TEST_CASE("gaussian quantile inverts the quadrature CDF") {
    for (int i = 1; i < 100; ++i) {
        const double u = i / 100.0;
        const double x = gaussian_quantile(u, 0.0, 1.0);
        CHECK(std::abs(testsupport::phi_by_quadrature(x) - u) < 1e-10);
    }
}

TEST_CASE("gamma precision quantile") {
    CHECK(gamma_precision_quantile(0.5, 1.0, 1.0) == doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-12));
    CHECK(gamma_precision_quantile(0.5, 1.0, 1.0) == doctest::Approx(1.20112).epsilon(1e-5));
    CHECK(gamma_precision_quantile(1.0 - std::exp(-1.0), 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gamma_precision_quantile(0.5, 1.0, 0.25) == doctest::Approx(0.60056).epsilon(1e-5));
    CHECK_THROWS_AS(gamma_precision_quantile(0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_precision_quantile(1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("gamma quantile round trip against the series CDF") {
    for (auto [a, b] : {std::pair{1.0, 1.0}, {1.0, 0.125}, {0.5, 1.0}, {3.0, 2.0}}) {
        for (int i = 1; i < 100; ++i) {
            const double u = i / 100.0;
            const double sigma = gamma_precision_quantile(u, a, b);
            CHECK(std::abs(testsupport::gamma_p_series(a, b / (sigma * sigma)) - u) < 1e-10);
        }
    }
    for (int i = 1; i < 100; ++i) {
        const double u = i / 100.0;
        const double sigma = gamma_precision_quantile(u, 1.0, 1.0);
        CHECK(std::abs(1.0 / (sigma * sigma) + std::log1p(-u)) < 1e-12);
    }
}

TEST_CASE("forced identifiability examples") {
    const double one[] = {0.37};
    CHECK(forced_identifiability(one) == std::vector<double>{0.37});
    const double two[] = {0.25, 0.64};
    const auto t = forced_identifiability(two);
    CHECK(t[0] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(t[1] == doctest::Approx(0.8).epsilon(1e-14));
    const double ones[] = {1.0, 1.0, 1.0};
    CHECK(forced_identifiability(ones) == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("forced identifiability follows the order-statistic law") {
    const std::size_t n = 100000;
    for (std::size_t k : {2, 3, 5}) {
        CounterRng rng(100 + k, 0);
        std::vector<std::vector<double>> marg(k);
        std::vector<std::vector<double>> sorted(k);
        std::vector<double> u(k), v(k);
        for (std::size_t s = 0; s < n; ++s) {
            for (auto& x : u) x = rng.uniform_open();
            for (auto& x : v) x = rng.uniform_open();
            const auto t = forced_identifiability(u);
            std::sort(v.begin(), v.end());
            for (std::size_t i = 0; i < k; ++i) {
                marg[i].push_back(t[i]);
                sorted[i].push_back(v[i]);
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            CAPTURE(k);
            CAPTURE(i);
            CHECK(testsupport::ks_distance(marg[i], [&](double x) { return order_statistic_cdf(i + 1, k, x); }) < 0.01);
            CHECK(testsupport::ks_two_sample(marg[i], sorted[i]) < 0.01);
        }
    }
}

TEST_CASE("ordered bias blocks ascend") {
    const auto spec = parse_name("lh sv (4, 4)");
    const PriorTransform tr(spec);
    CounterRng rng(9, 0);
    std::vector<double> u(tr.dim());
    for (int draw = 0; draw < 10000; ++draw) {
        for (auto& x : u) x = rng.uniform_open();
        const auto theta = tr(u);
        for (const auto& b : tr.layout().blocks) {
            if (!b.ordered) continue;
            for (std::size_t i = 1; i < b.size; ++i) REQUIRE(theta[b.offset + i - 1] < theta[b.offset + i]);
        }
    }
}

TEST_CASE("medians map to the prior mean") {
    const auto br = parse_name("br");
    const std::vector<double> half(14, 0.5);
    for (double v : to_physical(br, half)) CHECK(std::abs(v) < 1e-15);

    const auto spec = parse_name("(4, 4)");
    const PriorTransform tr(spec);
    const std::vector<double> u(tr.dim(), 0.5);
    const auto theta = tr(u);
    for (const auto& b : tr.layout().blocks)
        if (!b.ordered)
            for (std::size_t i = 0; i < b.size; ++i) CHECK(std::abs(theta[b.offset + i]) < 1e-15);
}

TEST_CASE("single hyperparameter scales every network parameter") {
    const auto spec = parse_name("sh sv (2)");
    const PriorTransform tr(spec);
    CounterRng rng(10, 0);
    std::vector<double> u(tr.dim());
    for (auto& x : u) x = rng.uniform_open();
    const auto a = tr(u);
    // Choose u_0 so that the width doubles.
    auto u2 = u;
    const double tau = 1.0 / (a[0] * a[0]) / 4.0;
    u2[0] = 1.0 - std::exp(-tau);
    const auto b = tr(u2);
    CHECK(b[0] == doctest::Approx(2.0 * a[0]).epsilon(1e-10));
    CHECK(b[1] == a[1]);
    for (std::size_t i = 2; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(2.0 * a[i]).epsilon(1e-10));
}

TEST_CASE("transform is monotone in each primary coordinate") {
    CounterRng rng(11, 0);
    for (const char* name : {"ih sv (2)", "lh sv (2, 2)", "r (4)"}) {
        const PriorTransform tr(parse_name(name));
        std::vector<double> u(tr.dim());
        for (int trial = 0; trial < 50; ++trial) {
            for (auto& x : u) x = rng.uniform_open();
            const std::size_t j = rng.below(tr.dim());
            auto lo = u, hi = u;
            lo[j] = std::min(u[j], 0.5 * (u[j] + rng.uniform_open()));
            hi[j] = std::max(u[j], lo[j] + 0.01 * (1.0 - lo[j]));
            const auto a = tr(lo), b = tr(hi);
            if (j < tr.layout().network_offset)
                CHECK(1.0 / (b[j] * b[j]) >= 1.0 / (a[j] * a[j]));  // precisions
            else
                CHECK(b[j] >= a[j]);
        }
    }
}

TEST_CASE("dimension mismatch and boundary coordinates") {
    const PriorTransform tr(parse_name("sh sv (2)"));
    std::vector<double> u(tr.dim() - 1, 0.5);
    CHECK_THROWS_AS(tr(u), std::invalid_argument);
    std::vector<double> edge(tr.dim(), 0.0);
    for (std::size_t i = 0; i < edge.size(); i += 2) edge[i] = 1.0;
    for (double v : tr(edge)) CHECK(std::isfinite(v));
}
