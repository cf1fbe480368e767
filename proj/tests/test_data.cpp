#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "evidencenet/data.hpp"
#include "evidencenet/rng.hpp"
#include "support.hpp"

using namespace evidencenet;

namespace {

std::string numbered_row(int first) {
    std::string s;
    for (int i = 0; i < 14; ++i) s += std::to_string(first + i) + (i < 13 ? " " : "\n");
    return s;
}

}  // namespace

TEST_CASE("housing table has 506 rows of 14 columns") {
    if (!testsupport::have_data()) return;
    const auto t = load_table(testsupport::data_path());
    CHECK(t.rows() == 506);
    CHECK(t.cols() == 14);
}

TEST_CASE("single row parses") {
    const auto t = parse_table(numbered_row(1));
    REQUIRE(t.rows() == 1);
    CHECK(t.values(0, 0) == 1.0);
    CHECK(t.values(0, 13) == 14.0);
}

TEST_CASE("short row is rejected with its line number") {
    std::string text = numbered_row(1) + "1 2 3 4 5 6 7 8 9 10 11 12 13\n";
    try {
        parse_table(text, "rows.txt");
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("expected 14 columns") != std::string::npos);
        CHECK(msg.find(":2:") != std::string::npos);
    }
}

TEST_CASE("non-numeric field names the line") {
    std::string text = numbered_row(1) + numbered_row(2);
    text.replace(text.find("\n") + 1, 1, "x");
    CHECK_THROWS_WITH_AS(parse_table(text, "f"), doctest::Contains("f:2"), std::runtime_error);
}

TEST_CASE("csv with header, comments and blank lines") {
    std::string text = "crim,zn,indus,chas,nox,rm,age,dis,rad,tax,ptratio,b,lstat,medv\n# note\n\n";
    for (int r = 0; r < 3; ++r) {
        for (int i = 0; i < 14; ++i) text += std::to_string(r * 14 + i) + (i < 13 ? "," : "\n");
    }
    const auto t = parse_table(text);
    CHECK(t.rows() == 3);
    CHECK(t.values(2, 13) == 41.0);
}

TEST_CASE("missing file is an error") {
    CHECK_THROWS_AS(load_table("/nonexistent/housing.data"), std::runtime_error);
}

TEST_CASE("whitening a 1,2,3 column") {
    RawTable t;
    t.values.resize(3, 14);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 14; ++c) t.values(r, c) = r + 1 + 10 * c + (c % 2) * r * r;
    const auto d = whiten(t);
    CHECK(d.features(0, 0) == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(d.features(1, 0) == doctest::Approx(0.0));
    CHECK(d.features(2, 0) == doctest::Approx(1.2247448714).epsilon(1e-9));
    CHECK(d.stats[0].mean == doctest::Approx(2.0));
    CHECK(d.stats[0].std == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("whitening is idempotent and invertible") {
    CounterRng rng(77, 0);
    RawTable t;
    t.values.resize(50, 14);
    for (Eigen::Index r = 0; r < 50; ++r)
        for (Eigen::Index c = 0; c < 14; ++c) t.values(r, c) = 100.0 * rng.normal() + static_cast<double>(c);
    const auto d = whiten(t);
    for (Eigen::Index c = 0; c < 13; ++c) {
        CHECK(std::abs(d.features.col(c).mean()) < 1e-10);
        CHECK(std::abs(std::sqrt(d.features.col(c).array().square().mean()) - 1.0) < 1e-10);
    }
    CHECK(std::abs(d.targets.mean()) < 1e-10);

    const auto back = unwhiten(d);
    CHECK((back.values - t.values).cwiseAbs().maxCoeff() < 1e-10);

    RawTable w;
    w.values.resize(50, 14);
    w.values.leftCols(13) = d.features;
    w.values.col(13) = d.targets;
    const auto d2 = whiten(w);
    CHECK((d2.features - d.features).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constant column cannot be whitened") {
    RawTable t;
    t.values = Eigen::MatrixXd::Random(3, 14);
    t.values.col(4).setConstant(5.0);
    CHECK_THROWS_AS(whiten(t), std::invalid_argument);
    CHECK_THROWS_AS(whiten(RawTable{}), std::invalid_argument);
}

TEST_CASE("ten splits of 506 records") {
    const auto splits = make_splits(506, 0, 10);
    REQUIRE(splits.size() == 10);
    std::set<std::vector<std::size_t>> distinct;
    for (const auto& s : splits) {
        CHECK(s.train_idx.size() == 253);
        CHECK(s.test_idx.size() == 253);
        std::vector<std::size_t> all = s.train_idx;
        all.insert(all.end(), s.test_idx.begin(), s.test_idx.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
        distinct.insert(s.train_idx);
    }
    CHECK(distinct.size() == 10);
}

TEST_CASE("smallest even split") {
    const auto s = make_splits(4, 9, 1).at(0);
    CHECK(s.train_idx.size() == 2);
    CHECK(s.test_idx.size() == 2);
    for (auto i : s.train_idx) CHECK(std::find(s.test_idx.begin(), s.test_idx.end(), i) == s.test_idx.end());
}

TEST_CASE("odd n gives floor(n/2) training rows") {
    const auto s = make_split(7, 1, 0);
    CHECK(s.train_idx.size() == 3);
    CHECK(s.test_idx.size() == 4);
}

TEST_CASE("splits are deterministic") {
    const auto a = make_splits(506, 42, 10);
    const auto b = make_splits(506, 42, 10);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(a[k].train_idx == b[k].train_idx);
        CHECK(a[k].test_idx == b[k].test_idx);
        CHECK(make_split(506, 42, k).train_idx == a[k].train_idx);
    }
    CHECK(make_splits(506, 43, 1)[0].train_idx != a[0].train_idx);
}

TEST_CASE("subset keeps the full-table statistics") {
    if (!testsupport::have_data()) return;
    const auto d = testsupport::housing();
    const auto plan = make_split(d.size(), 0, 3);
    const auto train = d.subset(plan.train_idx);
    REQUIRE(train.stats.size() == d.stats.size());
    for (std::size_t c = 0; c < d.stats.size(); ++c) {
        CHECK(train.stats[c].mean == d.stats[c].mean);
        CHECK(train.stats[c].std == d.stats[c].std);
    }
    CHECK(train.row_ids == plan.train_idx);
    CHECK(train.features.row(5) == d.features.row(static_cast<Eigen::Index>(plan.train_idx[5])));
}
