#include <doctest.h>

#include <set>

#include "evidencenet/model.hpp"

using namespace evidencenet;

TEST_CASE("hyperparameter counts") {
    CHECK(hyper_count(parse_name("ih sv (4, 4)")) == 24);
    CHECK(hyper_count(parse_name("lh sv (2)")) == 4);
    CHECK(total_dim(parse_name("lh sv (2)")) == 36);
    CHECK(hyper_count(parse_name("ih sv (2)")) == 17);
    CHECK(total_dim(parse_name("ih sv (2)")) == 49);
    for (const char* n : {"sh sv", "sh sv (2)", "sh sv (8)", "sh sv (4, 4, 4, 4)"}) CHECK(hyper_count(parse_name(n)) == 1);
    CHECK(hyper_count(parse_name("(4)")) == 0);
}

TEST_CASE("total dimensions") {
    CHECK(total_dim(parse_name("ih sv (4, 4, 4, 4)")) == 156);
    CHECK(total_dim(parse_name("sh sv")) == 16);
    CHECK(total_dim(parse_name("lh sv")) == 17);
    CHECK(total_dim(parse_name("br")) == 14);
    // The formula gives 29 where the published table prints 28.
    CHECK(total_dim(parse_name("ih sv")) == 29);
}

TEST_CASE("hyperprior parameters") {
    SUBCASE("layer granularity scales weights beyond the first layer") {
        const auto hp = hyperprior_params(parse_name("lh sv (4, 4)"));
        REQUIRE(hp.hyper.size() == 6);
        CHECK(hp.hyper[0] == GammaPrior{1.0, 1.0});
        CHECK(hp.hyper[1] == GammaPrior{1.0, 1.0});
        CHECK(hp.hyper[2] == GammaPrior{1.0, 0.25});
        CHECK(hp.hyper[3] == GammaPrior{1.0, 1.0});
        CHECK(hp.hyper[4] == GammaPrior{1.0, 0.25});
        CHECK(hp.hyper[5] == GammaPrior{1.0, 1.0});
        CHECK(hp.likelihood == GammaPrior{1.0, 1.0});
    }
    SUBCASE("single granularity is unscaled") {
        const auto hp = hyperprior_params(parse_name("sh sv (8)"));
        REQUIRE(hp.hyper.size() == 1);
        CHECK(hp.hyper[0] == GammaPrior{1.0, 1.0});
    }
    SUBCASE("input-size granularity") {
        const auto hp = hyperprior_params(parse_name("ih sv (4, 4)"));
        REQUIRE(hp.hyper.size() == 24);
        for (int i = 0; i < 14; ++i) CHECK(hp.hyper[i] == GammaPrior{1.0, 1.0});
        for (int i = 14; i < 18; ++i) CHECK(hp.hyper[i] == GammaPrior{1.0, 0.25});
        CHECK(hp.hyper[18] == GammaPrior{1.0, 1.0});
        for (int i = 19; i < 23; ++i) CHECK(hp.hyper[i] == GammaPrior{1.0, 0.25});
        CHECK(hp.hyper[23] == GammaPrior{1.0, 1.0});
    }
    CHECK_THROWS_AS(hyperprior_params(parse_name("(2)")), std::invalid_argument);
}

TEST_CASE("model names") {
    const auto a = parse_name("lh sv (4, 4)");
    CHECK(a.granularity == Granularity::layer);
    CHECK(a.variable_sigma);
    CHECK(a.arch.activation == Activation::tanh);
    CHECK(a.arch.hidden_sizes == std::vector<std::size_t>{4, 4});

    const auto r = parse_name("r (8)");
    CHECK(r.arch.activation == Activation::relu);
    CHECK(r.granularity == Granularity::fixed);
    CHECK(!r.variable_sigma);
    CHECK(r.arch.hidden_sizes == std::vector<std::size_t>{8});

    const auto br = parse_name("br");
    CHECK(br.arch.hidden_sizes.empty());
    CHECK(br.granularity == Granularity::fixed);
    CHECK(br.name() == "br");

    CHECK(parse_name("  lh   sv (4,4) ").name() == "lh sv (4, 4)");
    for (const auto& spec : paper_grid()) CHECK(parse_name(spec.name()) == spec);
}

TEST_CASE("bad names list the valid tokens") {
    for (const char* bad : {"xx (2)", "lh lh (2)", "(2", "(0)", "(a)", "", "sv sh (2)", "br (2)"}) {
        CAPTURE(bad);
        try {
            parse_name(bad);
            FAIL("expected an error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("sh") != std::string::npos);
        }
    }
}

TEST_CASE("experiment grid") {
    const auto grid = paper_grid();
    CHECK(grid.size() == 49);
    std::set<std::string> names;
    for (const auto& s : grid) {
        CHECK(s.on_grid());
        names.insert(s.name());
    }
    CHECK(names.size() == 49);
    CHECK(grid.front().name() == "br");
    CHECK(grid.back().name() == "ih sv (4, 4, 4, 4)");
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(report_order_key(grid[i - 1]) < report_order_key(grid[i]));
    CHECK(!parse_name("r sh sv (2)").on_grid());
    CHECK(!parse_name("sh (2)").on_grid());
}

TEST_CASE("layout covers every parameter once") {
    for (const auto& spec : paper_grid()) {
        CAPTURE(spec.name());
        const auto layout = make_layout(spec);
        CHECK(layout.total() == total_dim(spec));
        CHECK(layout.n_hyper == hyper_count(spec));
        CHECK(layout.network_offset == layout.n_hyper + (spec.variable_sigma ? 1 : 0));
        if (spec.variable_sigma) CHECK(layout.sigma_index == layout.n_hyper);
        CHECK(layout.governor.size() == param_count(spec.arch));

        std::vector<int> seen(layout.total(), 0);
        for (const auto& b : layout.blocks)
            for (std::size_t i = 0; i < b.size; ++i) ++seen[b.offset + i];
        for (std::size_t i = layout.network_offset; i < layout.total(); ++i) CHECK(seen[i] == 1);

        std::vector<int> governs(layout.n_hyper, 0);
        for (const auto& g : layout.governor) {
            CHECK(g.has_value() == (spec.granularity != Granularity::fixed));
            if (g) {
                REQUIRE(*g < layout.n_hyper);
                ++governs[*g];
            }
        }
        for (int c : governs) CHECK(c >= 1);

        for (const auto& b : layout.blocks)
            CHECK(b.ordered == (b.is_bias && b.layer < spec.arch.layer_count()));
    }
}

TEST_CASE("input-size governor follows the input node") {
    const auto spec = parse_name("ih sv (2)");
    const auto layout = make_layout(spec);
    // Layer 1 hyperparameters 0..12 govern weights from inputs 0..12, 13 the biases.
    for (std::size_t node = 0; node < 2; ++node)
        for (std::size_t k = 0; k < 13; ++k) CHECK(layout.governor[node * 13 + k] == k);
    CHECK(layout.governor[26] == 13u);
    CHECK(layout.governor[27] == 13u);
    CHECK(layout.governor[28] == 14u);
    CHECK(layout.governor[29] == 15u);
    CHECK(layout.governor[30] == 16u);
}

TEST_CASE("granularity refinement") {
    for (const auto& h : std::vector<std::vector<std::size_t>>{{}, {2}, {8}, {4, 4}, {2, 2, 2, 2}, {3, 7}}) {
        ModelSpec s;
        s.arch.hidden_sizes = h;
        s.variable_sigma = true;
        s.granularity = Granularity::single;
        const auto a = hyper_count(s);
        s.granularity = Granularity::layer;
        const auto b = hyper_count(s);
        s.granularity = Granularity::input_size;
        const auto c = hyper_count(s);
        CHECK(a <= b);
        CHECK(b <= c);
    }
}
