#include "doctest.h"
#include "oracles.hpp"

#include "jscc/search.hpp"

using namespace jscc;
using doctest::Approx;

TEST_SUITE("search") {

TEST_CASE("gamma star") {
    CHECK(std::abs(gamma_star(0.0) - 0.5) < 1e-12);
    CHECK(gamma_star(0.125) == Approx(0.1439).epsilon(1e-3));
    for (double d : {0.0, 1.0 / 16, 0.125, 3.0 / 16, 0.375, 0.5}) {
        const double g = gamma_star(d);
        CHECK(std::abs(oracle::h2(g) - (2.0 - oracle::H(oracle::noise(d)))) < 1e-10);
        CHECK(std::abs(g - oracle::h2_inverse(2.0 - oracle::H(oracle::noise(d)))) < 1e-9);
        CHECK(g <= 0.5);
    }
    CHECK_THROWS_AS(gamma_star(0.25), std::invalid_argument);
    CHECK_THROWS_AS(gamma_star(0.7), std::invalid_argument);
}

TEST_CASE("grid spec") {
    GridSpec g;
    CHECK_NOTHROW(g.validate());
    CHECK(g.levels() == std::vector<unsigned>{4, 8, 16, 32, 64});
    g.step = 0.3;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g.step = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g.step = 0.5;
    g.restarts = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("outer maximization: exact cases") {
    GridSpec g;
    g.restarts = 4;
    auto r = maximize_ces_outer(example2_source(0.0, 0.5), example2_channel(NoiseSpec(0.0)), g);
    CHECK(r.best_value == Approx(1.0).epsilon(1e-12));
    CHECK(r.best_value == Approx(ces_outer_objective(example2_source(0.0, 0.5), example2_channel(NoiseSpec(0.0)),
                                                     r.x_tables)).epsilon(1e-10));

    std::vector<double> dead(8 * 4, 0.0);
    for (std::size_t x = 0; x < 8; ++x) dead[x * 4 + 2] = 1.0;
    auto z = maximize_ces_outer(example2_source(0.3, 0.3), table_channel({2, 2, 2}, 4, dead), g);
    CHECK(std::abs(z.best_value) < 1e-12);
}

TEST_CASE("outer maximization: gap and refinement") {
    const double d = 0.125;
    const auto src = example2_source(0.05, gamma_star(d));
    const auto ch = example2_channel(NoiseSpec(d));
    const double cap = 2.0 - oracle::H(oracle::noise(d));
    double prev = -1.0;
    for (double step : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        GridSpec g;
        g.step = step;
        g.restarts = 6;
        auto r = maximize_ces_outer(src, ch, g);
        CHECK(r.best_value < cap);
        CHECK(r.best_value >= prev);
        CHECK(std::abs(r.best_value - ces_outer_objective(src, ch, r.x_tables)) < 1e-10);
        REQUIRE(r.trace.size() == 6);
        CHECK(*std::max_element(r.trace.begin(), r.trace.end()) == Approx(r.best_value).epsilon(1e-10));
        prev = r.best_value;
    }
}

TEST_CASE("outer maximization does not depend on worker count") {
    const auto src = example2_source(0.1, 0.2);
    const auto ch = example2_channel(NoiseSpec(0.375));
    GridSpec g;
    g.step = 1.0 / 32;
    g.restarts = 5;
    g.workers = 1;
    auto a = maximize_ces_outer(src, ch, g);
    g.workers = 3;
    auto b = maximize_ces_outer(src, ch, g);
    CHECK(a.best_value == b.best_value);
    CHECK(a.trace == b.trace);
    for (int i = 0; i < 3; ++i) CHECK(a.x_tables[i] == b.x_tables[i]);
}

TEST_CASE("feasibility search") {
    const GridSpec g{1.0 / 16, 2, 50, 1e-9, 1, 0};
    {
        auto src = example2_source(0.0, gamma_star(0.0) - 0.02);
        auto ch = example2_channel(NoiseSpec(0.0));
        const auto q = identity_additive_part(2, src);
        const auto parts = decompose_common_parts(src);
        const auto witness = scheme_from_sv(src, parts, 2, copy_v_tables(src, ch, 2));
        const double w = eval_thm1(assemble_joint(src, ch, parts, q, witness)).min_slack();
        CHECK(w >= -kSlackTolerance);

        GridSpec one = g;
        one.restarts = 1;
        one.max_iters = 1;
        auto r0 = feasibility_search_thm1(src, ch, q, SchemeShape{}, one, witness);
        CHECK(r0.best_min_slack >= w - 1e-12);

        auto r = feasibility_search_thm1(src, ch, q, SchemeShape{}, g);
        CHECK(r.best_min_slack > 0.0);
        CHECK(r.best_min_slack == Approx(r.report.min_slack()).epsilon(1e-12));
        CHECK(std::abs(r.best_min_slack -
                       eval_thm1(assemble_joint(src, ch, parts, q, r.scheme)).min_slack()) < 1e-10);
    }
    {
        const double d = 0.125;
        auto src = example2_source(0.0, gamma_star(d) + 0.05);
        auto ch = example2_channel(NoiseSpec(d));
        auto r = feasibility_search_thm1(src, ch, identity_additive_part(2, src), SchemeShape{}, g);
        CHECK(r.best_min_slack < 0.0);
        // no right side can exceed 2 - H(N)
        const auto& tot = r.report.find("thm1.total", "");
        CHECK(tot.rhs <= 2.0 - NoiseSpec(d).entropy() + 1e-12);
    }
    {
        auto src = example2_source(0.0, 0.0);
        auto ch = example2_channel(NoiseSpec(0.125));
        auto r = feasibility_search_thm1(src, ch, identity_additive_part(2, src), SchemeShape{}, g);
        double min_rhs = 1e9;
        for (const auto& e : r.report.entries) min_rhs = std::min(min_rhs, e.rhs);
        CHECK(r.best_min_slack == Approx(min_rhs).epsilon(1e-12));
        CHECK(r.best_min_slack >= 0.0);
    }
}

TEST_CASE("feasibility search rejects out-of-cap shapes") {
    auto src = example2_source(0.1, 0.1);
    auto ch = example2_channel(NoiseSpec(0.125));
    const GridSpec g{1.0 / 8, 1, 2, 1e-9, 1, 0};
    CHECK_THROWS_AS(feasibility_search_thm1(src, ch, std::nullopt, SchemeShape{5, {1, 1, 1}, 2}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS(feasibility_search_thm1(src, ch, std::nullopt, SchemeShape{1, {1, 1, 1}, 4}, g),
                    std::invalid_argument);
}

TEST_CASE("perturbed copy tables") {
    auto src = example2_source(0.1, 0.1);
    auto ch = example2_channel(NoiseSpec(0.125));
    auto t = perturbed_copy_tables(src, ch, 0.2);
    std::size_t g0[] = {1, 0};
    CHECK(t[0].row(t[0].given_flat(g0))[0] == Approx(0.8));
    CHECK(t[0].row(t[0].given_flat(g0))[1] == Approx(0.2));
    std::size_t g1[] = {0, 1};
    CHECK(t[1].row(t[1].given_flat(g1))[1] == 1.0);
    CHECK(t[1] == copy_v_tables(src, ch, 2)[1]);
}

TEST_CASE("sweep rows") {
    SweepOptions o;
    o.ces_grid.step = 1.0 / 32;
    o.ces_grid.restarts = 4;
    const double gs0 = gamma_star(0.0);
    auto rows = improvement_sweep(0.0, {0.0}, {gs0, 0.0}, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].lhs_sum == Approx(oracle::h2(gs0)).epsilon(1e-12));
    CHECK(std::abs(rows[0].ces_ceiling - oracle::h2(gs0)) < 1.0 / 32);
    CHECK(rows[0].thm1_min_slack >= -kSlackTolerance);
    CHECK_FALSE(rows[0].improved);
    CHECK(rows[1].lhs_sum == 0.0);
    CHECK(rows[1].thm1_min_slack >= 0.0);
    CHECK_FALSE(rows[1].improved);

    // at delta = 1/8 the grid ceiling at sigma = 0, gamma = gamma* stays below h(gamma*)
    const double gs = gamma_star(0.125);
    auto r8 = improvement_sweep(0.125, {0.0, 0.001}, {gs, gs - 0.01}, o);
    CHECK(r8[0].ces_ceiling < oracle::h2(gs));
    CHECK(r8[0].thm1_min_slack >= -kSlackTolerance);
    bool any = false;
    for (const auto& r : r8) any = any || r.improved;
    CHECK(any);

    const auto csv = sweep_to_csv(rows);
    CHECK(csv.rfind("delta,sigma,gamma,lhs_sum_bits,ces_ceiling_bits,thm1_min_slack_bits,improved_flag\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

}  // TEST_SUITE
