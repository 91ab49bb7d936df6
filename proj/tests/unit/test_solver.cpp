#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>

#include "lobswitch/accounting.hpp"
#include "lobswitch/solver.hpp"

using namespace lobswitch;

namespace {

Problem small_problem() {
    Problem p;
    p.grid = GridSpec{3, 3, -4, 4, 13, 16, 12, 15, 0.0, 2, 1.0};
    p.params.delta_a = p.params.delta_b = 2.0;
    p.params.limits = {16, 12};
    p.reward.valuation = InventoryValuation::liquidation(1, 1);
    return p;
}

ValueLayer constant_layer(std::size_t n, double c) {
    NodeSolution s;
    s.v0 = s.va = s.vb = c;
    return ValueLayer(n, s);
}

}  // namespace

TEST_CASE("expectation of a constant is the constant") {
    const auto p = small_problem();
    const auto grid = build_grid(p.grid);
    const auto next = constant_layer(grid.size(), 3.25);
    for (std::size_t y = 0; y < grid.size(); y += 37)
        for (const auto& h : admissible_hidden(grid.node(y).pa, grid.node(y).pb, p.params.limits))
            CHECK(expectation_estimate(p, grid, 0, next, y, h) == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("one-tick spread touches only no-arrival values") {
    const auto p = small_problem();
    const auto grid = build_grid(p.grid);
    auto next = constant_layer(grid.size(), 1.0);
    for (auto& s : next) s.va = s.vb = 1e9;
    const auto y = grid.index({2, 2, 0, 14, 13});
    CHECK(expectation_estimate(p, grid, 0, next, y, {}) == doctest::Approx(1.0));
    const auto wide = grid.index({2, 2, 0, 15, 13});
    CHECK(expectation_estimate(p, grid, 0, next, wide, {}) > 1.0);
}

TEST_CASE("terminal layer equals brute force over the closing trades") {
    Problem p;  // desk defaults
    const auto grid = build_grid(p.grid);
    const GridNode x{5, 5, 0, 16, 15};
    const auto layer = terminal_layer(p, grid);
    const auto& sol = layer[grid.index(x)];

    double best = -1e300;
    for (double ua = 0; ua <= 2.0 + 1e-12; ua += 0.25)
        for (double ub = 0; ub <= 3.0 + 1e-12; ub += 0.25) {
            const SwitchDecision u{ua, ub};
            const auto [book, inv] = apply_switch(EpochKind::Terminal, x.book(), 0.0, u, p.params);
            const double cash = net_cash_flow(EpochKind::Terminal, x.book(), u, p.params);
            best = std::max(best, terminal_reward(p.reward, inv, cash, book.pa, book.pb));
        }
    CHECK(sol.v0 == doctest::Approx(best).epsilon(1e-12));
    CHECK(sol.va == sol.v0);
    CHECK_FALSE(sol.wait);
}

TEST_CASE("Done epoch keeps the continuation") {
    const auto p = small_problem();
    const auto grid = build_grid(p.grid);
    std::vector<double> cont(grid.size());
    for (std::size_t i = 0; i < cont.size(); ++i) cont[i] = double(i);
    const auto r = intervention_max(p, grid, EpochKind::Done, grid.node(17), cont);
    CHECK(r.value == 17.0);
    CHECK(r.u == SwitchDecision{});
}

TEST_CASE("zero-opportunity model has zero value") {
    Problem p;
    p.grid = GridSpec{2, 2, -2, 2, 16, 16, 15, 15, 0.0, 3, 1.0};
    p.params.sigma_a = p.params.sigma_b = 0.0;
    p.params.theta_a = p.params.theta_b = Intensity::constant(0.0);
    p.params.lambda_a = p.params.lambda_b = Intensity::constant(0.0);
    p.params.limits = {16, 15};
    p.reward.r_i = 0.0;
    p.reward.valuation = InventoryValuation::linear();
    const auto table = solve(p);
    for (int k = 0; k <= table.steps(); ++k)
        for (const auto& s : table.layer(k)) CHECK(s.v0 == 0.0);
}

TEST_CASE("dynamic programming principle holds on the table") {
    const auto p = small_problem();
    const auto table = solve(p);
    const auto& grid = table.grid();
    const auto& next = table.layer(1);
    for (std::size_t i = 0; i < grid.size(); i += 11) {
        const auto x = grid.node(i);
        const auto& s = table.at(0, i);
        double wait_best = -1e300;
        for (const auto& h : admissible_hidden(x.pa, x.pb, p.params.limits))
            wait_best = std::max(wait_best, p.reward.r_c * hidden_drift(x.pa, x.pb, h, p.params) * p.grid.dt +
                                                expectation_estimate(p, grid, 0, next, i, h));
        CHECK(s.v0 >= wait_best - 1e-9);
        if (s.wait) CHECK(s.v0 == doctest::Approx(wait_best).epsilon(1e-12));
        if (x.pa - x.pb >= 2) {
            CHECK(std::isfinite(s.va));
            CHECK(std::isfinite(s.vb));
        } else {
            CHECK(std::isnan(s.va));
        }
    }
}

TEST_CASE("thread count does not change the table") {
    const auto p = small_problem();
    const auto a = solve(p, 1);
    const auto b = solve(p, 3);
    for (int k = 0; k <= a.steps(); ++k)
        for (std::size_t i = 0; i < a.grid().size(); ++i) {
            const auto& x = a.at(k, i);
            const auto& y = b.at(k, i);
            CHECK(std::memcmp(&x.v0, &y.v0, sizeof(double)) == 0);
            CHECK(x.u0 == y.u0);
            CHECK(x.h == y.h);
        }
}

TEST_CASE("regular trader never beats the internalizer and premium lowers value") {
    auto p = small_problem();
    p.trader = TraderKind::Regular;
    const auto reg = solve(p);
    p.trader = TraderKind::Internalizing;
    const auto int0 = solve(p);
    p.params.epsilon = 0.5;
    const auto int1 = solve(p);
    for (std::size_t i = 0; i < reg.grid().size(); ++i) {
        CHECK(reg.at(0, i).v0 <= int0.at(0, i).v0 + 1e-9);
        CHECK(int1.at(0, i).v0 <= int0.at(0, i).v0 + 1e-9);
    }
}

TEST_CASE("Monte Carlo expectation on a two-outcome kernel") {
    Problem p;
    p.model = ModelKind::Continuous;
    p.grid = GridSpec{3, 3, -10, 10, 16, 16, 15, 15, 0.0, 1, 1.0};
    p.params.sigma_a = p.params.sigma_b = 0.0;
    p.params.theta_a = p.params.theta_b = Intensity::constant(0.0);
    p.params.lambda_a = p.params.lambda_b = Intensity::constant(0.5);
    p.params.delta_a = p.params.delta_b = 2.0;
    p.mc_samples = 20000;
    const auto grid = build_grid(p.grid);
    ValueLayer next(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) next[i].v0 = grid.node(i).inv;
    const auto y = grid.index({2, 2, 0, 16, 15});
    // Exact mixture: half the time a buy fill adds Delta shares.
    const double exact = 0.5 * 2.0;
    const double se = std::sqrt(0.25 * 4.0 / p.mc_samples);
    CHECK(std::abs(expectation_estimate(p, grid, 0, next, y, {1, 0}) - exact) <= 3 * se);
    CHECK(expectation_estimate(p, grid, 0, next, y, {}) == 0.0);
}

TEST_CASE("problem validation") {
    Problem p;
    p.params.theta_a = p.params.theta_b = Intensity::constant(0.6);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.model = ModelKind::Continuous;
    CHECK_NOTHROW(p.validate());
    CHECK(parse_model_kind("continuous") == ModelKind::Continuous);
    CHECK_THROWS(parse_model_kind("trinomial"));
}
