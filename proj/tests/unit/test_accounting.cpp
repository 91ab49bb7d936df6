#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "lobswitch/accounting.hpp"

using namespace lobswitch;

namespace {

// Price of each share bought when taking u whole ask limits: the best
// quote's q shares at p, then Delta shares at p+1, ..., p+u-1.
double ladder_ask_cash(double q, int p, int u, double delta) {
    double cash = 0.0;
    for (int level = 0; level < u; ++level) cash += (level == 0 ? q : delta) * (p + level);
    return cash;
}

double ladder_shares(double q, int u, double delta) {
    double shares = 0.0;
    for (int level = 0; level < u; ++level) shares += level == 0 ? q : delta;
    return shares;
}

}  // namespace

TEST_CASE("integer and fractional parts") {
    CHECK(integer_part(-0.4) == -1);
    CHECK(fractional_part(-0.4) == doctest::Approx(0.6));
    CHECK(integer_part(2.0) == 2);
    CHECK(fractional_part(2.0) == 0.0);
}

TEST_CASE("interior control rectangle") {
    const PriceLimits limits{18, 12};
    const auto set = admissible_controls(EpochKind::Interior, 16, 15, TraderKind::Regular, limits);
    std::size_t expected = 0;
    for (int a = 0; a <= 18 - 16; ++a)
        for (int b = 0; b <= 15 - 12; ++b)
            if (a || b) ++expected;
    CHECK(set.size() == expected);
    CHECK(set.size() == 11);
    CHECK(std::find(set.begin(), set.end(), SwitchDecision{0, 0}) == set.end());
    CHECK(std::is_sorted(set.begin(), set.end(), [](auto& x, auto& y) {
        return x.ua != y.ua ? x.ua < y.ua : x.ub < y.ub;
    }));
    CHECK_THROWS_AS(admissible_controls(EpochKind::Interior, 15, 15, TraderKind::Regular, limits),
                    std::invalid_argument);
}

TEST_CASE("done epoch allows nothing") {
    const auto set = admissible_controls(EpochKind::Done, 16, 15, TraderKind::Internalizing, {});
    REQUIRE(set.size() == 1);
    CHECK(set[0] == SwitchDecision{0, 0});
}

TEST_CASE("arrival fill sets") {
    const PriceLimits limits{18, 12};
    ControlMesh mesh;
    mesh.share_granular_arrivals = false;
    auto ua_values = [&](int pa, TraderKind trader) {
        std::vector<double> out;
        for (const auto& u : admissible_controls(EpochKind::AskArrival, pa, 14, trader, limits, mesh, 5))
            if (std::find(out.begin(), out.end(), u.ua) == out.end()) out.push_back(u.ua);
        return out;
    };
    CHECK(ua_values(18, TraderKind::Internalizing) == std::vector<double>{-1.0, 0.0});
    CHECK(ua_values(17, TraderKind::Regular) == std::vector<double>{-1.0, 0.0, 1.0});
    const auto internal = ua_values(16, TraderKind::Internalizing);
    CHECK(internal.front() == -1.0);
    CHECK(std::count(internal.begin(), internal.end(), 2.0) == 1);
    CHECK(std::count(internal.begin(), internal.end(), -0.75) == 1);
    mesh.share_granular_arrivals = true;
    const auto granular = arrival_fill_set(3, TraderKind::Internalizing, mesh, 4.0);
    CHECK(granular == std::vector<double>{-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("regular controls are a subset of internalizing controls") {
    const PriceLimits limits{18, 12};
    for (auto kind : {EpochKind::Interior, EpochKind::AskArrival, EpochKind::BidArrival, EpochKind::Terminal})
        for (int pa = 13; pa <= 18; ++pa)
            for (int pb = 12; pb < pa; ++pb) {
                const auto reg = admissible_controls(kind, pa, pb, TraderKind::Regular, limits, {}, 5);
                const auto in = admissible_controls(kind, pa, pb, TraderKind::Internalizing, limits, {}, 5);
                for (const auto& u : reg) CHECK(std::find(in.begin(), in.end(), u) != in.end());
            }
}

TEST_CASE("shares traded") {
    CHECK(shares_traded(Side::Ask, EpochKind::Interior, false, 5, 0, 5) == 0.0);
    CHECK(shares_traded(Side::Ask, EpochKind::Interior, false, 5, 3, 5) == ladder_shares(5, 3, 5));
    CHECK(shares_traded(Side::Ask, EpochKind::Interior, false, 5, 3, 5) == 15.0);
    CHECK(shares_traded(Side::Ask, EpochKind::AskArrival, true, 5, -0.4, 5) ==
          doctest::Approx((-0.4 - std::floor(-0.4)) * 5));
    CHECK(shares_traded(Side::Ask, EpochKind::Terminal, false, 5, 0.5, 5) == 2.5);
    CHECK_THROWS_AS(shares_traded(Side::Ask, EpochKind::Interior, false, 5, 1.5, 5), std::invalid_argument);
    CHECK_THROWS_AS(shares_traded(Side::Ask, EpochKind::Interior, false, 5, -1, 5), std::invalid_argument);
}

TEST_CASE("cash flows") {
    CHECK(cash_flow(Side::Ask, EpochKind::Interior, false, 5, 16, 2, 5, 0) == ladder_ask_cash(5, 16, 2, 5));
    CHECK(cash_flow(Side::Ask, EpochKind::Interior, false, 5, 16, 2, 5, 0) == 165.0);
    CHECK(cash_flow(Side::Ask, EpochKind::AskArrival, true, 5, 16, 0, 5, 0) == (16 - 1) * 5.0);
    CHECK(cash_flow(Side::Ask, EpochKind::AskArrival, true, 5, 16, -0.4, 5, 0.1) ==
          doctest::Approx((16 + 0.1) * 0.6 * 5));
    const BookState book{5, 5, 16, 15};
    CHECK(net_cash_flow(EpochKind::Interior, book, {0, 0}, ModelParams{}) == 0.0);
}

TEST_CASE("bid ladder mirrors the ask ladder") {
    // Selling u limits at the bid fetches p, p-1, ..., p-u+1.
    for (int u = 1; u <= 5; ++u) {
        double expected = 0.0;
        for (int level = 0; level < u; ++level) expected += (level == 0 ? 4.0 : 5.0) * (15 - level);
        CHECK(cash_flow(Side::Bid, EpochKind::Interior, false, 4, 15, u, 5, 0) == expected);
    }
}

TEST_CASE("premium lowers the internalizer's cash") {
    const BookState book{5, 5, 16, 14};
    ModelParams p;
    double last = 1e300;
    for (double eps : {0.0, 0.25, 0.5, 1.0}) {
        p.epsilon = eps;
        const double f = net_cash_flow(EpochKind::AskArrival, book, {-0.4, 0}, p);
        CHECK(f <= last);
        last = f;
    }
}

TEST_CASE("apply_switch examples") {
    const ModelParams p;
    auto [book, inv] = apply_switch(EpochKind::Interior, {5, 5, 16, 15}, 0, {2, 0}, p);
    CHECK(book.qa == 5.0);
    CHECK(book.qb == 5.0);
    CHECK(book.pa == 18);
    CHECK(book.pb == 15);
    CHECK(inv == ladder_shares(5, 2, 5));
    auto [same, inv2] = apply_switch(EpochKind::Interior, {5, 5, 16, 15}, 3, {0, 0}, p);
    CHECK(same == BookState{5, 5, 16, 15});
    CHECK(inv2 == 3.0);
    auto [term, inv3] = apply_switch(EpochKind::Terminal, {4, 5, 16, 15}, 1, {0.5, 0}, p);
    CHECK(term.qa == (1 - 0.5) * 4);
    CHECK(inv3 == 1 + 0.5 * 4);
    CHECK_THROWS_AS(apply_switch(EpochKind::AskArrival, {5, 5, 16, 15}, 0, {-1, 0}, p), std::logic_error);
}

TEST_CASE("switching never narrows the spread except arrival standing") {
    const ModelParams p;
    const PriceLimits limits = p.limits;
    for (int pa = 14; pa <= 18; ++pa)
        for (int pb = 12; pb <= pa - 2; ++pb)
            for (auto kind : {EpochKind::Interior, EpochKind::AskArrival, EpochKind::BidArrival}) {
                const BookState b{5, 5, pa, pb};
                for (const auto& u : admissible_controls(kind, pa, pb, TraderKind::Internalizing, limits, {}, 5)) {
                    const auto after = apply_switch(kind, b, 0, u, p).first;
                    CHECK(after.pa >= pa - (integer_part(u.ua) == -1 ? 1 : 0));
                    CHECK(after.pb <= pb + (integer_part(u.ub) == -1 ? 1 : 0));
                }
            }
}

TEST_CASE("hidden orders") {
    ModelParams p;
    p.lambda_a = p.lambda_b = Intensity::constant(0.5);
    CHECK(hidden_drift(16, 15, {0, 0}, p) == 0.0);
    CHECK(hidden_drift(16, 15, {1, 0}, p) == doctest::Approx(-5 * 15.5 * 0.5));
    CHECK(hidden_drift(16, 15, {0, 1}, p) == doctest::Approx(38.75));
    CHECK_THROWS_AS(hidden_drift(16, 15, {1, 1}, p), std::invalid_argument);
    CHECK_FALSE(is_admissible({1, 0}, 19, 18, p.limits));
    CHECK_FALSE(is_admissible({0, 1}, 12, 11, p.limits));

    const TraderPosition start{0, 0};
    const auto bought = apply_hidden_fills(start, 16, 15, {1, 0}, {true, false}, p);
    CHECK(bought.inventory == 5.0);
    CHECK(bought.cash == -5 * 15.5);
    const auto sold = apply_hidden_fills(start, 16, 15, {0, 1}, {false, true}, p);
    CHECK(sold.inventory == -5.0);
    CHECK(sold.cash == 77.5);
    const auto none = apply_hidden_fills(start, 16, 15, {0, 0}, {true, true}, p);
    CHECK(none.inventory == 0.0);
    CHECK(none.cash == 0.0);
}
