#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <map>

#include "lobswitch/market_model.hpp"

using namespace lobswitch;

namespace {

ModelParams quiet_params() {
    ModelParams p;
    p.sigma_a = p.sigma_b = 0.0;
    p.theta_a = p.theta_b = Intensity::constant(0.0);
    p.lambda_a = p.lambda_b = Intensity::constant(0.0);
    return p;
}

ModelParams busy_params() {
    ModelParams p;
    p.sigma_a = p.sigma_b = 10.0;
    p.delta_a = p.delta_b = 5.0;
    p.theta_a = p.theta_b = Intensity::linear(0.5);
    return p;
}

}  // namespace

TEST_CASE("intensity parsing and evaluation") {
    const auto lin = Intensity::parse("linear:0.5");
    CHECK(lin(3) == doctest::Approx(1.5));
    CHECK(lin(0) == 0.0);
    const auto tab = Intensity::parse("table:[0, 0.15]");
    CHECK(tab(1) == 0.0);
    CHECK(tab(2) == doctest::Approx(0.15));
    CHECK(tab(7) == doctest::Approx(0.15));
    CHECK(Intensity::parse(tab.to_string())(2) == tab(2));
    CHECK(Intensity::parse("0.25")(4) == 0.25);
    CHECK(Intensity::parse("constant:0.5")(1) == 0.5);
    CHECK_THROWS_AS(Intensity::parse("cubic:1"), std::invalid_argument);
    CHECK_THROWS_AS(Intensity::parse("table:[]"), std::invalid_argument);
}

TEST_CASE("zero-noise continuous step leaves the book unchanged") {
    const auto p = quiet_params();
    const BookState s{5, 5, 16, 15, ArrivalFlag::None};
    Rng rng = make_stream(3, 0);
    for (int i = 0; i < 100; ++i) {
        const auto o = step_continuous(s, p, 0.1, rng);
        CHECK(o.next == s);
        CHECK_FALSE(o.fills.buy);
        CHECK_FALSE(o.fills.sell);
    }
}

TEST_CASE("depletion moves the ask up and resets the volume") {
    ModelParams p = quiet_params();
    p.sigma_a = 1.0;
    StepNoise n;
    n.za = -10.0;
    const auto o = continuous_transition({0.5, 5, 16, 15, ArrivalFlag::None}, p, 1.0, n);
    CHECK(o.next.pa == 17);
    CHECK(o.next.qa == p.delta_a);
    CHECK(o.events.depleted_a == 1);
}

TEST_CASE("no arrivals at a one-tick spread") {
    const auto p = busy_params();
    StepNoise n;
    n.arrival_a = n.arrival_b = 0.0;  // would fire for any positive probability
    const auto o = continuous_transition({5, 5, 16, 15, ArrivalFlag::None}, p, 1.0, n);
    CHECK(o.next.arrival == ArrivalFlag::None);
    CHECK(arrival_probabilities(p, 1, 1.0).first == 0.0);
}

TEST_CASE("continuous step rejects bad input") {
    const auto p = busy_params();
    Rng rng = make_stream(1, 0);
    CHECK_THROWS_AS(step_continuous({5, 5, 16, 15}, p, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(step_continuous({5, 5, 15, 15}, p, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(step_continuous({-1, 5, 16, 15}, p, 1.0, rng), std::invalid_argument);
}

TEST_CASE("book simulation identities") {
    const auto p = busy_params();
    const BookState x0{5, 5, 20, 15, ArrivalFlag::None};
    const auto path = simulate_book(p, x0, 600.0, 1.0, 7);
    REQUIRE(path.size() == 601);
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& r = path[i];
        CHECK(r.pa - x0.pa == r.la - r.na);
        CHECK(r.pb - x0.pb == r.nb - r.lb);
        CHECK(r.pa - r.pb >= 1);
        CHECK(r.pa >= x0.pa - r.na);
        CHECK(r.pb <= x0.pb + r.nb);
        if (i > 0) {
            CHECK(std::abs(r.pa - path[i - 1].pa) <= 1);
            CHECK(std::abs(r.pb - path[i - 1].pb) <= 1);
        }
    }
    const auto again = simulate_book(p, x0, 600.0, 1.0, 7);
    CHECK(again.back().qa == path.back().qa);
    CHECK(again.back().na == path.back().na);
}

TEST_CASE("zero noise book simulation is constant") {
    const auto path = simulate_book(quiet_params(), {5, 5, 16, 15}, 10.0, 0.5, 1);
    for (const auto& r : path) {
        CHECK(r.qa == 5.0);
        CHECK(r.pa == 16);
        CHECK(r.pb == 15);
    }
    CHECK_THROWS_AS(simulate_book(quiet_params(), {5, 5, 16, 15}, 10.0, 0.3, 1), std::invalid_argument);
}

TEST_CASE("Binomial law at spread one has no arrivals") {
    const ModelParams p;
    const auto out = binomial_transitions({5, 5, 16, 15}, {}, p);
    double total = 0.0;
    for (const auto& o : out) {
        CHECK(o.next.arrival == ArrivalFlag::None);
        total += o.prob;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(out.size() == 12);
}

TEST_CASE("Binomial law at spread three") {
    const ModelParams p;
    const auto out = binomial_transitions({5, 5, 17, 14}, {}, p);
    CHECK(out.size() == 36);
    double total = 0.0, arrivals = 0.0, buy = 0.0;
    for (const auto& o : out) {
        total += o.prob;
        if (o.next.arrival != ArrivalFlag::None) arrivals += o.prob;
        if (o.fills.buy) buy += o.prob;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    // p_N = 0.3 * min(s - 1, 1) and hidden fills (0.5, 0.25, 0.25).
    CHECK(arrivals == doctest::Approx(0.3 * std::min(3 - 1, 1)));
    CHECK(buy == doctest::Approx(0.25));
}

TEST_CASE("Binomial depletion at volume one") {
    const ModelParams p;
    std::map<int, double> pa_prob;
    for (const auto& o : binomial_transitions({1, 1, 16, 15}, {}, p)) pa_prob[o.next.pa] += o.prob;
    CHECK(pa_prob[17] == doctest::Approx(0.5));
    CHECK(pa_prob[16] == doctest::Approx(0.5));
}

TEST_CASE("Binomial law rejects inadmissible hidden flags") {
    const ModelParams p;
    CHECK_THROWS_AS(binomial_transitions({5, 5, 16, 15}, {1, 1}, p), std::invalid_argument);
    CHECK_THROWS_AS(binomial_transitions({5, 5, 19, 18}, {1, 0}, p), std::invalid_argument);
}

TEST_CASE("Binomial sampler matches the enumerated law") {
    const ModelParams p;
    const BookState s{1, 3, 17, 14};
    std::map<std::tuple<int, int, int, int>, double> exact, sampled;
    for (const auto& o : binomial_transitions(s, {}, p, 1.0))
        exact[{o.next.pa, o.next.pb, int(o.next.arrival), int(o.fills.buy) * 2 + int(o.fills.sell)}] += o.prob;
    Rng rng = make_stream(11, 2);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto o = sample_binomial(s, p, 1.0, rng);
        sampled[{o.next.pa, o.next.pb, int(o.next.arrival), int(o.fills.buy) * 2 + int(o.fills.sell)}] += 1.0 / n;
    }
    for (const auto& [key, prob] : exact) {
        const double se = std::sqrt(prob * (1 - prob) / n);
        CHECK(std::abs(sampled[key] - prob) <= 4 * se + 1e-12);
    }
}
