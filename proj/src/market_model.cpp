#include "lobswitch/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lobswitch/accounting.hpp"

namespace lobswitch {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

std::string_view to_string(TraderKind kind) {
    return kind == TraderKind::Regular ? "regular" : "internalizing";
}

std::string_view to_string(EpochKind kind) {
    switch (kind) {
        case EpochKind::Interior: return "interior";
        case EpochKind::AskArrival: return "ask-arrival";
        case EpochKind::BidArrival: return "bid-arrival";
        case EpochKind::Terminal: return "terminal";
        case EpochKind::Done: return "done";
    }
    return "?";
}

std::string_view to_string(ArrivalFlag flag) {
    switch (flag) {
        case ArrivalFlag::None: return "none";
        case ArrivalFlag::Ask: return "ask";
        case ArrivalFlag::Bid: return "bid";
        case ArrivalFlag::Both: return "both";
    }
    return "?";
}

TraderKind parse_trader_kind(std::string_view text) {
    if (text == "regular" || text == "reg") return TraderKind::Regular;
    if (text == "internalizing" || text == "int") return TraderKind::Internalizing;
    throw std::invalid_argument("unknown trader kind '" + std::string(text) +
                                "' (expected regular or internalizing)");
}

void ModelParams::validate() const {
    const auto finite_nonneg = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    };
    finite_nonneg(sigma_a, "sigma_a");
    finite_nonneg(sigma_b, "sigma_b");
    finite_nonneg(epsilon, "epsilon");
    if (!(delta_a > 0.0) || !std::isfinite(delta_a)) throw std::invalid_argument("delta_a must be > 0");
    if (!(delta_b > 0.0) || !std::isfinite(delta_b)) throw std::invalid_argument("delta_b must be > 0");
    if (limits.pb_under >= limits.pa_bar)
        throw std::invalid_argument("pb_under must be below pa_bar");
}

Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

StepNoise draw_noise(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    StepNoise n;
    n.za = normal(rng);
    n.zb = normal(rng);
    n.arrival_a = unif(rng);
    n.arrival_b = unif(rng);
    n.order = unif(rng);
    n.fill_a = unif(rng);
    n.fill_b = unif(rng);
    return n;
}

void validate_state(const BookState& state) {
    if (state.pa <= state.pb)
        throw std::invalid_argument("book state needs pa > pb, got pa=" + std::to_string(state.pa) +
                                    " pb=" + std::to_string(state.pb));
    if (!(state.qa >= 0.0) || !(state.qb >= 0.0) || !std::isfinite(state.qa) ||
        !std::isfinite(state.qb))
        throw std::invalid_argument("book volumes must be finite and >= 0");
}

BookState settle_arrivals(const BookState& state, const ModelParams& params) {
    BookState out = state;
    const bool ask = state.arrival == ArrivalFlag::Ask || state.arrival == ArrivalFlag::Both;
    const bool bid = state.arrival == ArrivalFlag::Bid || state.arrival == ArrivalFlag::Both;
    if (ask) {
        out.pa -= 1;
        out.qa = params.delta_a;
    }
    if (bid) {
        out.pb += 1;
        out.qb = params.delta_b;
    }
    out.arrival = ArrivalFlag::None;
    if (out.pa <= out.pb) throw std::logic_error("settle_arrivals: arrivals would cross the book");
    return out;
}

std::pair<double, double> arrival_probabilities(const ModelParams& params, int spread, double dt) {
    if (spread <= 1) return {0.0, 0.0};
    const double a = clamp01(params.theta_a(spread) * dt);
    const double b = clamp01(params.theta_b(spread) * dt);
    return {a, b};
}

std::pair<double, double> fill_probabilities(const ModelParams& params, int spread, double dt) {
    return {clamp01(params.lambda_a(spread) * dt), clamp01(params.lambda_b(spread) * dt)};
}

TransitionOutcome continuous_transition(const BookState& state, const ModelParams& params,
                                        double dt, const StepNoise& noise, bool single_arrival) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    validate_state(state);

    const int spread_before = state.spread();
    const double root_dt = std::sqrt(dt);
    TransitionOutcome out;
    out.prob = 1.0;
    out.next = state;
    out.next.arrival = ArrivalFlag::None;

    const double qa = state.qa + params.sigma_a * root_dt * noise.za;
    if (qa <= 0.0) {
        out.next.pa += 1;
        out.next.qa = params.delta_a;
        out.events.depleted_a = 1;
    } else {
        out.next.qa = qa;
    }
    const double qb = state.qb + params.sigma_b * root_dt * noise.zb;
    if (qb <= 0.0) {
        out.next.pb -= 1;
        out.next.qb = params.delta_b;
        out.events.depleted_b = 1;
    } else {
        out.next.qb = qb;
    }

    const auto [p_arr_a, p_arr_b] = arrival_probabilities(params, spread_before, dt);
    bool ask = noise.arrival_a < p_arr_a;
    bool bid = noise.arrival_b < p_arr_b;
    if (ask && bid && (single_arrival || out.next.spread() <= 2)) {
        if (noise.order < 0.5)
            bid = false;
        else
            ask = false;
    }
    out.events.arrived_a = ask;
    out.events.arrived_b = bid;
    out.next.arrival = ask && bid ? ArrivalFlag::Both
                       : ask      ? ArrivalFlag::Ask
                       : bid      ? ArrivalFlag::Bid
                                  : ArrivalFlag::None;

    const auto [p_fill_a, p_fill_b] = fill_probabilities(params, spread_before, dt);
    out.fills.buy = noise.fill_a < p_fill_a;
    out.fills.sell = noise.fill_b < p_fill_b;
    return out;
}

TransitionOutcome step_continuous(const BookState& state, const ModelParams& params, double dt,
                                  Rng& rng) {
    return continuous_transition(state, params, dt, draw_noise(rng));
}

std::vector<BookPathRow> simulate_book(const ModelParams& params, const BookState& initial,
                                       double t_end, double dt, std::uint64_t seed) {
    params.validate();
    validate_state(initial);
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("need dt > 0 and t_end >= 0");
    const double ratio = t_end / dt;
    const auto steps = static_cast<long>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("dt must divide t_end");

    Rng rng = make_stream(seed, 0);
    std::vector<BookPathRow> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    BookState book = initial;
    book.arrival = ArrivalFlag::None;
    BookPathRow row{0.0, book.qa, book.qb, book.pa, book.pb, 0, 0, 0, 0};
    path.push_back(row);
    for (long k = 1; k <= steps; ++k) {
        const auto out = step_continuous(book, params, dt, rng);
        book = settle_arrivals(out.next, params);
        row.t = k * dt;
        row.qa = book.qa;
        row.qb = book.qb;
        row.pa = book.pa;
        row.pb = book.pb;
        row.la += out.events.depleted_a;
        row.lb += out.events.depleted_b;
        row.na += out.events.arrived_a;
        row.nb += out.events.arrived_b;
        path.push_back(row);
    }
    return path;
}

std::vector<TransitionOutcome> binomial_transitions(const BookState& state, HiddenFlags h,
                                                    const ModelParams& params, double dt) {
    validate_state(state);
    if (!is_admissible(h, state.pa, state.pb, params.limits))
        throw std::invalid_argument("binomial_transitions: inadmissible hidden flags");
    const int s = state.spread();
    const auto [a, b] = arrival_probabilities(params, s, dt);
    const auto [fa, fb] = fill_probabilities(params, s, dt);
    if (a + b > 1.0 + 1e-12 || fa + fb > 1.0 + 1e-12)
        throw std::invalid_argument("binomial_transitions: event probabilities exceed one");
    std::vector<TransitionOutcome> out;
    out.reserve(36);
    for_each_binomial_outcome(state, params, dt,
                              [&out](const TransitionOutcome& o) { out.push_back(o); });
    return out;
}

TransitionOutcome sample_binomial(const BookState& state, const ModelParams& params, double dt,
                                  Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int ma = unif(rng) < 0.5 ? -1 : 1;
    const int mb = unif(rng) < 0.5 ? -1 : 1;
    const double u_arrival = unif(rng);
    const double u_fill = unif(rng);
    TransitionOutcome out = binomial_volume_move(state, params, ma, mb);
    const int s = state.spread();
    const auto [a, b] = arrival_probabilities(params, s, dt);
    const auto [fa, fb] = fill_probabilities(params, s, dt);
    if (u_arrival < a) {
        out.next.arrival = ArrivalFlag::Ask;
        out.events.arrived_a = 1;
    } else if (u_arrival < a + b) {
        out.next.arrival = ArrivalFlag::Bid;
        out.events.arrived_b = 1;
    }
    out.fills.buy = u_fill < fa;
    out.fills.sell = !out.fills.buy && u_fill < fa + fb;
    out.prob = 1.0;
    return out;
}

}  // namespace lobswitch
