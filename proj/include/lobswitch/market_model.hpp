#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "lobswitch/intensity.hpp"
#include "lobswitch/types.hpp"

namespace lobswitch {

/// Market parameters shared by the continuous and the Binomial kernels.
struct ModelParams {
    double sigma_a = 1.0;  ///< volume volatility at the ask, shares per sqrt(time)
    double sigma_b = 1.0;
    double delta_a = 5.0;  ///< depth of every limit beyond the best ask
    double delta_b = 5.0;
    Intensity theta_a = Intensity::table({0.0, 0.15});  ///< within-spread sell arrivals
    Intensity theta_b = Intensity::table({0.0, 0.15});
    Intensity lambda_a = Intensity::constant(0.25);  ///< dark-pool liquidity hitting a resting buy
    Intensity lambda_b = Intensity::constant(0.25);
    PriceLimits limits{};
    double epsilon = 0.0;  ///< internalization premium per share

    /// Throws std::invalid_argument on non-finite or out-of-range values.
    void validate() const;
};

/// Which event counters moved during one step.
struct EventCounts {
    int depleted_a = 0;  ///< increments of L^a
    int depleted_b = 0;
    int arrived_a = 0;   ///< increments of N^a
    int arrived_b = 0;
};

struct TransitionOutcome {
    double prob = 1.0;
    BookState next{};
    HiddenFills fills{};
    EventCounts events{};
};

/// Random inputs of one continuous-model step. Kept explicit so the solver
/// can reuse the same draws across candidate controls.
struct StepNoise {
    double za = 0.0;  ///< standard normal
    double zb = 0.0;
    double arrival_a = 1.0;  ///< uniforms in [0,1)
    double arrival_b = 1.0;
    double order = 0.0;
    double fill_a = 1.0;
    double fill_b = 1.0;
};

using Rng = std::mt19937_64;

/// Deterministic stream keyed by (seed, a, b). Parallel workers derive
/// their streams from the node/step/path they process, never from a
/// shared generator.
Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

StepNoise draw_noise(Rng& rng);

/// Throws std::invalid_argument unless pa > pb and both volumes are >= 0.
void validate_state(const BookState& state);

/// Applies the effect of a within-spread arrival left standing: the
/// arrival side moves one tick inward and carries a fresh limit.
BookState settle_arrivals(const BookState& state, const ModelParams& params);

/// One Euler step of the continuous model driven by explicit noise.
///
/// Volumes move by sigma * sqrt(dt) * z; a volume at or below zero is a
/// depletion (price one tick outward, volume reset to the depth). Arrivals
/// then fire with probability theta(spread) * dt, clamped to [0,1], and only
/// when the spread before the step exceeds one tick. The returned book is
/// the pre-arrival book with `arrival` set; use settle_arrivals to let the
/// arrivals stand. With `single_arrival`, a simultaneous ask and bid arrival
/// is reduced to one side by a fair coin; otherwise a double arrival is
/// kept unless the spread after depletions is only two ticks, where the
/// coin drops one side so that settling keeps the spread positive.
TransitionOutcome continuous_transition(const BookState& state, const ModelParams& params,
                                        double dt, const StepNoise& noise,
                                        bool single_arrival = false);

/// Draws noise from `rng` and calls continuous_transition.
TransitionOutcome step_continuous(const BookState& state, const ModelParams& params, double dt,
                                  Rng& rng);

struct BookPathRow {
    double t = 0.0;
    double qa = 0.0;
    double qb = 0.0;
    int pa = 0;
    int pb = 0;
    long la = 0;
    long lb = 0;
    long na = 0;
    long nb = 0;
};

/// Uncontrolled book path on the mesh {0, dt, ..., t_end}. Row 0 is the
/// initial state; all counters start at zero.
std::vector<BookPathRow> simulate_book(const ModelParams& params, const BookState& initial,
                                       double t_end, double dt, std::uint64_t seed);

std::pair<double, double> arrival_probabilities(const ModelParams& params, int spread, double dt);
std::pair<double, double> fill_probabilities(const ModelParams& params, int spread, double dt);

/// Moves each volume by `ma`, `mb` (+1 or -1) and applies depletions.
inline TransitionOutcome binomial_volume_move(const BookState& state, const ModelParams& params,
                                              int ma, int mb) {
    TransitionOutcome out;
    out.next = state;
    out.next.arrival = ArrivalFlag::None;
    out.next.qa = state.qa + ma;
    if (out.next.qa <= 0.0) {
        out.next.pa += 1;
        out.next.qa = params.delta_a;
        out.events.depleted_a = 1;
    }
    out.next.qb = state.qb + mb;
    if (out.next.qb <= 0.0) {
        out.next.pb -= 1;
        out.next.qb = params.delta_b;
        out.events.depleted_b = 1;
    }
    return out;
}

/// Visitor over the Binomial one-step law.
///
/// Each volume moves by -1 or +1 with probability 1/2; an ask arrival, a bid
/// arrival or neither occurs with probabilities theta_a(s) dt, theta_b(s) dt
/// and the remainder (zero when s = 1); a dark-pool buy fill, sell fill or
/// neither occurs with probabilities lambda_a(s) dt, lambda_b(s) dt and the
/// remainder. The groups are independent. Branches of probability zero are
/// skipped. `next` is the pre-arrival book with the arrival flag set.
template <typename Visit>
void for_each_binomial_outcome(const BookState& state, const ModelParams& params, double dt,
                               Visit&& visit) {
    const int s = state.spread();
    const auto [arr_a, arr_b] = arrival_probabilities(params, s, dt);
    const auto [fill_a, fill_b] = fill_probabilities(params, s, dt);
    const double arrival_p[3] = {1.0 - arr_a - arr_b, arr_a, arr_b};
    const ArrivalFlag arrival_f[3] = {ArrivalFlag::None, ArrivalFlag::Ask, ArrivalFlag::Bid};
    const double fill_p[3] = {1.0 - fill_a - fill_b, fill_a, fill_b};
    const HiddenFills fill_f[3] = {{false, false}, {true, false}, {false, true}};

    for (int ma = -1; ma <= 1; ma += 2) {
        for (int mb = -1; mb <= 1; mb += 2) {
            const TransitionOutcome out = binomial_volume_move(state, params, ma, mb);
            for (int ai = 0; ai < 3; ++ai) {
                if (arrival_p[ai] <= 0.0) continue;
                for (int fi = 0; fi < 3; ++fi) {
                    if (fill_p[fi] <= 0.0) continue;
                    TransitionOutcome o = out;
                    o.prob = 0.25 * arrival_p[ai] * fill_p[fi];
                    o.next.arrival = arrival_f[ai];
                    o.events.arrived_a = ai == 1;
                    o.events.arrived_b = ai == 2;
                    o.fills = fill_f[fi];
                    visit(static_cast<const TransitionOutcome&>(o));
                }
            }
        }
    }
}

/// One draw from the Binomial law (same branches as the visitor).
TransitionOutcome sample_binomial(const BookState& state, const ModelParams& params, double dt,
                                  Rng& rng);

/// Exact enumeration of the Binomial law from `state` while the trader
/// rests dark-pool orders `h`. Throws if `h` is inadmissible at `state`.
std::vector<TransitionOutcome> binomial_transitions(const BookState& state, HiddenFlags h,
                                                    const ModelParams& params, double dt = 1.0);

}  // namespace lobswitch
