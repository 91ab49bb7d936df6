#pragma once

#include <cstdint>
#include <string_view>

namespace lobswitch {

/// Within-spread arrival recorded at an instant. `Both` only occurs in the
/// uncontrolled continuous book simulation.
enum class ArrivalFlag : std::uint8_t { None, Ask, Bid, Both };

enum class TraderKind : std::uint8_t { Regular, Internalizing };

/// What kind of decision epoch the trader faces.
enum class EpochKind : std::uint8_t { Interior, AskArrival, BidArrival, Terminal, Done };

enum class Side : std::uint8_t { Ask, Bid };

/// Best quotes and the volumes resting at them. Prices are in ticks.
struct BookState {
    double qa = 0.0;
    double qb = 0.0;
    int pa = 0;
    int pb = 0;
    ArrivalFlag arrival = ArrivalFlag::None;

    int spread() const { return pa - pb; }
    friend bool operator==(const BookState&, const BookState&) = default;
};

/// Buy/sell price bounds: the trader only buys below `pa_bar` and only
/// sells above `pb_under`.
struct PriceLimits {
    int pa_bar = 18;
    int pb_under = 12;
};

/// Dark-pool participation: `ha` rests a mid-price buy, `hb` a mid-price
/// sell. Never both.
struct HiddenFlags {
    int ha = 0;
    int hb = 0;
    friend bool operator==(const HiddenFlags&, const HiddenFlags&) = default;
};

/// Number of limits taken on each side. Integer except at arrival and
/// terminal epochs, where the fractional part encodes a partial fill.
struct SwitchDecision {
    double ua = 0.0;
    double ub = 0.0;
    friend bool operator==(const SwitchDecision&, const SwitchDecision&) = default;
};

/// Liquidity events hitting the dark pool in one step (increments of the
/// buy-side and sell-side fill processes).
struct HiddenFills {
    bool buy = false;
    bool sell = false;
    friend bool operator==(const HiddenFills&, const HiddenFills&) = default;
};

struct TraderPosition {
    double inventory = 0.0;
    double cash = 0.0;
};

std::string_view to_string(TraderKind kind);
std::string_view to_string(EpochKind kind);
std::string_view to_string(ArrivalFlag flag);
TraderKind parse_trader_kind(std::string_view text);

}  // namespace lobswitch
