#pragma once

#include <utility>
#include <vector>

#include "lobswitch/market_model.hpp"
#include "lobswitch/types.hpp"

namespace lobswitch {

/// Integer part [u] (floor) and fractional part {u} in [0,1), so that
/// u = [u] + {u}; e.g. u = -0.4 gives [u] = -1, {u} = 0.6.
int integer_part(double u);
double fractional_part(double u);

/// How the continuous parts of the control sets are discretized.
struct ControlMesh {
    /// Step of the fractional mesh for terminal controls and, unless share
    /// granular, for fractional fills at arrival epochs.
    double fraction_step = 0.25;
    /// At arrival epochs, offer the fractions j/q (j = 1..q-1) of an integer
    /// volume q instead of the fixed mesh, so that partial fills trade whole
    /// shares.
    bool share_granular_arrivals = true;
};

/// The fill set D^j(x) on the arrival side, x = distance to the price bound.
std::vector<double> arrival_fill_set(int room, TraderKind trader, const ControlMesh& mesh,
                                     double arrival_volume);

/// Enumerates the admissible (ua, ub) at an epoch, sorted lexicographically.
///
/// Interior epochs exclude (0,0); the solver models not trading as a
/// separate wait action. `arrival_volume` is the volume on the arrival side
/// and only matters for share-granular fractional fills.
std::vector<SwitchDecision> admissible_controls(EpochKind kind, int pa, int pb, TraderKind trader,
                                                const PriceLimits& limits,
                                                const ControlMesh& mesh = {},
                                                double arrival_volume = -1.0);

/// Hidden-order choices allowed at prices (pa, pb).
std::vector<HiddenFlags> admissible_hidden(int pa, int pb, const PriceLimits& limits);
bool is_admissible(HiddenFlags h, int pa, int pb, const PriceLimits& limits);

/// Shares bought (Ask) or sold (Bid) on one side. `arrival` says whether a
/// within-spread arrival hit this side at the epoch.
double shares_traded(Side side, EpochKind kind, bool arrival, double q, double u, double delta);

/// Cash paid (Ask) or received (Bid) on one side; epsilon is the
/// internalization premium charged on fills at the old price.
double cash_flow(Side side, EpochKind kind, bool arrival, double q, int p, double u, double delta,
                 double epsilon);

/// Net change of inventory (bought minus sold) from a switch at `book`.
double net_shares(EpochKind kind, const BookState& book, const SwitchDecision& u,
                  const ModelParams& params);

/// Net change of cash (received minus paid) from a switch at `book`.
double net_cash_flow(EpochKind kind, const BookState& book, const SwitchDecision& u,
                     const ModelParams& params);

/// Book and inventory right after the switch `u`. Prices move by the
/// integer parts; a side with a non-zero integer part resets to the depth,
/// otherwise its volume keeps the unfilled fraction. Throws
/// std::logic_error if the result has pa <= pb.
std::pair<BookState, double> apply_switch(EpochKind kind, const BookState& book, double inventory,
                                          const SwitchDecision& u, const ModelParams& params);

/// Expected cash rate of resting dark-pool orders at (pa, pb).
double hidden_drift(int pa, int pb, HiddenFlags h, const ModelParams& params);

TraderPosition apply_hidden_fills(TraderPosition position, int pa, int pb, HiddenFlags h,
                                  HiddenFills fills, const ModelParams& params);

EpochKind epoch_for(ArrivalFlag arrival);

}  // namespace lobswitch
