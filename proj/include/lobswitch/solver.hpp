#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lobswitch/accounting.hpp"
#include "lobswitch/grid.hpp"
#include "lobswitch/market_model.hpp"
#include "lobswitch/reward.hpp"
#include "lobswitch/types.hpp"

namespace lobswitch {

enum class ModelKind : std::uint8_t { Binomial, Continuous };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Everything the backward induction needs.
struct Problem {
    ModelParams params{};
    GridSpec grid{};
    RewardSpec reward{};
    TraderKind trader = TraderKind::Internalizing;
    ControlMesh mesh{};
    ModelKind model = ModelKind::Binomial;
    int mc_samples = 512;  ///< continuous model only; the Binomial law is summed exactly
    std::uint64_t seed = 1;

    void validate() const;
};

/// Solution at one (k, node).
///
/// `wait` and `u0` describe the decision at an epoch without arrival; `h`
/// are the dark-pool flags rested after that decision. `u_ask` / `u_bid`
/// are the forced decisions when an ask / bid arrives at the node, after
/// which the no-arrival decision of the resulting node applies. At the
/// terminal layer `u0` is the closing trade and `wait` is false. Arrival
/// values are NaN where the spread is one tick (no arrival can happen).
struct NodeSolution {
    double v0 = 0.0;
    double va = 0.0;
    double vb = 0.0;
    SwitchDecision u0{};
    SwitchDecision u_ask{};
    SwitchDecision u_bid{};
    HiddenFlags h{};
    bool wait = false;
};

using ValueLayer = std::vector<NodeSolution>;

struct SolveDiagnostics {
    std::size_t inventory_clamps = 0;  ///< snapped states whose inventory left the grid
    std::size_t state_clamps = 0;      ///< snapped states with any coordinate off the grid
    std::vector<double> layer_seconds;  ///< wall time per layer, index k
    unsigned threads = 1;
};

class ValueTable {
public:
    ValueTable(Grid grid, std::vector<ValueLayer> layers, SolveDiagnostics diagnostics)
        : grid_(std::move(grid)), layers_(std::move(layers)), diagnostics_(std::move(diagnostics)) {}

    const Grid& grid() const { return grid_; }
    int steps() const { return int(layers_.size()) - 1; }
    const ValueLayer& layer(int k) const { return layers_.at(std::size_t(k)); }
    const NodeSolution& at(int k, std::size_t node) const { return layers_.at(std::size_t(k)).at(node); }
    const SolveDiagnostics& diagnostics() const { return diagnostics_; }

private:
    Grid grid_;
    std::vector<ValueLayer> layers_;
    SolveDiagnostics diagnostics_;
};

struct InterventionResult {
    double value = 0.0;
    SwitchDecision u{};
    std::size_t target = 0;  ///< snapped post-trade node (unused at the terminal)
    bool valid = false;      ///< false if the candidate set was empty
};

/// Best immediate trade at node x for the given epoch kind.
///
/// Interior and arrival epochs: max over admissible u of r_c f_alpha plus
/// `continuation` at the snapped post-trade node. Terminal: max of r_c
/// f_alpha + r_i F at the post-trade prices, without snapping. Done: the
/// continuation at x itself with u = (0,0). Ties keep the first candidate in
/// lexicographic (ua, ub) order.
InterventionResult intervention_max(const Problem& problem, const Grid& grid, EpochKind kind,
                                    const GridNode& x, const std::vector<double>& continuation,
                                    std::size_t* inventory_clamps = nullptr);

/// E[V_{k+1}(event, next node)] from node y while resting `h`, with V_{k+1}
/// the value of the arrival event reached (v0 without arrival). Binomial:
/// exact sum; continuous: average of mc_samples draws from the (k, y)
/// stream.
double expectation_estimate(const Problem& problem, const Grid& grid, int k, const ValueLayer& next,
                            std::size_t y, HiddenFlags h);

ValueLayer terminal_layer(const Problem& problem, const Grid& grid, unsigned threads = 1);

/// Layer k from the finished layer k+1.
ValueLayer backward_step(const Problem& problem, const Grid& grid, int k, const ValueLayer& next,
                         unsigned threads = 1, SolveDiagnostics* diagnostics = nullptr);

/// Full backward induction over the grid's time mesh.
ValueTable solve(const Problem& problem, unsigned threads = 1);

/// Threads to use when none is given: LOBSWITCH_THREADS if set, else the
/// hardware concurrency.
unsigned default_threads();

}  // namespace lobswitch
