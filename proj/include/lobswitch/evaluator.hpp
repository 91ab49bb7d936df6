#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lobswitch/policy_io.hpp"
#include "lobswitch/solver.hpp"

namespace lobswitch {

/// Chooses an action at (k, epoch, node). Implementations must be pure
/// functions of their arguments so that paths can run in parallel.
class DecisionRule {
public:
    virtual ~DecisionRule() = default;
    virtual Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const = 0;
};

/// Follows a solved policy.
class TableRule : public DecisionRule {
public:
    explicit TableRule(const Policy& policy) : policy_(policy) {}
    Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const override;

private:
    const Policy& policy_;
};

/// Never trades by choice and never rests dark orders: arrivals are left
/// standing and nothing is done at the horizon.
class PassiveRule : public DecisionRule {
public:
    Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const override;
};

/// Like PassiveRule but always rests the given dark-pool order when allowed.
class HiddenRule : public DecisionRule {
public:
    HiddenRule(HiddenFlags h, PriceLimits limits) : h_(h), limits_(limits) {}
    Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const override;

private:
    HiddenFlags h_;
    PriceLimits limits_;
};

/// Picks a pseudo-random admissible action, keyed by (seed, k, kind, node).
class RandomRule : public DecisionRule {
public:
    RandomRule(const Problem& problem, std::uint64_t seed) : problem_(problem), seed_(seed) {}
    Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const override;

private:
    const Problem& problem_;
    std::uint64_t seed_;
};

/// Takes the widest ask and bid jump allowed at the first decision, then
/// stays passive.
class GreedyOpenRule : public DecisionRule {
public:
    explicit GreedyOpenRule(const Problem& problem) : problem_(problem) {}
    Action decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const override;

private:
    const Problem& problem_;
};

struct EpisodeStep {
    double t = 0.0;
    int k = 0;
    BookState book{};  ///< book before the action
    std::string action;  ///< wait, trade, ask-arrival, bid-arrival, terminal
    SwitchDecision u{};
    HiddenFlags h{};
    TraderPosition position{};  ///< after the action
};

struct EpisodeRecord {
    std::vector<EpisodeStep> steps;
    double reward = 0.0;
    std::size_t inventory_clamps = 0;
};

struct PolicyStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
    std::size_t inventory_clamps = 0;
    std::vector<EpisodeRecord> episodes;  ///< the first `keep_episodes` paths
};

/// Forward simulation of a decision rule on the same discretized chain the
/// solver uses (post-trade and post-step states snap to the grid). Returns
/// the mean realized reward r_c C + r_i F(I) with its standard error.
/// Path p draws from make_stream(seed, p, 1).
PolicyStats run_policy(const Problem& problem, const Grid& grid, const DecisionRule& rule,
                       const BookState& x0, double inv0, std::uint64_t seed, std::size_t n_paths,
                       unsigned threads = 1, std::size_t keep_episodes = 0);

/// Top-down enumeration of every decision and every Binomial branch, with
/// no value tables. The transposition memo only caches identical subtrees
/// and can be turned off to check that it changes nothing.
class ExhaustiveOracle {
public:
    ExhaustiveOracle(const Problem& problem, std::size_t expansion_cap = 50'000'000,
                     bool memo = true);

    const Grid& grid() const { return grid_; }
    /// Value at (k, epoch, node) for epochs Interior, AskArrival, BidArrival.
    double value(int k, EpochKind kind, std::size_t node);
    std::size_t expansions() const { return expansions_; }

private:
    double terminal(std::size_t node);
    double no_arrival(int k, std::size_t node);
    double resting(int k, std::size_t node);
    double arrival(int k, EpochKind kind, std::size_t node);
    void count();

    Problem problem_;
    Grid grid_;
    std::size_t cap_;
    bool use_memo_;
    std::size_t expansions_ = 0;
    std::map<std::tuple<int, int, std::size_t>, double> memo_;
};

/// Relative advantage (v_int - v_reg) / v_reg. Throws std::domain_error if
/// |v_reg| < floor.
double v_diff(double v_int, double v_reg, double floor = 0.0);

struct DiffReport {
    std::vector<double> v_reg;
    std::vector<double> v_int;
    std::vector<double> diff;  ///< NaN where the denominator is below the floor
    double floor = 0.0;
    std::size_t excluded = 0;
    std::size_t included = 0;
    double weighted_average = 0.0;  ///< over included nodes, weights renormalized
    double share_in_band = 0.0;     ///< share of included nodes with diff in [0.01, 0.15]
    std::size_t negative = 0;       ///< included nodes with v_reg > 0 and diff < -1e-9
    std::vector<std::size_t> histogram;  ///< counts over kHistogramEdges
};

/// Bin edges of DiffReport::histogram (outer bins are open-ended).
extern const std::vector<double> kHistogramEdges;

/// Compares two layers node by node. `weights` must have one entry per node
/// and sum to one within 1e-9; an empty vector means uniform weights. The
/// floor is 1e-6 times the largest |v_reg|.
DiffReport diff_report(const ValueLayer& reg, const ValueLayer& internalizing,
                       const std::vector<double>& weights = {});

/// Reads `qa,qb,inv,pa,pb,w` rows (header optional) into per-node weights.
/// Nodes not listed get weight zero. Throws if the weights are not
/// normalized or a row is off the grid.
std::vector<double> load_weights(const std::string& path, const Grid& grid);

struct PremiumResult {
    std::optional<double> epsilon_star;
    /// Ladder positions i where curve[i+1] > curve[i] (the curve should not
    /// increase with the premium).
    std::vector<std::size_t> monotonicity_violations;
};

/// Largest ladder premium eps > 0 whose weighted average advantage is at
/// least delta. `curve` is (eps, average) sorted by eps.
PremiumResult fair_premium(const std::vector<std::pair<double, double>>& curve, double delta);

}  // namespace lobswitch

namespace lobswitch {

/// A small random instance for oracle comparisons: volumes 0..1, inventory
/// -1..1, prices 11..15 with bounds 15/11, K = steps, random depth,
/// premium, intensities, trader and reward.
Problem random_tiny_problem(std::uint64_t seed, int steps);

struct OracleComparison {
    std::size_t values_checked = 0;
    double max_abs_diff = 0.0;
    std::size_t expansions = 0;
};

/// Solves `problem` and compares v0, va and vb at k = 0 against the
/// exhaustive oracle at every node.
OracleComparison compare_with_oracle(const Problem& problem, bool memo = true,
                                     unsigned threads = 1);

}  // namespace lobswitch
