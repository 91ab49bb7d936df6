#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lobswitch {

/// Valuation F(z, pa, pb) of the inventory left at the horizon.
struct InventoryValuation {
    enum class Kind { Linear, TargetAbs, TargetQuad, LiquidationPenalty };

    Kind kind = Kind::Linear;
    double z0 = 0.0;       ///< target inventory (TargetAbs, TargetQuad)
    double penalty_a = 0.0;  ///< U^a: extra ticks paid to buy back a short position
    double penalty_b = 0.0;  ///< U^b: ticks given up to sell a long position

    static InventoryValuation linear() { return {}; }
    static InventoryValuation target_abs(double z0) { return {Kind::TargetAbs, z0, 0, 0}; }
    static InventoryValuation target_quad(double z0) { return {Kind::TargetQuad, z0, 0, 0}; }
    static InventoryValuation liquidation(double ua, double ub) {
        return {Kind::LiquidationPenalty, 0.0, ua, ub};
    }

    /// Accepts `linear`, `target_abs:z0`, `target_quad:z0` and
    /// `liquidation:Ua,Ub`.
    static InventoryValuation parse(std::string_view text);
    std::string to_string() const;

    double operator()(double z, int pa, int pb) const;
};

struct RewardSpec {
    double r_c = 1.0;
    double r_i = 1.0;
    InventoryValuation valuation = InventoryValuation::liquidation(2.0, 2.0);

    void validate() const;
};

/// xi = r_c * cash + r_i * F(inventory, pa, pb).
double terminal_reward(const RewardSpec& spec, double inventory, double cash, int pa, int pb);

struct GrowthSample {
    double z = 0.0;
    int pa = 0;
    int pb = 0;
};

struct GrowthReport {
    bool ok = true;
    /// Smallest constant that satisfies both the quadratic growth bound and
    /// the local Lipschitz bound on the sample.
    double r_f = 0.0;
    double growth_ratio = 0.0;
    double lipschitz_ratio = 0.0;
    std::size_t samples = 0;
};

/// Empirical check of |F| <= r (z^2 + pa^2 + pb^2 + 1) and
/// |F(z) - F(z')| <= r (1 + |z| + |z'| + |pa| + |pb|) |z - z'| over the
/// sample (pairs are formed between consecutive samples sharing prices).
GrowthReport check_growth(const RewardSpec& spec, const std::vector<GrowthSample>& samples);

}  // namespace lobswitch
