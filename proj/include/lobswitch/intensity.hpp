#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lobswitch {

/// Event intensity as a function of the bid-ask spread (in ticks).
///
/// Two forms are supported: `linear:c` gives c * spread, and
/// `table:[v1,v2,...]` gives v_s for spread s (1-based), with the last
/// entry repeated for wider spreads.
class Intensity {
public:
    enum class Kind { Linear, Table };

    Intensity() = default;

    static Intensity linear(double slope);
    static Intensity table(std::vector<double> values);
    static Intensity constant(double value) { return table({value}); }

    /// Parses `linear:c` or `table:[...]`. Throws std::invalid_argument.
    static Intensity parse(std::string_view text);

    double operator()(int spread) const;

    /// Supremum over spreads 1..max_spread. Linear intensities are
    /// unbounded in general, so the caller picks the range.
    double sup(int max_spread) const;

    Kind kind() const { return kind_; }
    std::string to_string() const;

private:
    Kind kind_ = Kind::Table;
    double slope_ = 0.0;
    std::vector<double> values_{0.0};
};

}  // namespace lobswitch
