#include "lobswitch/reward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lobswitch {

namespace {

double parse_number(std::string_view text) {
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

}  // namespace

InventoryValuation InventoryValuation::parse(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view args = colon == std::string_view::npos ? "" : text.substr(colon + 1);
    if (head == "linear" && colon == std::string_view::npos) return linear();
    if (head == "target_abs") return target_abs(parse_number(args));
    if (head == "target_quad") return target_quad(parse_number(args));
    if (head == "liquidation") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos)
            throw std::invalid_argument("liquidation needs two penalties, e.g. liquidation:2,2");
        return liquidation(parse_number(args.substr(0, comma)), parse_number(args.substr(comma + 1)));
    }
    throw std::invalid_argument("unknown reward '" + std::string(text) + "'");
}

std::string InventoryValuation::to_string() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
        case Kind::Linear: out << "linear"; break;
        case Kind::TargetAbs: out << "target_abs:" << z0; break;
        case Kind::TargetQuad: out << "target_quad:" << z0; break;
        case Kind::LiquidationPenalty: out << "liquidation:" << penalty_a << ',' << penalty_b; break;
    }
    return out.str();
}

double InventoryValuation::operator()(double z, int pa, int pb) const {
    switch (kind) {
        case Kind::Linear: return z;
        case Kind::TargetAbs: return std::abs(z - z0);
        case Kind::TargetQuad: return (z - z0) * (z - z0);
        case Kind::LiquidationPenalty:
            if (z > 0.0) return (pb - penalty_b) * z;
            if (z < 0.0) return (pa + penalty_a) * z;
            return 0.0;
    }
    return 0.0;
}

void RewardSpec::validate() const {
    if (!(r_c > 0.0) || !std::isfinite(r_c)) throw std::invalid_argument("r_c must be > 0");
    if (!std::isfinite(r_i)) throw std::invalid_argument("r_i must be finite");
    if (!std::isfinite(valuation.z0) || !std::isfinite(valuation.penalty_a) ||
        !std::isfinite(valuation.penalty_b))
        throw std::invalid_argument("reward parameters must be finite");
}

double terminal_reward(const RewardSpec& spec, double inventory, double cash, int pa, int pb) {
    if (pa <= pb) throw std::invalid_argument("terminal_reward: need pa > pb");
    return spec.r_c * cash + spec.r_i * spec.valuation(inventory, pa, pb);
}

GrowthReport check_growth(const RewardSpec& spec, const std::vector<GrowthSample>& samples) {
    GrowthReport report;
    report.samples = samples.size();
    const auto& f = spec.valuation;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double bound = s.z * s.z + double(s.pa) * s.pa + double(s.pb) * s.pb + 1.0;
        report.growth_ratio = std::max(report.growth_ratio, std::abs(f(s.z, s.pa, s.pb)) / bound);
        if (i == 0) continue;
        const auto& prev = samples[i - 1];
        if (prev.pa != s.pa || prev.pb != s.pb || prev.z == s.z) continue;
        const double scale = (1.0 + std::abs(s.z) + std::abs(prev.z) + std::abs(s.pa) +
                              std::abs(s.pb)) *
                             std::abs(s.z - prev.z);
        const double diff = std::abs(f(s.z, s.pa, s.pb) - f(prev.z, s.pa, s.pb));
        report.lipschitz_ratio = std::max(report.lipschitz_ratio, diff / scale);
    }
    report.r_f = std::max(report.growth_ratio, report.lipschitz_ratio);
    report.ok = std::isfinite(report.r_f);
    return report;
}

}  // namespace lobswitch
