#include "lobswitch/intensity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lobswitch {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text) {
    std::string buf(trim(text));
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(buf, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("intensity: not a number: '" + buf + "'");
    }
    if (used != buf.size() || !std::isfinite(value))
        throw std::invalid_argument("intensity: not a number: '" + buf + "'");
    return value;
}

}  // namespace

Intensity Intensity::linear(double slope) {
    if (!(slope >= 0.0) || !std::isfinite(slope))
        throw std::invalid_argument("intensity: linear slope must be finite and >= 0");
    Intensity f;
    f.kind_ = Kind::Linear;
    f.slope_ = slope;
    f.values_.clear();
    return f;
}

Intensity Intensity::table(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("intensity: empty table");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("intensity: table entries must be finite and >= 0");
    Intensity f;
    f.kind_ = Kind::Table;
    f.values_ = std::move(values);
    return f;
}

Intensity Intensity::parse(std::string_view text) {
    text = trim(text);
    if (text.starts_with("linear:")) return linear(parse_number(text.substr(7)));
    if (text.starts_with("table:")) {
        auto body = trim(text.substr(6));
        if (body.size() < 2 || body.front() != '[' || body.back() != ']')
            throw std::invalid_argument("intensity: table must be written as table:[v1,v2,...]");
        body = body.substr(1, body.size() - 2);
        std::vector<double> values;
        while (!body.empty()) {
            auto comma = body.find(',');
            values.push_back(parse_number(body.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            body.remove_prefix(comma + 1);
        }
        return table(std::move(values));
    }
    if (text.starts_with("constant:")) return constant(parse_number(text.substr(9)));
    // A bare number is a constant rate.
    if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text.front())) || text.front() == '.'))
        return constant(parse_number(text));
    throw std::invalid_argument("intensity: expected 'linear:c', 'table:[...]', 'constant:c' or a number, got '" +
                                std::string(text) + "'");
}

double Intensity::operator()(int spread) const {
    if (spread < 1) return 0.0;
    if (kind_ == Kind::Linear) return slope_ * spread;
    auto idx = std::min<std::size_t>(static_cast<std::size_t>(spread - 1), values_.size() - 1);
    return values_[idx];
}

double Intensity::sup(int max_spread) const {
    double best = 0.0;
    for (int s = 1; s <= max_spread; ++s) best = std::max(best, (*this)(s));
    return best;
}

std::string Intensity::to_string() const {
    std::ostringstream out;
    out.precision(17);
    if (kind_ == Kind::Linear) {
        out << "linear:" << slope_;
    } else {
        out << "table:[";
        for (std::size_t i = 0; i < values_.size(); ++i) out << (i ? "," : "") << values_[i];
        out << ']';
    }
    return out.str();
}

}  // namespace lobswitch
