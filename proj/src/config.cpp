#include "lobswitch/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lobswitch {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double to_double(std::string_view key, std::string_view value) {
    const std::string s(value);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
        throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
    return v;
}

long to_long(std::string_view key, std::string_view value) {
    const double v = to_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e15)
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
    return long(v);
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

Intensity to_intensity(std::string_view key, std::string_view value) {
    try {
        return Intensity::parse(value);
    } catch (const std::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void RunConfig::set(std::string_view key_in, std::string_view value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    auto& p = problem.params;
    auto& g = problem.grid;
    auto& r = problem.reward;
    const auto as_int = [&] { return int(to_long(key, value)); };

    if (key == "model") {
        try {
            problem.model = parse_model_kind(value);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "trader") {
        try {
            problem.trader = parse_trader_kind(value);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "epsilon") {
        p.epsilon = to_double(key, value);
    } else if (key == "sigma") {
        p.sigma_a = p.sigma_b = to_double(key, value);
    } else if (key == "sigma_a") {
        p.sigma_a = to_double(key, value);
    } else if (key == "sigma_b") {
        p.sigma_b = to_double(key, value);
    } else if (key == "delta") {
        p.delta_a = p.delta_b = to_double(key, value);
    } else if (key == "delta_a") {
        p.delta_a = to_double(key, value);
    } else if (key == "delta_b") {
        p.delta_b = to_double(key, value);
    } else if (key == "theta") {
        p.theta_a = p.theta_b = to_intensity(key, value);
    } else if (key == "theta_a") {
        p.theta_a = to_intensity(key, value);
    } else if (key == "theta_b") {
        p.theta_b = to_intensity(key, value);
    } else if (key == "lambda") {
        p.lambda_a = p.lambda_b = to_intensity(key, value);
    } else if (key == "lambda_a") {
        p.lambda_a = to_intensity(key, value);
    } else if (key == "lambda_b") {
        p.lambda_b = to_intensity(key, value);
    } else if (key == "pa_bar") {
        p.limits.pa_bar = as_int();
    } else if (key == "pb_under") {
        p.limits.pb_under = as_int();
    } else if (key == "r_c") {
        r.r_c = to_double(key, value);
    } else if (key == "r_i") {
        r.r_i = to_double(key, value);
    } else if (key == "reward") {
        try {
            r.valuation = InventoryValuation::parse(value);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("reward: ") + e.what());
        }
    } else if (key == "qa_max") {
        g.qa_max = as_int();
    } else if (key == "qb_max") {
        g.qb_max = as_int();
    } else if (key == "inv_min") {
        g.inv_min = as_int();
    } else if (key == "inv_max") {
        g.inv_max = as_int();
    } else if (key == "pa_min") {
        g.pa_min = as_int();
    } else if (key == "pa_max") {
        g.pa_max = as_int();
    } else if (key == "pb_min") {
        g.pb_min = as_int();
    } else if (key == "pb_max") {
        g.pb_max = as_int();
    } else if (key == "t0") {
        g.t0 = to_double(key, value);
    } else if (key == "steps") {
        g.steps = as_int();
    } else if (key == "dt") {
        g.dt = to_double(key, value);
    } else if (key == "fraction_step") {
        problem.mesh.fraction_step = to_double(key, value);
    } else if (key == "share_granular_arrivals") {
        problem.mesh.share_granular_arrivals = to_bool(key, value);
    } else if (key == "mc_samples") {
        problem.mc_samples = as_int();
    } else if (key == "seed") {
        const long v = to_long(key, value);
        if (v < 0) throw ConfigError("seed must be >= 0");
        problem.seed = std::uint64_t(v);
    } else if (key == "threads") {
        const long v = to_long(key, value);
        if (v < 0) throw ConfigError("threads must be >= 0");
        threads = unsigned(v);
    } else if (key == "qa0") {
        x0.qa = to_double(key, value);
    } else if (key == "qb0") {
        x0.qb = to_double(key, value);
    } else if (key == "pa0") {
        x0.pa = as_int();
    } else if (key == "pb0") {
        x0.pb = as_int();
    } else if (key == "inv0") {
        inv0 = to_double(key, value);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

void RunConfig::apply_text(std::string_view text, std::string_view origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        try {
            set(std::string_view(t).substr(0, eq), std::string_view(t).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void RunConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_text(buf.str(), path);
}

std::string RunConfig::canonical() const {
    const auto& p = problem.params;
    const auto& g = problem.grid;
    std::map<std::string, std::string> kv;
    kv["model"] = std::string(to_string(problem.model));
    kv["trader"] = std::string(to_string(problem.trader));
    kv["epsilon"] = fmt(p.epsilon);
    kv["sigma_a"] = fmt(p.sigma_a);
    kv["sigma_b"] = fmt(p.sigma_b);
    kv["delta_a"] = fmt(p.delta_a);
    kv["delta_b"] = fmt(p.delta_b);
    kv["theta_a"] = p.theta_a.to_string();
    kv["theta_b"] = p.theta_b.to_string();
    kv["lambda_a"] = p.lambda_a.to_string();
    kv["lambda_b"] = p.lambda_b.to_string();
    kv["pa_bar"] = std::to_string(p.limits.pa_bar);
    kv["pb_under"] = std::to_string(p.limits.pb_under);
    kv["r_c"] = fmt(problem.reward.r_c);
    kv["r_i"] = fmt(problem.reward.r_i);
    kv["reward"] = problem.reward.valuation.to_string();
    kv["qa_max"] = std::to_string(g.qa_max);
    kv["qb_max"] = std::to_string(g.qb_max);
    kv["inv_min"] = std::to_string(g.inv_min);
    kv["inv_max"] = std::to_string(g.inv_max);
    kv["pa_min"] = std::to_string(g.pa_min);
    kv["pa_max"] = std::to_string(g.pa_max);
    kv["pb_min"] = std::to_string(g.pb_min);
    kv["pb_max"] = std::to_string(g.pb_max);
    kv["t0"] = fmt(g.t0);
    kv["steps"] = std::to_string(g.steps);
    kv["dt"] = fmt(g.dt);
    kv["fraction_step"] = fmt(problem.mesh.fraction_step);
    kv["share_granular_arrivals"] = problem.mesh.share_granular_arrivals ? "true" : "false";
    kv["mc_samples"] = std::to_string(problem.mc_samples);
    kv["seed"] = std::to_string(problem.seed);
    kv["qa0"] = fmt(x0.qa);
    kv["qb0"] = fmt(x0.qb);
    kv["pa0"] = std::to_string(x0.pa);
    kv["pb0"] = std::to_string(x0.pb);
    kv["inv0"] = fmt(inv0);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

void RunConfig::validate() const {
    try {
        problem.validate();
        validate_state(x0);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace lobswitch
