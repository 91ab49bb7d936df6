#include "lobswitch/policy_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lobswitch {

namespace {

constexpr char kMagic[8] = {'L', 'O', 'B', 'S', 'W', 'P', 'O', 'L'};
constexpr const char* kColumns = "k,qa,qb,inv,pa,pb,v0,va,vb,wait,u0a,u0b,ha,hb,uaa,uab,uba,ubb";

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_field(const std::string& s) {
    if (s == "nan") return std::nan("");
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("policy file: bad number '" + s + "'");
    return v;
}

void put_u8(std::ostream& out, std::uint8_t v) { out.put(char(v)); }

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

std::uint64_t get_bytes(std::istream& in, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
        const int c = in.get();
        if (c == EOF) throw std::runtime_error("policy file: truncated binary data");
        v |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_bytes(in, 8);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

RunConfig config_from_text(const std::string& text, std::uint64_t expected_hash) {
    RunConfig config;
    try {
        config.apply_text(text, "<policy header>");
    } catch (const ConfigError& e) {
        throw std::runtime_error(std::string("policy file: ") + e.what());
    }
    if (config.hash() != expected_hash)
        throw std::runtime_error("policy file: params hash does not match the embedded config");
    return config;
}

void check_node(const GridNode& expected, int qa, int qb, int inv, int pa, int pb) {
    if (expected.qa != qa || expected.qb != qb || expected.inv != inv || expected.pa != pa ||
        expected.pb != pb)
        throw std::runtime_error("policy file: records are not in grid order");
}

}  // namespace

Action Policy::decide(int k, EpochKind kind, std::size_t node) const {
    const NodeSolution& s = table.at(k, node);
    Action a;
    switch (kind) {
        case EpochKind::Interior:
            a.wait = s.wait;
            a.u = s.wait ? SwitchDecision{} : s.u0;
            a.h = s.h;
            break;
        case EpochKind::AskArrival:
            if (std::isnan(s.va)) throw std::logic_error("no ask arrival can occur at this node");
            a.u = s.u_ask;
            break;
        case EpochKind::BidArrival:
            if (std::isnan(s.vb)) throw std::logic_error("no bid arrival can occur at this node");
            a.u = s.u_bid;
            break;
        case EpochKind::Terminal:
            a.u = s.u0;
            break;
        case EpochKind::Done:
            break;
    }
    return a;
}

Policy extract_policy(const ValueTable& table, const RunConfig& config) {
    return Policy{config, table};
}

void write_policy_csv(std::ostream& out, const Policy& policy) {
    const auto& table = policy.table;
    const auto& g = table.grid().spec();
    out << "# lobswitch policy v" << kPolicyVersion << "\n";
    out << "# grid qa=0.." << g.qa_max << " qb=0.." << g.qb_max << " inv=" << g.inv_min << ".."
        << g.inv_max << " pa=" << g.pa_min << ".." << g.pa_max << " pb=" << g.pb_min << ".."
        << g.pb_max << " t0=" << num(g.t0) << " steps=" << g.steps << " dt=" << num(g.dt)
        << " nodes=" << table.grid().size() << "\n";
    out << "# params_hash " << hex64(policy.config.hash()) << "\n";
    std::istringstream lines(policy.config.canonical());
    for (std::string line; std::getline(lines, line);) out << "# config " << line << "\n";
    out << kColumns << "\n";
    for (int k = 0; k <= table.steps(); ++k) {
        const auto& layer = table.layer(k);
        for (std::size_t i = 0; i < layer.size(); ++i) {
            const GridNode n = table.grid().node(i);
            const NodeSolution& s = layer[i];
            out << k << ',' << n.qa << ',' << n.qb << ',' << n.inv << ',' << n.pa << ',' << n.pb
                << ',' << num(s.v0) << ',' << num(s.va) << ',' << num(s.vb) << ',' << int(s.wait)
                << ',' << num(s.u0.ua) << ',' << num(s.u0.ub) << ',' << s.h.ha << ',' << s.h.hb
                << ',' << num(s.u_ask.ua) << ',' << num(s.u_ask.ub) << ',' << num(s.u_bid.ua)
                << ',' << num(s.u_bid.ub) << '\n';
        }
    }
}

void write_policy_binary(std::ostream& out, const Policy& policy) {
    const auto& table = policy.table;
    const std::string config = policy.config.canonical();
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kPolicyVersion);
    put_u64(out, policy.config.hash());
    put_u32(out, std::uint32_t(config.size()));
    out.write(config.data(), std::streamsize(config.size()));
    put_u32(out, std::uint32_t(table.steps() + 1));
    put_u64(out, table.grid().size());
    for (int k = 0; k <= table.steps(); ++k)
        for (const NodeSolution& s : table.layer(k)) {
            put_f64(out, s.v0);
            put_f64(out, s.va);
            put_f64(out, s.vb);
            put_u8(out, s.wait);
            put_f64(out, s.u0.ua);
            put_f64(out, s.u0.ub);
            put_u8(out, std::uint8_t(s.h.ha));
            put_u8(out, std::uint8_t(s.h.hb));
            put_f64(out, s.u_ask.ua);
            put_f64(out, s.u_ask.ub);
            put_f64(out, s.u_bid.ua);
            put_f64(out, s.u_bid.ub);
        }
}

Policy read_policy_csv(std::istream& in) {
    std::string line;
    std::string config_text;
    std::uint64_t hash = 0;
    bool have_version = false, have_hash = false;
    while (std::getline(in, line)) {
        if (line.rfind("# lobswitch policy v", 0) == 0) {
            if (std::stoul(line.substr(20)) != kPolicyVersion)
                throw std::runtime_error("policy file: unsupported version");
            have_version = true;
        } else if (line.rfind("# params_hash ", 0) == 0) {
            hash = std::stoull(line.substr(14), nullptr, 16);
            have_hash = true;
        } else if (line.rfind("# config ", 0) == 0) {
            config_text += line.substr(9) + "\n";
        } else if (line.rfind("#", 0) == 0) {
            continue;
        } else {
            break;
        }
    }
    if (!have_version || !have_hash) throw std::runtime_error("policy file: missing CSV header");
    if (line != kColumns) throw std::runtime_error("policy file: unexpected column line");
    RunConfig config = config_from_text(config_text, hash);
    Grid grid = build_grid(config.problem.grid);
    const int layers = config.problem.grid.steps + 1;
    std::vector<ValueLayer> data(std::size_t(layers), ValueLayer(grid.size()));

    std::vector<std::string> f;
    for (int k = 0; k < layers; ++k)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::getline(in, line)) throw std::runtime_error("policy file: too few records");
            f.clear();
            std::stringstream ss(line);
            for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
            if (f.size() != 18) throw std::runtime_error("policy file: record needs 18 fields");
            if (std::stoi(f[0]) != k) throw std::runtime_error("policy file: records out of order");
            check_node(grid.node(i), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]),
                       std::stoi(f[4]), std::stoi(f[5]));
            NodeSolution& s = data[std::size_t(k)][i];
            s.v0 = parse_field(f[6]);
            s.va = parse_field(f[7]);
            s.vb = parse_field(f[8]);
            s.wait = f[9] == "1";
            s.u0 = {parse_field(f[10]), parse_field(f[11])};
            s.h = {std::stoi(f[12]), std::stoi(f[13])};
            s.u_ask = {parse_field(f[14]), parse_field(f[15])};
            s.u_bid = {parse_field(f[16]), parse_field(f[17])};
        }
    if (std::getline(in, line) && !line.empty())
        throw std::runtime_error("policy file: trailing data after the last record");
    return Policy{config, ValueTable(std::move(grid), std::move(data), {})};
}

Policy read_policy_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw std::runtime_error("policy file: bad magic");
    if (get_bytes(in, 4) != kPolicyVersion) throw std::runtime_error("policy file: unsupported version");
    const std::uint64_t hash = get_bytes(in, 8);
    const std::uint64_t length = get_bytes(in, 4);
    std::string text(length, '\0');
    if (!in.read(text.data(), std::streamsize(length)))
        throw std::runtime_error("policy file: truncated config");
    RunConfig config = config_from_text(text, hash);
    Grid grid = build_grid(config.problem.grid);
    const std::uint64_t layers = get_bytes(in, 4);
    const std::uint64_t nodes = get_bytes(in, 8);
    if (layers != std::uint64_t(config.problem.grid.steps + 1) || nodes != grid.size())
        throw std::runtime_error("policy file: record counts do not match the grid");
    std::vector<ValueLayer> data(layers, ValueLayer(nodes));
    for (auto& layer : data)
        for (NodeSolution& s : layer) {
            s.v0 = get_f64(in);
            s.va = get_f64(in);
            s.vb = get_f64(in);
            s.wait = get_bytes(in, 1) != 0;
            s.u0.ua = get_f64(in);
            s.u0.ub = get_f64(in);
            s.h.ha = int(get_bytes(in, 1));
            s.h.hb = int(get_bytes(in, 1));
            s.u_ask.ua = get_f64(in);
            s.u_ask.ub = get_f64(in);
            s.u_bid.ua = get_f64(in);
            s.u_bid.ub = get_f64(in);
        }
    if (in.peek() != EOF) throw std::runtime_error("policy file: trailing data after the last record");
    return Policy{config, ValueTable(std::move(grid), std::move(data), {})};
}

Policy read_policy_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("cannot open policy file '" + path + "'");
    char head[8] = {};
    in.read(head, sizeof head);
    in.clear();
    in.seekg(0);
    if (std::memcmp(head, kMagic, sizeof kMagic) == 0) return read_policy_binary(in);
    return read_policy_csv(in);
}

}  // namespace lobswitch
