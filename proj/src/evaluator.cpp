#include "lobswitch/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lobswitch/parallel.hpp"

namespace lobswitch {

namespace {

constexpr std::array<HiddenFlags, 3> kHiddenOrder{{{0, 0}, {0, 1}, {1, 0}}};

double arrival_volume(EpochKind kind, const GridNode& x) {
    if (kind == EpochKind::AskArrival) return x.qa;
    if (kind == EpochKind::BidArrival) return x.qb;
    return -1.0;
}

std::vector<SwitchDecision> controls_at(const Problem& problem, EpochKind kind, const GridNode& x) {
    return admissible_controls(kind, x.pa, x.pb, problem.trader, problem.params.limits,
                               problem.mesh, arrival_volume(kind, x));
}

void require_admissible(const Problem& problem, EpochKind kind, const GridNode& x,
                        const SwitchDecision& u) {
    const auto set = controls_at(problem, kind, x);
    if (std::find(set.begin(), set.end(), u) == set.end())
        throw std::logic_error("decision rule chose an inadmissible control (" + std::to_string(u.ua) +
                               ", " + std::to_string(u.ub) + ") at a " +
                               std::string(to_string(kind)) + " epoch");
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double hidden_shift(HiddenFlags h, HiddenFills fills, const ModelParams& params) {
    double d = 0.0;
    if (h.ha == 1 && fills.buy) d += params.delta_a;
    if (h.hb == 1 && fills.sell) d -= params.delta_b;
    return d;
}

EpochKind epoch_of(ArrivalFlag a) {
    return a == ArrivalFlag::None ? EpochKind::Interior : epoch_for(a);
}

}  // namespace

Action TableRule::decide(int k, EpochKind kind, std::size_t node, const GridNode&) const {
    return policy_.decide(k, kind, node);
}

Action PassiveRule::decide(int, EpochKind kind, std::size_t, const GridNode&) const {
    Action a;
    a.wait = kind == EpochKind::Interior;
    if (kind == EpochKind::AskArrival) a.u = {-1.0, 0.0};
    if (kind == EpochKind::BidArrival) a.u = {0.0, -1.0};
    return a;
}

Action HiddenRule::decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const {
    Action a = PassiveRule().decide(k, kind, node, x);
    if (kind == EpochKind::Interior && is_admissible(h_, x.pa, x.pb, limits_)) a.h = h_;
    return a;
}

Action RandomRule::decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const {
    std::uint64_t key = mix(seed_ ^ mix(std::uint64_t(k) * 8 + std::uint64_t(kind)) ^ mix(node + 1));
    Action a;
    const auto set = controls_at(problem_, kind, x);
    if (kind == EpochKind::Interior) {
        // Wait half of the time, otherwise trade uniformly over the set.
        a.wait = set.empty() || (key & 1) == 0;
        key >>= 1;
        if (!a.wait) {
            a.u = set[key % set.size()];
            key = mix(key);
        }
        // The dark-pool choice must be admissible after the trade.
        int pa = x.pa + integer_part(a.u.ua);
        int pb = x.pb - integer_part(a.u.ub);
        const auto hs = admissible_hidden(pa, pb, problem_.params.limits);
        a.h = hs[key % hs.size()];
        return a;
    }
    a.u = set[key % set.size()];
    return a;
}

Action GreedyOpenRule::decide(int k, EpochKind kind, std::size_t node, const GridNode& x) const {
    if (k == 0 && kind == EpochKind::Interior) {
        const auto set = controls_at(problem_, kind, x);
        if (!set.empty()) {
            Action a;
            a.u = set.back();
            return a;
        }
    }
    return PassiveRule().decide(k, kind, node, x);
}

PolicyStats run_policy(const Problem& problem, const Grid& grid, const DecisionRule& rule,
                       const BookState& x0, double inv0, std::uint64_t seed, std::size_t n_paths,
                       unsigned threads, std::size_t keep_episodes) {
    problem.validate();
    if (n_paths == 0) throw std::invalid_argument("run_policy: need at least one path");
    const SnapResult start = grid.snap(x0, inv0);
    if (start.clamped || grid.node(start.index).book() != BookState{x0.qa, x0.qb, x0.pa, x0.pb} ||
        grid.node(start.index).inv != inv0)
        throw std::invalid_argument("run_policy: initial state is not a grid node");

    const auto& params = problem.params;
    const auto& spec = grid.spec();
    const int K = spec.steps;
    std::vector<double> rewards(n_paths);
    std::vector<std::size_t> clamps(n_paths);
    keep_episodes = std::min(keep_episodes, n_paths);
    std::vector<EpisodeRecord> episodes(keep_episodes);

    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            Rng rng = make_stream(seed, p, 1);
            EpisodeRecord* log = p < keep_episodes ? &episodes[p] : nullptr;
            std::size_t node = start.index;
            double cash = 0.0;
            std::size_t clamp_count = 0;

            const auto record = [&](int k, const BookState& book, const char* what,
                                    const SwitchDecision& u, HiddenFlags h) {
                if (!log) return;
                log->steps.push_back(EpisodeStep{spec.time(k), k, book, what, u, h,
                                                 {double(grid.node(node).inv), cash}});
            };
            const auto trade = [&](EpochKind kind, const SwitchDecision& u) {
                const GridNode x = grid.node(node);
                require_admissible(problem, kind, x, u);
                cash += net_cash_flow(kind, x.book(), u, params);
                const auto [after, inv] = apply_switch(kind, x.book(), x.inv, u, params);
                const SnapResult r = grid.snap(after, inv);
                clamp_count += r.inventory_clamped;
                node = r.index;
            };

            for (int k = 0; k < K; ++k) {
                GridNode x = grid.node(node);
                const BookState before = x.book();
                const Action a = rule.decide(k, EpochKind::Interior, node, x);
                if (!a.wait) trade(EpochKind::Interior, a.u);
                x = grid.node(node);
                if (!is_admissible(a.h, x.pa, x.pb, params.limits))
                    throw std::logic_error("decision rule chose inadmissible dark-pool flags");
                record(k, before, a.wait ? "wait" : "trade", a.wait ? SwitchDecision{} : a.u, a.h);

                const BookState book = x.book();
                const TransitionOutcome o =
                    problem.model == ModelKind::Binomial
                        ? sample_binomial(book, params, spec.dt, rng)
                        : continuous_transition(book, params, spec.dt, draw_noise(rng), true);
                const TraderPosition pos =
                    apply_hidden_fills({double(x.inv), cash}, x.pa, x.pb, a.h, o.fills, params);
                cash = pos.cash;
                const SnapResult r = grid.snap(o.next, pos.inventory);
                clamp_count += r.inventory_clamped;
                node = r.index;

                if (k + 1 < K && o.next.arrival != ArrivalFlag::None) {
                    const EpochKind kind = epoch_of(o.next.arrival);
                    const GridNode y = grid.node(node);
                    const Action forced = rule.decide(k + 1, kind, node, y);
                    trade(kind, forced.u);
                    record(k + 1, y.book(), kind == EpochKind::AskArrival ? "ask-arrival" : "bid-arrival",
                           forced.u, {});
                }
            }

            const GridNode x = grid.node(node);
            const Action a = rule.decide(K, EpochKind::Terminal, node, x);
            require_admissible(problem, EpochKind::Terminal, x, a.u);
            cash += net_cash_flow(EpochKind::Terminal, x.book(), a.u, params);
            const auto [after, inv] = apply_switch(EpochKind::Terminal, x.book(), x.inv, a.u, params);
            rewards[p] = terminal_reward(problem.reward, inv, cash, after.pa, after.pb);
            clamps[p] = clamp_count;
            if (log) {
                log->steps.push_back(
                    EpisodeStep{spec.time(K), K, x.book(), "terminal", a.u, {}, {inv, cash}});
                log->reward = rewards[p];
                log->inventory_clamps = clamp_count;
            }
        }
    });

    PolicyStats stats;
    stats.paths = n_paths;
    double sum = 0.0;
    for (double r : rewards) sum += r;
    stats.mean = sum / double(n_paths);
    double sq = 0.0;
    for (double r : rewards) sq += (r - stats.mean) * (r - stats.mean);
    stats.std_error = n_paths > 1 ? std::sqrt(sq / double(n_paths - 1) / double(n_paths)) : 0.0;
    stats.inventory_clamps = std::accumulate(clamps.begin(), clamps.end(), std::size_t{0});
    stats.episodes = std::move(episodes);
    return stats;
}

ExhaustiveOracle::ExhaustiveOracle(const Problem& problem, std::size_t expansion_cap, bool memo)
    : problem_(problem), grid_(build_grid(problem.grid)), cap_(expansion_cap), use_memo_(memo) {
    problem_.validate();
    if (problem_.model != ModelKind::Binomial)
        throw std::invalid_argument("the exhaustive oracle needs the Binomial model");
}

void ExhaustiveOracle::count() {
    if (++expansions_ > cap_) throw std::runtime_error("oracle: decision tree exceeds the expansion cap");
}

double ExhaustiveOracle::value(int k, EpochKind kind, std::size_t node) {
    if (k < 0 || k > problem_.grid.steps) throw std::out_of_range("oracle: time index out of range");
    if (k == problem_.grid.steps) return terminal(node);
    switch (kind) {
        case EpochKind::Interior: return no_arrival(k, node);
        case EpochKind::AskArrival:
        case EpochKind::BidArrival: return arrival(k, kind, node);
        default: break;
    }
    throw std::invalid_argument("oracle: unsupported epoch kind");
}

double ExhaustiveOracle::terminal(std::size_t node) {
    const auto key = std::make_tuple(problem_.grid.steps, 4, node);
    if (use_memo_)
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    count();
    const GridNode x = grid_.node(node);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : controls_at(problem_, EpochKind::Terminal, x)) {
        const double cash = net_cash_flow(EpochKind::Terminal, x.book(), u, problem_.params);
        const auto [after, inv] = apply_switch(EpochKind::Terminal, x.book(), x.inv, u, problem_.params);
        best = std::max(best, problem_.reward.r_c * cash +
                                  problem_.reward.r_i * problem_.reward.valuation(inv, after.pa, after.pb));
    }
    if (use_memo_) memo_[key] = best;
    return best;
}

double ExhaustiveOracle::resting(int k, std::size_t node) {
    const auto key = std::make_tuple(k, 3, node);
    if (use_memo_)
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    count();
    const GridNode x = grid_.node(node);
    const auto& params = problem_.params;
    double best = -std::numeric_limits<double>::infinity();
    for (const HiddenFlags h : kHiddenOrder) {
        if (!is_admissible(h, x.pa, x.pb, params.limits)) continue;
        double expected = 0.0;
        for (const auto& o : binomial_transitions(x.book(), h, params, problem_.grid.dt)) {
            const SnapResult r = grid_.snap(o.next, x.inv + hidden_shift(h, o.fills, params));
            expected += o.prob * value(k + 1, epoch_of(o.next.arrival), r.index);
        }
        const double v =
            problem_.reward.r_c * hidden_drift(x.pa, x.pb, h, params) * problem_.grid.dt + expected;
        best = std::max(best, v);
    }
    if (use_memo_) memo_[key] = best;
    return best;
}

double ExhaustiveOracle::no_arrival(int k, std::size_t node) {
    const auto key = std::make_tuple(k, 0, node);
    if (use_memo_)
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    count();
    const GridNode x = grid_.node(node);
    double best = resting(k, node);
    for (const auto& u : controls_at(problem_, EpochKind::Interior, x)) {
        const double cash = net_cash_flow(EpochKind::Interior, x.book(), u, problem_.params);
        const auto [after, inv] = apply_switch(EpochKind::Interior, x.book(), x.inv, u, problem_.params);
        best = std::max(best, problem_.reward.r_c * cash + resting(k, grid_.snap(after, inv).index));
    }
    if (use_memo_) memo_[key] = best;
    return best;
}

double ExhaustiveOracle::arrival(int k, EpochKind kind, std::size_t node) {
    const auto key = std::make_tuple(k, kind == EpochKind::AskArrival ? 1 : 2, node);
    if (use_memo_)
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    count();
    const GridNode x = grid_.node(node);
    if (x.pa - x.pb <= 1) throw std::logic_error("oracle: arrival at a one-tick spread");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : controls_at(problem_, kind, x)) {
        const double cash = net_cash_flow(kind, x.book(), u, problem_.params);
        const auto [after, inv] = apply_switch(kind, x.book(), x.inv, u, problem_.params);
        best = std::max(best, problem_.reward.r_c * cash + no_arrival(k, grid_.snap(after, inv).index));
    }
    if (use_memo_) memo_[key] = best;
    return best;
}

double v_diff(double v_int, double v_reg, double floor) {
    if (!(std::abs(v_reg) >= floor) || v_reg == 0.0)
        throw std::domain_error("v_diff: denominator below the floor");
    return (v_int - v_reg) / v_reg;
}

const std::vector<double> kHistogramEdges{0.0, 0.001, 0.01, 0.05, 0.1, 0.15, 0.25, 0.5, 1.0};

DiffReport diff_report(const ValueLayer& reg, const ValueLayer& internalizing,
                       const std::vector<double>& weights) {
    if (reg.size() != internalizing.size())
        throw std::invalid_argument("diff_report: layers differ in size");
    const std::size_t n = reg.size();
    if (!weights.empty()) {
        if (weights.size() != n) throw std::invalid_argument("diff_report: one weight per node expected");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("weights must be >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("weights are not normalized (sum " + std::to_string(total) + ")");
    }

    DiffReport rep;
    rep.v_reg.resize(n);
    rep.v_int.resize(n);
    rep.diff.assign(n, std::numeric_limits<double>::quiet_NaN());
    rep.histogram.assign(kHistogramEdges.size() + 1, 0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.v_reg[i] = reg[i].v0;
        rep.v_int[i] = internalizing[i].v0;
        scale = std::max(scale, std::abs(reg[i].v0));
    }
    rep.floor = 1e-6 * scale;

    double wsum = 0.0, acc = 0.0;
    std::size_t in_band = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(rep.v_reg[i]) >= rep.floor) || rep.v_reg[i] == 0.0) {
            ++rep.excluded;
            continue;
        }
        const double d = v_diff(rep.v_int[i], rep.v_reg[i], rep.floor);
        rep.diff[i] = d;
        ++rep.included;
        const double w = weights.empty() ? 1.0 : weights[i];
        wsum += w;
        acc += w * d;
        if (d >= 0.01 && d <= 0.15) ++in_band;
        if (rep.v_reg[i] > 0.0 && d < -1e-9) ++rep.negative;
        const auto bin = std::upper_bound(kHistogramEdges.begin(), kHistogramEdges.end(), d) -
                         kHistogramEdges.begin();
        ++rep.histogram[std::size_t(bin)];
    }
    rep.weighted_average = wsum > 0.0 ? acc / wsum : 0.0;
    rep.share_in_band = rep.included ? double(in_band) / double(rep.included) : 0.0;
    return rep;
}

std::vector<double> load_weights(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open weights file '" + path + "'");
    std::vector<double> w(grid.size(), 0.0);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        const std::string where = path + ":" + std::to_string(lineno) + ": ";
        if (f.size() != 6) throw ConfigError(where + "expected qa,qb,inv,pa,pb,w");
        GridNode node;
        double weight = 0.0;
        try {
            node = GridNode{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]),
                            std::stoi(f[4])};
            weight = std::stod(f[5]);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header line
            throw ConfigError(where + "malformed row");
        }
        if (!grid.contains(node)) throw ConfigError(where + "node is not on the grid");
        w[grid.index(node)] += weight;
    }
    double total = 0.0;
    for (double x : w) total += x;
    if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("weights in '" + path + "' are not normalized (sum " + std::to_string(total) + ")");
    return w;
}

PremiumResult fair_premium(const std::vector<std::pair<double, double>>& curve, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("fair_premium: delta must be > 0");
    PremiumResult res;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        if (!(curve[i + 1].first > curve[i].first))
            throw std::invalid_argument("fair_premium: ladder must be strictly increasing");
        if (curve[i + 1].second > curve[i].second) res.monotonicity_violations.push_back(i);
    }
    for (const auto& [eps, avg] : curve)
        if (eps > 0.0 && avg >= delta) res.epsilon_star = eps;
    return res;
}

}  // namespace lobswitch

namespace lobswitch {

Problem random_tiny_problem(std::uint64_t seed, int steps) {
    Rng rng = make_stream(seed, 0x7a11, 0);
    std::uniform_int_distribution<int> pick(0, 1 << 20);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Problem p;
    p.grid = GridSpec{1, 1, -1, 1, 13, 15, 11, 13, 0.0, steps, 1.0};
    p.params.limits = PriceLimits{15, 11};
    const double delta = 1 + pick(rng) % 3;
    p.params.delta_a = p.params.delta_b = delta;
    p.params.epsilon = std::round(unif(rng) * 100.0) / 100.0;
    p.params.theta_a = Intensity::table({0.0, 0.05 + 0.4 * unif(rng)});
    p.params.theta_b = Intensity::table({0.0, 0.05 + 0.4 * unif(rng)});
    p.params.lambda_a = Intensity::constant(0.45 * unif(rng));
    p.params.lambda_b = Intensity::constant(0.45 * unif(rng));
    p.trader = pick(rng) % 2 ? TraderKind::Internalizing : TraderKind::Regular;
    p.mesh.fraction_step = pick(rng) % 2 ? 0.25 : 0.5;
    p.mesh.share_granular_arrivals = pick(rng) % 2 == 0;
    switch (pick(rng) % 3) {
        case 0: p.reward.valuation = InventoryValuation::linear(); break;
        case 1: p.reward.valuation = InventoryValuation::target_quad(0.0); break;
        default: p.reward.valuation = InventoryValuation::liquidation(pick(rng) % 3, pick(rng) % 3); break;
    }
    p.reward.r_c = 0.5 + unif(rng);
    p.reward.r_i = 0.5 + unif(rng);
    p.model = ModelKind::Binomial;
    return p;
}

OracleComparison compare_with_oracle(const Problem& problem, bool memo, unsigned threads) {
    const ValueTable table = solve(problem, threads);
    ExhaustiveOracle oracle(problem, 50'000'000, memo);
    OracleComparison cmp;
    const auto& grid = table.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const NodeSolution& s = table.at(0, i);
        const GridNode x = grid.node(i);
        const auto check = [&](double dp, double orc) {
            cmp.max_abs_diff = std::max(cmp.max_abs_diff, std::abs(dp - orc));
            if (std::isnan(dp) || std::isnan(orc)) cmp.max_abs_diff = std::numeric_limits<double>::infinity();
            ++cmp.values_checked;
        };
        check(s.v0, oracle.value(0, EpochKind::Interior, i));
        if (x.pa - x.pb > 1 && problem.grid.steps > 0) {
            check(s.va, oracle.value(0, EpochKind::AskArrival, i));
            check(s.vb, oracle.value(0, EpochKind::BidArrival, i));
        }
    }
    cmp.expansions = oracle.expansions();
    return cmp;
}

}  // namespace lobswitch
