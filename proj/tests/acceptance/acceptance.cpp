// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit
// status is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lobswitch/accounting.hpp"
#include "lobswitch/config.hpp"
#include "lobswitch/evaluator.hpp"
#include "lobswitch/policy_io.hpp"

using namespace lobswitch;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned workers() { return std::max(1u, default_threads()); }

Problem desk(TraderKind trader = TraderKind::Internalizing, double epsilon = 0.0) {
    RunConfig cfg;
    cfg.problem.trader = trader;
    cfg.problem.params.epsilon = epsilon;
    return cfg.problem;
}

Outcome grid_cardinality() {
    const auto t = Clock::now();
    const auto grid = build_grid(GridSpec{});
    const double secs = seconds_since(t);
    const std::size_t combinatorial = 11u * 11u * 41u * 21u;
    const bool ok = grid.size() == 104181 && grid.size() == combinatorial &&
                    count_admissible(GridSpec{}) == combinatorial && secs < 1.0;
    return {ok, fmt("nodes=%zu combinatorial=%zu build=%.3fs (limit 1s)", grid.size(), combinatorial, secs)};
}

Outcome oracle_equivalence() {
    const auto t = Clock::now();
    double worst = 0.0;
    std::size_t checked = 0, max_nodes = 0;
    int instances = 0;
    for (std::uint64_t seed = 1; seed <= 24; ++seed) {
        const int steps = 1 + int(seed % 3);
        const auto problem = random_tiny_problem(1000 + seed, steps);
        max_nodes = std::max(max_nodes, build_grid(problem.grid).size());
        const auto cmp = compare_with_oracle(problem, true, 1);
        worst = std::max(worst, cmp.max_abs_diff);
        checked += cmp.values_checked;
        ++instances;
    }
    // Without the transposition memo the tree is only tractable for K = 1.
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto cmp = compare_with_oracle(random_tiny_problem(2000 + seed, 1), false, 1);
        worst = std::max(worst, cmp.max_abs_diff);
        checked += cmp.values_checked;
        ++instances;
    }
    const double secs = seconds_since(t);
    const bool ok = instances >= 20 && max_nodes <= 200 && worst <= 1e-9 && secs < 30.0;
    return {ok, fmt("instances=%d values=%zu max_nodes=%zu max|diff|=%.3g (tol 1e-9) time=%.1fs (limit 30s)",
                    instances, checked, max_nodes, worst, secs)};
}

Outcome ordering() {
    const unsigned threads = workers();
    auto timed_solve = [&](const Problem& p, double* secs) {
        const auto t = Clock::now();
        auto table = solve(p, threads);
        *secs = seconds_since(t);
        return table;
    };
    double slowest = 0.0, s = 0.0;
    const auto reg = timed_solve(desk(TraderKind::Regular), &s);
    slowest = std::max(slowest, s);
    std::vector<ValueTable> ladder;
    const std::vector<double> eps{0.0, 0.25, 0.5, 1.0};
    for (double e : eps) {
        ladder.push_back(timed_solve(desk(TraderKind::Internalizing, e), &s));
        slowest = std::max(slowest, s);
    }
    const auto& grid = reg.grid();
    std::size_t reg_bad = 0, mono_bad = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (reg.at(0, i).v0 > ladder[0].at(0, i).v0 + 1e-9) ++reg_bad;
        for (std::size_t j = 0; j + 1 < ladder.size(); ++j)
            if (ladder[j + 1].at(0, i).v0 > ladder[j].at(0, i).v0 + 1e-9) {
                ++mono_bad;
                break;
            }
    }
    const bool ok = reg_bad == 0 && mono_bad == 0 && slowest < 600.0;
    return {ok, fmt("nodes=%zu reg>int violations=%zu eps-monotone violations=%zu slowest solve=%.1fs "
                    "threads=%u",
                    grid.size(), reg_bad, mono_bad, slowest, threads)};
}

Outcome dp_mc_consistency() {
    RunConfig cfg;
    const unsigned threads = workers();
    const auto table = solve(cfg.problem, threads);
    const auto policy = extract_policy(table, cfg);
    const auto& grid = table.grid();
    const auto x0 = grid.index({5, 5, 0, 16, 15});
    const double v0 = table.at(0, x0).v0;
    const auto best = run_policy(cfg.problem, grid, TableRule(policy), cfg.x0, 0.0, 2024, 100000, threads);
    const double z = (best.mean - v0) / best.std_error;
    bool ok = std::abs(z) <= 3.0;
    std::string detail = fmt("v0=%.4f mean=%.4f se=%.4f z=%.2f", v0, best.mean, best.std_error, z);

    const PassiveRule passive;
    const GreedyOpenRule greedy(cfg.problem);
    const RandomRule random(cfg.problem, 77);
    const HiddenRule buy_dark({1, 0}, cfg.problem.params.limits);
    const HiddenRule sell_dark({0, 1}, cfg.problem.params.limits);
    const std::pair<const char*, const DecisionRule*> rules[] = {
        {"passive", &passive}, {"greedy", &greedy}, {"random", &random},
        {"dark-buy", &buy_dark}, {"dark-sell", &sell_dark}};
    for (const auto& [name, rule] : rules) {
        const auto s = run_policy(cfg.problem, grid, *rule, cfg.x0, 0.0, 2025, 20000, threads);
        const bool below = s.mean <= v0 + 3 * s.std_error;
        ok = ok && below;
        detail += fmt(" %s=%.2f%s", name, s.mean, below ? "" : "(above)");
    }
    return {ok, detail};
}

Outcome parallel_determinism() {
    const Problem p = desk();
    const unsigned counts[] = {1, 2, 4, 8};
    std::vector<ValueTable> tables;
    std::vector<double> layer_time;
    for (unsigned P : counts) {
        tables.push_back(solve(p, P));
        const auto& secs = tables.back().diagnostics().layer_seconds;
        double total = 0.0;
        for (double s : secs) total += s;
        layer_time.push_back(total / double(secs.size()));
    }
    std::size_t differing = 0;
    const auto& base = tables[0];
    for (std::size_t t = 1; t < tables.size(); ++t)
        for (int k = 0; k <= base.steps(); ++k) {
            const auto& a = base.layer(k);
            const auto& b = tables[t].layer(k);
            for (std::size_t i = 0; i < a.size(); ++i) {
                const auto& x = a[i];
                const auto& y = b[i];
                const bool same = std::memcmp(&x.v0, &y.v0, sizeof(double)) == 0 &&
                                  std::memcmp(&x.va, &y.va, sizeof(double)) == 0 &&
                                  std::memcmp(&x.vb, &y.vb, sizeof(double)) == 0 && x.u0 == y.u0 &&
                                  x.u_ask == y.u_ask && x.u_bid == y.u_bid && x.h == y.h &&
                                  x.wait == y.wait;
                if (!same) ++differing;
            }
        }
    const double ratio = layer_time[3] / layer_time[0];
    const bool ok = differing == 0 && ratio <= 0.35;
    return {ok, fmt("differing entries=%zu layer time P=1 %.3fs P=8 %.3fs ratio=%.2f (limit 0.35) cores=%u",
                    differing, layer_time[0], layer_time[3], ratio, std::thread::hardware_concurrency())};
}

Outcome accounting_brute_force() {
    const double delta = 5.0;
    std::size_t cases = 0, mismatches = 0;
    for (int u = 1; u <= 5; ++u)
        for (int q = 0; q <= 10; ++q)
            for (int p = 12; p <= 18; ++p) {
                double ladder = double(q) * p;
                for (int k = 1; k <= u - 1; ++k) ladder += delta * (p + k);
                const double f = cash_flow(Side::Ask, EpochKind::Interior, false, q, p, u, delta, 0.0);
                ++cases;
                if (f != ladder) ++mismatches;
            }
    return {mismatches == 0, fmt("cases=%zu mismatches=%zu (exact)", cases, mismatches)};
}

Outcome soft_figure() {
    const unsigned threads = workers();
    const auto reg = solve(desk(TraderKind::Regular), threads);
    const auto in = solve(desk(TraderKind::Internalizing), threads);
    const auto rep = diff_report(reg.layer(0), in.layer(0));
    std::size_t below = 0;
    for (std::size_t i = 0; i < rep.diff.size(); ++i)
        if (std::isfinite(rep.diff[i]) && reg.at(0, i).v0 > 0.0 && rep.diff[i] < -1e-9) ++below;
    const bool in_band = rep.share_in_band >= 0.20 && rep.share_in_band <= 0.50;
    return {below == 0,
            fmt("share in [0.01,0.15]=%.4f%s included=%zu excluded=%zu nodes with V^diff<-1e-9=%zu",
                rep.share_in_band, in_band ? "" : " FLAG: outside [0.20,0.50]", rep.included, rep.excluded,
                below)};
}

Outcome path_identities() {
    ModelParams p;
    p.sigma_a = p.sigma_b = 10.0;
    p.theta_a = p.theta_b = Intensity::linear(0.5);
    const BookState x0{5, 5, 20, 15, ArrivalFlag::None};
    std::size_t rows = 0, identity_bad = 0, spread_bad = 0;
    for (std::uint64_t seed = 1; seed <= 10000; ++seed) {
        for (const auto& r : simulate_book(p, x0, 600.0, 1.0, seed)) {
            ++rows;
            if (r.pa - x0.pa != r.la - r.na || r.pb - x0.pb != r.nb - r.lb) ++identity_bad;
            if (r.pa - r.pb < 1) ++spread_bad;
        }
    }
    return {identity_bad == 0 && spread_bad == 0,
            fmt("paths=10000 rows=%zu identity violations=%zu spread<1=%zu", rows, identity_bad, spread_bad)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number(s), 1-8 (default: all)");
    CLI11_PARSE(app, argc, argv);
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

    const std::function<Outcome()> checks[] = {grid_cardinality, oracle_equivalence, ordering,
                                               dp_mc_consistency, parallel_determinism,
                                               accounting_brute_force, soft_figure, path_identities};
    const char* names[] = {"grid cardinality", "oracle equivalence", "ordering", "DP/MC consistency",
                           "parallel determinism and scaling", "accounting brute force",
                           "relative advantage", "pathwise identities"};
    int failures = 0;
    for (int c : selected) {
        if (c < 1 || c > 8) {
            std::fprintf(stderr, "unknown criterion %d\n", c);
            return 64;
        }
        const auto t = Clock::now();
        Outcome o;
        try {
            o = checks[c - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c, names[c - 1],
                    o.detail.c_str(), seconds_since(t));
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
