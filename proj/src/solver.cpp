#include "lobswitch/solver.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "lobswitch/parallel.hpp"

namespace lobswitch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Dark-pool choices in (ha, hb) lexicographic order; the first maximizer wins.
constexpr std::array<HiddenFlags, 3> kHiddenOrder{{{0, 0}, {0, 1}, {1, 0}}};

// Control sets only depend on the prices and, at arrival epochs, on the
// volume of the arrival side, so they are built once per solve.
class ControlCache {
public:
    ControlCache(const Problem& problem, const Grid& grid) : grid_(grid) {
        const auto& spec = grid.spec();
        const auto& limits = problem.params.limits;
        n_q_ = std::size_t(std::max(spec.qa_max, spec.qb_max) + 1);
        for (int pa = spec.pa_min; pa <= spec.pa_max; ++pa)
            for (int pb = spec.pb_min; pb <= spec.pb_max; ++pb) {
                if (pa <= pb) continue;
                interior_.push_back(admissible_controls(EpochKind::Interior, pa, pb, problem.trader,
                                                        limits, problem.mesh));
                terminal_.push_back(admissible_controls(EpochKind::Terminal, pa, pb, problem.trader,
                                                        limits, problem.mesh));
                for (std::size_t q = 0; q < n_q_; ++q) {
                    ask_.push_back(admissible_controls(EpochKind::AskArrival, pa, pb, problem.trader,
                                                       limits, problem.mesh, double(q)));
                    bid_.push_back(admissible_controls(EpochKind::BidArrival, pa, pb, problem.trader,
                                                       limits, problem.mesh, double(q)));
                }
            }
    }

    const std::vector<SwitchDecision>& get(EpochKind kind, const GridNode& x) const {
        const std::size_t pair = pair_index(x);
        switch (kind) {
            case EpochKind::Interior: return interior_[pair];
            case EpochKind::Terminal: return terminal_[pair];
            case EpochKind::AskArrival: return ask_[pair * n_q_ + std::size_t(x.qa)];
            case EpochKind::BidArrival: return bid_[pair * n_q_ + std::size_t(x.qb)];
            case EpochKind::Done: break;
        }
        throw std::logic_error("ControlCache: no control set for this epoch");
    }

private:
    std::size_t pair_index(const GridNode& x) const {
        const auto& s = grid_.spec();
        const std::size_t per_pair = std::size_t(s.qa_max + 1) * std::size_t(s.qb_max + 1) *
                                     std::size_t(s.inv_max - s.inv_min + 1);
        return grid_.index(x) / per_pair;
    }

    const Grid& grid_;
    std::size_t n_q_ = 0;
    std::vector<std::vector<SwitchDecision>> interior_, terminal_, ask_, bid_;
};

double event_value(const NodeSolution& s, ArrivalFlag arrival) {
    double v = s.v0;
    if (arrival == ArrivalFlag::Ask) v = s.va;
    if (arrival == ArrivalFlag::Bid) v = s.vb;
    if (arrival == ArrivalFlag::Both)
        throw std::logic_error("simultaneous arrivals reached the controlled chain");
    if (std::isnan(v)) throw std::logic_error("arrival reached a node where arrivals are impossible");
    return v;
}

double hidden_inventory_shift(HiddenFlags h, HiddenFills fills, const ModelParams& params) {
    double d = 0.0;
    if (h.ha == 1 && fills.buy) d += params.delta_a;
    if (h.hb == 1 && fills.sell) d -= params.delta_b;
    return d;
}

struct ClampCounter {
    std::size_t inventory = 0;
    std::size_t any = 0;
    void add(const SnapResult& r) {
        inventory += r.inventory_clamped;
        any += r.clamped;
    }
};

// E[V_{k+1}] for each dark-pool choice in kHiddenOrder. Entries for
// inadmissible choices are left NaN.
std::array<double, 3> continuation_by_hidden(const Problem& problem, const Grid& grid, int k,
                                             const ValueLayer& next, std::size_t y,
                                             ClampCounter& clamps) {
    const GridNode node = grid.node(y);
    const BookState book = node.book();
    const auto& params = problem.params;
    const double dt = grid.spec().dt;

    std::array<bool, 3> allowed{};
    for (std::size_t i = 0; i < 3; ++i)
        allowed[i] = is_admissible(kHiddenOrder[i], node.pa, node.pb, params.limits);

    std::array<double, 3> sum{0.0, 0.0, 0.0};
    const auto accumulate = [&](const TransitionOutcome& o, double weight) {
        for (std::size_t i = 0; i < 3; ++i) {
            if (!allowed[i]) continue;
            const double inv = node.inv + hidden_inventory_shift(kHiddenOrder[i], o.fills, params);
            const SnapResult r = grid.snap(o.next, inv);
            clamps.add(r);
            sum[i] += weight * event_value(next[r.index], o.next.arrival);
        }
    };

    if (problem.model == ModelKind::Binomial) {
        for_each_binomial_outcome(book, params, dt,
                                  [&](const TransitionOutcome& o) { accumulate(o, o.prob); });
    } else {
        Rng rng = make_stream(problem.seed, std::uint64_t(k), y);
        for (int m = 0; m < problem.mc_samples; ++m) {
            const StepNoise noise = draw_noise(rng);
            accumulate(continuous_transition(book, params, dt, noise, true), 1.0);
        }
        for (double& s : sum) s /= problem.mc_samples;
    }
    for (std::size_t i = 0; i < 3; ++i)
        if (!allowed[i]) sum[i] = kNaN;
    return sum;
}

InterventionResult best_trade(const Problem& problem, const Grid& grid,
                              const std::vector<SwitchDecision>& controls, EpochKind kind,
                              const GridNode& x, const std::vector<double>& continuation,
                              ClampCounter& clamps) {
    InterventionResult best;
    const BookState book = x.book();
    const auto& params = problem.params;
    const auto& reward = problem.reward;
    for (const SwitchDecision& u : controls) {
        const double cash = net_cash_flow(kind, book, u, params);
        const auto [after, inv] = apply_switch(kind, book, x.inv, u, params);
        double value = reward.r_c * cash;
        std::size_t target = 0;
        if (kind == EpochKind::Terminal) {
            value += reward.r_i * reward.valuation(inv, after.pa, after.pb);
        } else {
            const SnapResult r = grid.snap(after, inv);
            clamps.add(r);
            target = r.index;
            value += continuation[target];
        }
        if (!best.valid || value > best.value) {
            best.value = value;
            best.u = u;
            best.target = target;
            best.valid = true;
        }
    }
    return best;
}

void merge(SolveDiagnostics* diagnostics, std::atomic<std::size_t>& inv, std::atomic<std::size_t>& any) {
    if (!diagnostics) return;
    diagnostics->inventory_clamps += inv.load();
    diagnostics->state_clamps += any.load();
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::Binomial ? "binomial" : "continuous";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "binomial") return ModelKind::Binomial;
    if (text == "continuous") return ModelKind::Continuous;
    throw std::invalid_argument("unknown model '" + std::string(text) +
                                "' (expected binomial or continuous)");
}

void Problem::validate() const {
    params.validate();
    grid.validate();
    reward.validate();
    if (!(mesh.fraction_step > 0.0 && mesh.fraction_step <= 1.0))
        throw std::invalid_argument("fraction_step must lie in (0,1]");
    if (model == ModelKind::Continuous && mc_samples <= 0)
        throw std::invalid_argument("mc_samples must be > 0");
    if (model == ModelKind::Binomial) {
        const int max_spread = std::max(1, grid.pa_max - grid.pb_min + 1);
        for (int s = 1; s <= max_spread; ++s) {
            const auto [a, b] = arrival_probabilities(params, s, grid.dt);
            const auto [fa, fb] = fill_probabilities(params, s, grid.dt);
            if (a + b > 1.0 + 1e-12 || fa + fb > 1.0 + 1e-12)
                throw std::invalid_argument("Binomial event probabilities exceed one at spread " +
                                            std::to_string(s));
        }
    }
}

InterventionResult intervention_max(const Problem& problem, const Grid& grid, EpochKind kind,
                                    const GridNode& x, const std::vector<double>& continuation,
                                    std::size_t* inventory_clamps) {
    if (kind == EpochKind::Done) {
        InterventionResult r;
        r.target = grid.index(x);
        r.value = continuation.at(r.target);
        r.valid = true;
        return r;
    }
    if (kind != EpochKind::Terminal && continuation.size() != grid.size())
        throw std::invalid_argument("intervention_max: continuation does not match the grid");
    double arrival_volume = -1.0;
    if (kind == EpochKind::AskArrival) arrival_volume = x.qa;
    if (kind == EpochKind::BidArrival) arrival_volume = x.qb;
    const auto controls = admissible_controls(kind, x.pa, x.pb, problem.trader,
                                              problem.params.limits, problem.mesh, arrival_volume);
    ClampCounter clamps;
    auto r = best_trade(problem, grid, controls, kind, x, continuation, clamps);
    if (inventory_clamps) *inventory_clamps += clamps.inventory;
    return r;
}

double expectation_estimate(const Problem& problem, const Grid& grid, int k, const ValueLayer& next,
                            std::size_t y, HiddenFlags h) {
    if (next.size() != grid.size())
        throw std::invalid_argument("expectation_estimate: layer does not match the grid");
    if (problem.model == ModelKind::Continuous && problem.mc_samples <= 0)
        throw std::invalid_argument("mc_samples must be > 0");
    const GridNode node = grid.node(y);
    if (!is_admissible(h, node.pa, node.pb, problem.params.limits))
        throw std::invalid_argument("expectation_estimate: inadmissible hidden flags");
    ClampCounter clamps;
    const auto all = continuation_by_hidden(problem, grid, k, next, y, clamps);
    for (std::size_t i = 0; i < 3; ++i)
        if (kHiddenOrder[i] == h) return all[i];
    throw std::logic_error("unreachable");
}

ValueLayer terminal_layer(const Problem& problem, const Grid& grid, unsigned threads) {
    const ControlCache cache(problem, grid);
    ValueLayer layer(grid.size());
    const std::vector<double> none;
    parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
        ClampCounter clamps;
        for (std::size_t i = begin; i < end; ++i) {
            const GridNode x = grid.node(i);
            const auto best = best_trade(problem, grid, cache.get(EpochKind::Terminal, x),
                                         EpochKind::Terminal, x, none, clamps);
            NodeSolution& s = layer[i];
            s.v0 = s.va = s.vb = best.value;
            s.u0 = s.u_ask = s.u_bid = best.u;
            s.wait = false;
            s.h = {};
        }
    });
    return layer;
}

ValueLayer backward_step(const Problem& problem, const Grid& grid, int k, const ValueLayer& next,
                         unsigned threads, SolveDiagnostics* diagnostics) {
    if (next.size() != grid.size())
        throw std::invalid_argument("backward_step: layer does not match the grid");
    const ControlCache cache(problem, grid);
    const double dt = grid.spec().dt;
    const std::size_t n = grid.size();
    std::atomic<std::size_t> inv_clamps{0}, any_clamps{0};

    // Pass 1: best value of resting (no trade) at every node.
    std::vector<double> wait_value(n);
    std::vector<HiddenFlags> wait_h(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        ClampCounter clamps;
        for (std::size_t y = begin; y < end; ++y) {
            const GridNode node = grid.node(y);
            const auto cont = continuation_by_hidden(problem, grid, k, next, y, clamps);
            bool found = false;
            for (std::size_t i = 0; i < 3; ++i) {
                if (std::isnan(cont[i])) continue;
                const double drift = hidden_drift(node.pa, node.pb, kHiddenOrder[i], problem.params);
                const double v = problem.reward.r_c * drift * dt + cont[i];
                if (!found || v > wait_value[y]) {
                    wait_value[y] = v;
                    wait_h[y] = kHiddenOrder[i];
                    found = true;
                }
            }
        }
        inv_clamps += clamps.inventory;
        any_clamps += clamps.any;
    });

    // Pass 2: v0 = max(wait, best trade followed by waiting).
    ValueLayer layer(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        ClampCounter clamps;
        for (std::size_t i = begin; i < end; ++i) {
            const GridNode x = grid.node(i);
            NodeSolution& s = layer[i];
            s.v0 = wait_value[i];
            s.wait = true;
            s.h = wait_h[i];
            const auto best = best_trade(problem, grid, cache.get(EpochKind::Interior, x),
                                         EpochKind::Interior, x, wait_value, clamps);
            if (best.valid && best.value > s.v0) {
                s.v0 = best.value;
                s.wait = false;
                s.u0 = best.u;
                s.h = wait_h[best.target];
            }
        }
        inv_clamps += clamps.inventory;
        any_clamps += clamps.any;
    });

    // Pass 3: forced decisions at arrivals, continuing with v0 at the same time.
    std::vector<double> v0(n);
    for (std::size_t i = 0; i < n; ++i) v0[i] = layer[i].v0;
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        ClampCounter clamps;
        for (std::size_t i = begin; i < end; ++i) {
            const GridNode x = grid.node(i);
            NodeSolution& s = layer[i];
            if (x.pa - x.pb <= 1) {
                s.va = s.vb = kNaN;
                continue;
            }
            const auto ask = best_trade(problem, grid, cache.get(EpochKind::AskArrival, x),
                                        EpochKind::AskArrival, x, v0, clamps);
            const auto bid = best_trade(problem, grid, cache.get(EpochKind::BidArrival, x),
                                        EpochKind::BidArrival, x, v0, clamps);
            s.va = ask.value;
            s.u_ask = ask.u;
            s.vb = bid.value;
            s.u_bid = bid.u;
        }
        inv_clamps += clamps.inventory;
        any_clamps += clamps.any;
    });

    merge(diagnostics, inv_clamps, any_clamps);
    return layer;
}

ValueTable solve(const Problem& problem, unsigned threads) {
    problem.validate();
    Grid grid = build_grid(problem.grid);
    threads = std::max(1u, threads);
    const int steps = problem.grid.steps;

    SolveDiagnostics diagnostics;
    diagnostics.threads = threads;
    diagnostics.layer_seconds.assign(std::size_t(steps) + 1, 0.0);
    std::vector<ValueLayer> layers(std::size_t(steps) + 1);

    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    layers[std::size_t(steps)] = terminal_layer(problem, grid, threads);
    diagnostics.layer_seconds[std::size_t(steps)] =
        std::chrono::duration<double>(clock::now() - start).count();
    for (int k = steps - 1; k >= 0; --k) {
        start = clock::now();
        layers[std::size_t(k)] =
            backward_step(problem, grid, k, layers[std::size_t(k) + 1], threads, &diagnostics);
        diagnostics.layer_seconds[std::size_t(k)] =
            std::chrono::duration<double>(clock::now() - start).count();
    }
    return ValueTable(std::move(grid), std::move(layers), std::move(diagnostics));
}

unsigned default_threads() {
    if (const char* env = std::getenv("LOBSWITCH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return unsigned(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lobswitch
