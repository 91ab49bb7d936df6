#include "lobswitch/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lobswitch/config.hpp"
#include "lobswitch/evaluator.hpp"
#include "lobswitch/grid.hpp"
#include "lobswitch/market_model.hpp"
#include "lobswitch/policy_io.hpp"
#include "lobswitch/solver.hpp"

namespace lobswitch {

namespace {

namespace fs = std::filesystem;

// Oracle disagreement, reported with its own exit status.
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes through a temporary file and renames it, so a failed run leaves
// no partial output behind.
void write_atomically(const std::string& path, bool binary,
                      const std::function<void(std::ostream&)>& body) {
    const fs::path target(path);
    if (target.has_parent_path() && !fs::exists(target.parent_path()))
        throw MissingFileError("output directory '" + target.parent_path().string() + "' does not exist");
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        try {
            body(out);
        } catch (...) {
            out.close();
            fs::remove(tmp);
            throw;
        }
        out.flush();
        if (!out) {
            fs::remove(tmp);
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, target);
}

// Shared config flags: a params file plus optional grid and reward files,
// applied in that order; explicit flags override all of them.
struct ConfigFlags {
    std::string params, grid, reward;
    std::string model, trader;
    std::optional<double> epsilon;
    std::optional<int> mc_samples;
    unsigned threads = 0;

    void add(CLI::App* cmd, bool solver_flags) {
        cmd->add_option("--params", params, "Model/config file (key = value lines)");
        if (!solver_flags) return;
        cmd->add_option("--grid", grid, "Grid config file");
        cmd->add_option("--reward", reward,
                        "Reward config file, or an inline spec such as liquidation:2,2");
        cmd->add_option("--model", model, "binomial or continuous");
        cmd->add_option("--trader", trader, "regular or internalizing");
        cmd->add_option("--epsilon", epsilon, "Internalization premium per share");
        cmd->add_option("--mc-samples", mc_samples, "Monte Carlo samples per node (continuous model)");
        cmd->add_option("--threads", threads, "Worker threads (0: LOBSWITCH_THREADS or all cores)");
    }

    // The book simulator only needs the market parameters and the start
    // state, so it skips the solver checks.
    RunConfig load(bool book_only = false) const {
        RunConfig c;
        if (!params.empty()) c.apply_file(params);
        if (!grid.empty()) c.apply_file(grid);
        if (!reward.empty()) {
            if (fs::exists(reward))
                c.apply_file(reward);
            else if (reward.find(':') != std::string::npos || reward == "linear")
                c.set("reward", reward);
            else
                throw MissingFileError("cannot open reward file '" + reward + "'");
        }
        if (!model.empty()) c.set("model", model);
        if (!trader.empty()) c.set("trader", trader);
        if (epsilon) c.set("epsilon", num(*epsilon));
        if (mc_samples) c.set("mc_samples", std::to_string(*mc_samples));
        if (threads) c.threads = threads;
        if (!book_only) {
            c.validate();
            return c;
        }
        try {
            c.problem.params.validate();
            validate_state(c.x0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return c;
    }
};

unsigned resolve_threads(unsigned requested) { return requested ? requested : default_threads(); }

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw ConfigError("bad number '" + cell + "' in list");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

int cmd_book_sim(const ConfigFlags& flags, double t_end, double dt, std::uint64_t seed,
                 const std::string& out_path, std::ostream& out) {
    RunConfig config = flags.load(true);
    const auto path = simulate_book(config.problem.params, config.x0, t_end, dt, seed);
    write_atomically(out_path, false, [&](std::ostream& os) {
        os << "# lobswitch book-sim params_hash " << hex64(config.hash()) << " seed " << seed
           << " t_end " << num(t_end) << " dt " << num(dt) << "\n";
        os << "t,qa,qb,pa,pb,La,Lb,Na,Nb\n";
        for (const auto& r : path)
            os << num(r.t) << ',' << num(r.qa) << ',' << num(r.qb) << ',' << r.pa << ',' << r.pb
               << ',' << r.la << ',' << r.lb << ',' << r.na << ',' << r.nb << '\n';
    });
    out << "book-sim: " << path.size() << " rows written to " << out_path << "\n";
    return kExitOk;
}

int cmd_solve(const ConfigFlags& flags, const std::string& out_path, std::string format,
              std::ostream& out) {
    RunConfig config = flags.load();
    if (format.empty()) format = fs::path(out_path).extension() == ".bin" ? "bin" : "csv";
    if (format != "csv" && format != "bin") throw ConfigError("--format must be csv or bin");
    const Grid grid = build_grid(config.problem.grid);
    out << "grid: " << grid.size() << " admissible points\n";
    const unsigned threads = resolve_threads(config.threads);
    const auto start = std::chrono::steady_clock::now();
    const ValueTable table = solve(config.problem, threads);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Policy policy = extract_policy(table, config);
    write_atomically(out_path, format == "bin", [&](std::ostream& os) {
        if (format == "bin")
            write_policy_binary(os, policy);
        else
            write_policy_csv(os, policy);
    });
    const auto& d = table.diagnostics();
    out << "solve: " << to_string(config.problem.model) << ", " << to_string(config.problem.trader)
        << " trader, epsilon " << num(config.problem.params.epsilon) << ", " << threads
        << " thread(s), " << std::fixed << std::setprecision(2) << secs << " s\n";
    out.unsetf(std::ios::floatfield);
    out << "diagnostics: " << d.inventory_clamps << " inventory clamps, " << d.state_clamps
        << " state clamps\n";
    const SnapResult x0 = grid.snap(config.x0, config.inv0);
    if (!x0.clamped) out << "v0(x0) = " << num(table.at(0, x0.index).v0) << "\n";
    out << "params_hash " << hex64(config.hash()) << "\n";
    out << "policy written to " << out_path << "\n";
    return kExitOk;
}

GridNode parse_x0(const std::string& text) {
    const auto v = parse_list(text);
    if (v.size() != 5) throw ConfigError("--x0 expects qa,qb,inv,pa,pb");
    for (double x : v)
        if (x != std::floor(x)) throw ConfigError("--x0 must be a grid node (integers)");
    return GridNode{int(v[0]), int(v[1]), int(v[2]), int(v[3]), int(v[4])};
}

int cmd_evaluate(const std::string& policy_path, std::size_t paths, std::uint64_t seed,
                 const std::string& x0_text, const std::string& out_path, std::size_t episodes,
                 unsigned threads, std::ostream& out) {
    const Policy policy = read_policy_file(policy_path);
    const auto& config = policy.config;
    const Grid& grid = policy.table.grid();
    GridNode x0{int(config.x0.qa), int(config.x0.qb), int(config.inv0), config.x0.pa, config.x0.pb};
    if (!x0_text.empty()) x0 = parse_x0(x0_text);
    if (!grid.contains(x0)) throw ConfigError("initial state is not on the policy grid");
    const TableRule rule(policy);
    const auto stats = run_policy(config.problem, grid, rule, x0.book(), x0.inv, seed, paths,
                                  resolve_threads(threads), out_path.empty() ? 0 : episodes);
    const double v0 = policy.table.at(0, grid.index(x0)).v0;
    if (!out_path.empty()) {
        write_atomically(out_path, false, [&](std::ostream& os) {
            os << "# lobswitch evaluate params_hash " << hex64(config.hash()) << " seed " << seed
               << "\n";
            os << "t,qa,qb,pa,pb,action,ua,ub,ha,hb,inventory,cash\n";
            for (std::size_t p = 0; p < stats.episodes.size(); ++p) {
                const auto& e = stats.episodes[p];
                os << "# path " << p << " reward " << num(e.reward) << "\n";
                for (const auto& s : e.steps)
                    os << num(s.t) << ',' << num(s.book.qa) << ',' << num(s.book.qb) << ','
                       << s.book.pa << ',' << s.book.pb << ',' << s.action << ',' << num(s.u.ua)
                       << ',' << num(s.u.ub) << ',' << s.h.ha << ',' << s.h.hb << ','
                       << num(s.position.inventory) << ',' << num(s.position.cash) << '\n';
            }
        });
    }
    out << "paths " << stats.paths << "\n";
    out << "mean_reward " << num(stats.mean) << "\n";
    out << "std_error " << num(stats.std_error) << "\n";
    out << "v0_x0 " << num(v0) << "\n";
    out << "z_score " << num(stats.std_error > 0 ? (stats.mean - v0) / stats.std_error : 0.0) << "\n";
    out << "inventory_clamps " << stats.inventory_clamps << "\n";
    return kExitOk;
}

int cmd_premium(const ConfigFlags& flags, const std::string& ladder_text,
                const std::string& weights_spec, double delta, const std::string& out_path,
                const std::string& diff_path, std::ostream& out) {
    RunConfig config = flags.load();
    const auto ladder = parse_list(ladder_text);
    for (std::size_t i = 0; i < ladder.size(); ++i)
        if (ladder[i] < 0.0 || (i > 0 && !(ladder[i] > ladder[i - 1])))
            throw ConfigError("--epsilon-ladder must be non-negative and strictly increasing");
    if (!(delta > 0.0)) throw ConfigError("--delta must be > 0");
    const unsigned threads = resolve_threads(config.threads);
    const Grid grid = build_grid(config.problem.grid);
    out << "grid: " << grid.size() << " admissible points\n";
    std::vector<double> weights;
    if (weights_spec != "uniform") weights = load_weights(weights_spec, grid);

    Problem reg = config.problem;
    reg.trader = TraderKind::Regular;
    const ValueTable reg_table = solve(reg, threads);
    out << "solved regular trader\n";

    nlohmann::ordered_json report;
    report["params_hash"] = hex64(config.hash());
    report["grid_nodes"] = grid.size();
    report["weights"] = weights_spec;
    report["delta"] = delta;
    report["band"] = {0.01, 0.15};
    report["histogram_edges"] = kHistogramEdges;
    std::vector<std::pair<double, double>> curve;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::vector<DiffReport> reports;
    for (double eps : ladder) {
        Problem internal = config.problem;
        internal.trader = TraderKind::Internalizing;
        internal.params.epsilon = eps;
        const ValueTable int_table = solve(internal, threads);
        DiffReport rep = diff_report(reg_table.layer(0), int_table.layer(0), weights);
        curve.emplace_back(eps, rep.weighted_average);
        rows.push_back({{"epsilon", eps},
                        {"weighted_average", rep.weighted_average},
                        {"share_in_band", rep.share_in_band},
                        {"included", rep.included},
                        {"excluded", rep.excluded},
                        {"negative", rep.negative},
                        {"histogram", rep.histogram}});
        out << "epsilon " << num(eps) << ": weighted average " << num(rep.weighted_average)
            << ", share in [0.01, 0.15] " << num(rep.share_in_band) << "\n";
        reports.push_back(std::move(rep));
    }
    const PremiumResult premium = fair_premium(curve, delta);
    report["curve"] = rows;
    report["epsilon_star"] = premium.epsilon_star ? nlohmann::ordered_json(*premium.epsilon_star)
                                                  : nlohmann::ordered_json(nullptr);
    report["monotonicity_violations"] = premium.monotonicity_violations;

    write_atomically(out_path, false, [&](std::ostream& os) { os << report.dump(2) << "\n"; });
    if (!diff_path.empty()) {
        write_atomically(diff_path, false, [&](std::ostream& os) {
            os << "# lobswitch premium params_hash " << hex64(config.hash()) << "\n";
            os << "epsilon,qa,qb,inv,pa,pb,v_reg,v_int,v_diff\n";
            for (std::size_t j = 0; j < ladder.size(); ++j)
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const GridNode n = grid.node(i);
                    os << num(ladder[j]) << ',' << n.qa << ',' << n.qb << ',' << n.inv << ',' << n.pa
                       << ',' << n.pb << ',' << num(reports[j].v_reg[i]) << ','
                       << num(reports[j].v_int[i]) << ',' << num(reports[j].diff[i]) << '\n';
                }
        });
    }
    out << "epsilon_star "
        << (premium.epsilon_star ? num(*premium.epsilon_star) : std::string("none")) << "\n";
    out << "report written to " << out_path << "\n";
    return kExitOk;
}

int cmd_oracle_check(int instances, int max_steps, std::uint64_t seed, std::ostream& out) {
    if (instances <= 0 || max_steps < 0 || max_steps > 3)
        throw ConfigError("need --instances > 0 and --max-steps in 0..3");
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const int steps = max_steps == 0 ? 0 : 1 + i % max_steps;
        const Problem p = random_tiny_problem(seed + std::uint64_t(i), steps);
        const auto cmp = compare_with_oracle(p);
        worst = std::max(worst, cmp.max_abs_diff);
        out << "instance " << i << ": K=" << steps << " " << to_string(p.trader) << ", "
            << cmp.values_checked << " values, max |diff| " << num(cmp.max_abs_diff) << "\n";
    }
    out << "max |diff| " << num(worst) << "\n";
    if (!(worst <= 1e-9)) throw ValidationFailure("solver and oracle disagree beyond 1e-9");
    return kExitOk;
}

}  // namespace

const char* version_string() {
#ifdef __VERSION__
    return "lobswitch 0.1.0 (C++20, " __VERSION__ ")";
#else
    return "lobswitch 0.1.0 (C++20)";
#endif
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Limit order book switching-control solver"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "Print build information");

    ConfigFlags sim_flags;
    double t_end = 600.0, dt = 1.0;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    auto* sim = app.add_subcommand("book-sim", "Simulate the uncontrolled continuous book");
    sim_flags.add(sim, false);
    sim->add_option("--t-end", t_end, "Horizon")->capture_default_str();
    sim->add_option("--dt", dt, "Time step")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Output CSV")->required();

    ConfigFlags solve_flags;
    std::string solve_out, format;
    auto* sol = app.add_subcommand("solve", "Backward induction over the grid");
    solve_flags.add(sol, true);
    sol->add_option("--out", solve_out, "Policy file")->required();
    sol->add_option("--format", format, "csv or bin (default: from the extension)");

    std::string policy_path, x0_text, traj_out;
    std::size_t paths = 10000, episodes = 10;
    std::uint64_t eval_seed = 1;
    unsigned eval_threads = 0;
    auto* ev = app.add_subcommand("evaluate", "Simulate a solved policy forward");
    ev->add_option("--policy", policy_path, "Policy file from solve")->required();
    ev->add_option("--paths", paths, "Number of paths")->capture_default_str();
    ev->add_option("--seed", eval_seed, "Random seed")->capture_default_str();
    ev->add_option("--x0", x0_text, "Initial node qa,qb,inv,pa,pb (default: from the config)");
    ev->add_option("--out", traj_out, "Trajectory CSV");
    ev->add_option("--episodes", episodes, "Paths written to --out")->capture_default_str();
    ev->add_option("--threads", eval_threads, "Worker threads");

    ConfigFlags prem_flags;
    std::string ladder = "0,0.25,0.5,1", weights = "uniform", prem_out, diff_out;
    double delta = 0.005;
    auto* prem = app.add_subcommand("premium", "Relative advantage of internalizing and fair premium");
    prem_flags.add(prem, true);
    prem->add_option("--epsilon-ladder", ladder, "Comma-separated premiums")->capture_default_str();
    prem->add_option("--weights", weights, "uniform or a qa,qb,inv,pa,pb,w file")->capture_default_str();
    prem->add_option("--delta", delta, "Threshold on the weighted average")->capture_default_str();
    prem->add_option("--out", prem_out, "Report JSON")->required();
    prem->add_option("--diff-out", diff_out, "Per-node CSV of the relative advantage");

    int instances = 20, max_steps = 3;
    std::uint64_t oracle_seed = 1;
    auto* orc = app.add_subcommand("oracle-check", "Compare the solver with exhaustive enumeration");
    orc->add_option("--instances", instances, "Random tiny instances")->capture_default_str();
    orc->add_option("--max-steps", max_steps, "Largest K (at most 3)")->capture_default_str();
    orc->add_option("--seed", oracle_seed, "Instance seed")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (show_version) {
        out << version_string() << "\n";
        return kExitOk;
    }
    try {
        if (sim->parsed()) return cmd_book_sim(sim_flags, t_end, dt, sim_seed, sim_out, out);
        if (sol->parsed()) return cmd_solve(solve_flags, solve_out, format, out);
        if (ev->parsed())
            return cmd_evaluate(policy_path, paths, eval_seed, x0_text, traj_out, episodes,
                                eval_threads, out);
        if (prem->parsed())
            return cmd_premium(prem_flags, ladder, weights, delta, prem_out, diff_out, out);
        if (orc->parsed()) return cmd_oracle_check(instances, max_steps, oracle_seed, out);
    } catch (const MissingFileError& e) {
        err << "error: " << e.what() << "\n";
        return kExitMissingFile;
    } catch (const ConfigError& e) {
        err << "error: invalid configuration: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const ValidationFailure& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    out << app.help();
    return kExitUsage;
}

}  // namespace lobswitch
