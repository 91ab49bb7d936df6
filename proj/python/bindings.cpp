#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lobswitch/accounting.hpp"
#include "lobswitch/cli.hpp"
#include "lobswitch/config.hpp"
#include "lobswitch/evaluator.hpp"
#include "lobswitch/policy_io.hpp"

namespace py = pybind11;
using namespace lobswitch;

namespace {

RunConfig config_from(const py::object& obj) {
    if (py::isinstance<RunConfig>(obj)) return obj.cast<RunConfig>();
    RunConfig c;
    if (py::isinstance<py::dict>(obj)) {
        for (auto item : obj.cast<py::dict>())
            c.set(py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
    } else if (!obj.is_none()) {
        c.apply_text(obj.cast<std::string>(), "<python>");
    }
    c.validate();
    return c;
}

GridNode node_from(const std::tuple<int, int, int, int, int>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t), std::get<4>(t)};
}

py::tuple node_tuple(const GridNode& n) { return py::make_tuple(n.qa, n.qb, n.inv, n.pa, n.pb); }

EpochKind epoch_from(const std::string& s) {
    if (s == "interior") return EpochKind::Interior;
    if (s == "ask-arrival") return EpochKind::AskArrival;
    if (s == "bid-arrival") return EpochKind::BidArrival;
    if (s == "terminal") return EpochKind::Terminal;
    if (s == "done") return EpochKind::Done;
    throw py::value_error("unknown epoch '" + s + "'");
}

py::dict solution_dict(const NodeSolution& s) {
    py::dict d;
    d["v0"] = s.v0;
    d["va"] = s.va;
    d["vb"] = s.vb;
    d["wait"] = s.wait;
    d["u0"] = py::make_tuple(s.u0.ua, s.u0.ub);
    d["u_ask"] = py::make_tuple(s.u_ask.ua, s.u_ask.ub);
    d["u_bid"] = py::make_tuple(s.u_bid.ua, s.u_bid.ub);
    d["h"] = py::make_tuple(s.h.ha, s.h.hb);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Limit order book switching control: model, solver and evaluator";
    m.attr("__version__") = version_string();

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MissingFileError>(m, "MissingFileError", PyExc_FileNotFoundError);

    py::class_<RunConfig>(m, "Config")
        .def(py::init([](const py::object& spec) { return config_from(spec); }), py::arg("spec") = py::none(),
             "Build from key = value text, a dict of settings, or defaults")
        .def_static("from_file",
                    [](const std::string& path) {
                        RunConfig c;
                        c.apply_file(path);
                        c.validate();
                        return c;
                    })
        .def("set", &RunConfig::set)
        .def("canonical", &RunConfig::canonical)
        .def("hash", [](const RunConfig& c) { return hex64(c.hash()); })
        .def_property_readonly("x0", [](const RunConfig& c) {
            return py::make_tuple(c.x0.qa, c.x0.qb, c.inv0, c.x0.pa, c.x0.pb);
        })
        .def("__repr__", [](const RunConfig& c) { return "<Config " + hex64(c.hash()) + ">"; });

    m.def("simulate_book",
          [](const py::object& spec, double t_end, double dt, std::uint64_t seed) {
              RunConfig c;
              if (py::isinstance<RunConfig>(spec)) c = spec.cast<RunConfig>();
              else if (!spec.is_none()) c.apply_text(spec.cast<std::string>());
              const auto rows = simulate_book(c.problem.params, c.x0, t_end, dt, seed);
              py::dict cols;
              std::vector<double> t, qa, qb;
              std::vector<int> pa, pb;
              std::vector<long> la, lb, na, nb;
              for (const auto& r : rows) {
                  t.push_back(r.t);
                  qa.push_back(r.qa);
                  qb.push_back(r.qb);
                  pa.push_back(r.pa);
                  pb.push_back(r.pb);
                  la.push_back(r.la);
                  lb.push_back(r.lb);
                  na.push_back(r.na);
                  nb.push_back(r.nb);
              }
              cols["t"] = t;
              cols["qa"] = qa;
              cols["qb"] = qb;
              cols["pa"] = pa;
              cols["pb"] = pb;
              cols["La"] = la;
              cols["Lb"] = lb;
              cols["Na"] = na;
              cols["Nb"] = nb;
              return cols;
          },
          py::arg("config") = py::none(), py::arg("t_end") = 600.0, py::arg("dt") = 1.0,
          py::arg("seed") = 1, "Uncontrolled book path as a dict of columns");

    m.def("grid_size", [](const RunConfig& c) { return count_admissible(c.problem.grid); });

    m.def("cash_flow",
          [](const std::string& side, const std::string& epoch, bool arrival, double q, int p, double u,
             double delta, double epsilon) {
              return cash_flow(side == "bid" ? Side::Bid : Side::Ask, epoch_from(epoch), arrival, q, p, u,
                               delta, epsilon);
          },
          py::arg("side"), py::arg("epoch"), py::arg("arrival"), py::arg("q"), py::arg("p"), py::arg("u"),
          py::arg("delta"), py::arg("epsilon") = 0.0);

    m.def("shares_traded",
          [](const std::string& epoch, bool arrival, double q, double u, double delta) {
              return shares_traded(Side::Ask, epoch_from(epoch), arrival, q, u, delta);
          },
          py::arg("epoch"), py::arg("arrival"), py::arg("q"), py::arg("u"), py::arg("delta"));

    m.def("admissible_controls",
          [](const std::string& epoch, int pa, int pb, const std::string& trader, int pa_bar, int pb_under,
             double arrival_volume) {
              std::vector<std::pair<double, double>> out;
              for (const auto& u : admissible_controls(epoch_from(epoch), pa, pb, parse_trader_kind(trader),
                                                       {pa_bar, pb_under}, {}, arrival_volume))
                  out.emplace_back(u.ua, u.ub);
              return out;
          },
          py::arg("epoch"), py::arg("pa"), py::arg("pb"), py::arg("trader") = "internalizing",
          py::arg("pa_bar") = 18, py::arg("pb_under") = 12, py::arg("arrival_volume") = -1.0);

    m.def("terminal_reward",
          [](const RunConfig& c, double inventory, double cash, int pa, int pb) {
              return terminal_reward(c.problem.reward, inventory, cash, pa, pb);
          });

    py::class_<Policy>(m, "Policy")
        .def_property_readonly("config", [](const Policy& p) { return p.config; })
        .def_property_readonly("steps", [](const Policy& p) { return p.table.steps(); })
        .def_property_readonly("size", [](const Policy& p) { return p.table.grid().size(); })
        .def("node", [](const Policy& p, std::size_t i) { return node_tuple(p.table.grid().node(i)); })
        .def("index", [](const Policy& p, const std::tuple<int, int, int, int, int>& n) {
            return p.table.grid().index(node_from(n));
        })
        .def("value", [](const Policy& p, int k, const std::tuple<int, int, int, int, int>& n) {
            return p.table.at(k, p.table.grid().index(node_from(n))).v0;
        })
        .def("solution", [](const Policy& p, int k, std::size_t i) { return solution_dict(p.table.at(k, i)); })
        .def("v0_layer", [](const Policy& p, int k) {
            std::vector<double> out;
            for (const auto& s : p.table.layer(k)) out.push_back(s.v0);
            return out;
        })
        .def("save",
             [](const Policy& p, const std::string& path) {
                 const bool bin = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
                 std::ofstream out(path, bin ? std::ios::binary : std::ios::out);
                 if (!out) throw std::runtime_error("cannot write '" + path + "'");
                 if (bin)
                     write_policy_binary(out, p);
                 else
                     write_policy_csv(out, p);
             })
        .def_static("load", &read_policy_file);

    m.def("solve",
          [](const RunConfig& c, unsigned threads) {
              py::gil_scoped_release release;
              return extract_policy(solve(c.problem, threads ? threads : default_threads()), c);
          },
          py::arg("config"), py::arg("threads") = 0, "Backward induction; returns the solved policy");

    m.def("evaluate",
          [](const Policy& p, std::size_t paths, std::uint64_t seed, unsigned threads) {
              PolicyStats s;
              {
                  py::gil_scoped_release release;
                  s = run_policy(p.config.problem, p.table.grid(), TableRule(p), p.config.x0, p.config.inv0,
                                 seed, paths, threads ? threads : default_threads());
              }
              const auto x0 = p.table.grid().snap(p.config.x0, p.config.inv0);
              py::dict d;
              d["mean"] = s.mean;
              d["std_error"] = s.std_error;
              d["paths"] = s.paths;
              d["v0_x0"] = p.table.at(0, x0.index).v0;
              d["inventory_clamps"] = s.inventory_clamps;
              return d;
          },
          py::arg("policy"), py::arg("paths") = 10000, py::arg("seed") = 1, py::arg("threads") = 0,
          "Forward simulation of the policy from the configured start");

    m.def("relative_advantage",
          [](const Policy& regular, const Policy& internalizing) {
              const auto r = diff_report(regular.table.layer(0), internalizing.table.layer(0));
              py::dict d;
              d["weighted_average"] = r.weighted_average;
              d["share_in_band"] = r.share_in_band;
              d["excluded"] = r.excluded;
              d["negative"] = r.negative;
              d["diff"] = r.diff;
              return d;
          });

    m.def("fair_premium",
          [](const std::vector<std::pair<double, double>>& curve, double delta) -> py::object {
              const auto r = fair_premium(curve, delta);
              if (!r.epsilon_star) return py::none();
              return py::float_(*r.epsilon_star);
          });

    m.def("oracle_check",
          [](std::uint64_t seed, int steps) {
              const auto c = compare_with_oracle(random_tiny_problem(seed, steps));
              py::dict d;
              d["values_checked"] = c.values_checked;
              d["max_abs_diff"] = c.max_abs_diff;
              return d;
          },
          py::arg("seed"), py::arg("steps") = 2, "Solver versus exhaustive enumeration on a random tiny instance");

    m.def("main",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "lobswitch");
              std::ostringstream out, err;
              const int code = dispatch(args, out, err);
              py::print(out.str(), py::arg("end") = "");
              if (!err.str().empty())
                  py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
              return code;
          },
          "Run the command-line tool in-process");
}
