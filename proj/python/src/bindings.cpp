#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irsbf/experiment.hpp"
#include "irsbf/optimizer.hpp"
#include "irsbf/scenario.hpp"
#include "irsbf/selection.hpp"
#include "irsbf/system.hpp"

namespace py = pybind11;
using namespace irsbf;

namespace {

std::vector<std::pair<double, double>> points_out(const std::vector<Point2>& pts) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) out.emplace_back(p.x, p.y);
  return out;
}

std::vector<Point2> points_in(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Point2> out;
  for (const auto& [x, y] : pts) out.push_back({x, y});
  return out;
}

BeamformingState make_state(const Eigen::MatrixXcd& P, const std::vector<Eigen::VectorXcd>& theta,
                            const std::vector<int>& assignment, int K) {
  BeamformingState s;
  s.P = P;
  s.theta = theta;
  s.A = selection_from_assignment(assignment, K);
  return s;
}

py::dict result_dict(const OptimResult& r) {
  py::dict d;
  d["status"] = to_string(r.status);
  d["iterations"] = r.iterations;
  d["sum_rate_relaxed"] = r.sum_rate_relaxed;
  d["sum_rate_projected"] = r.sum_rate_projected;
  d["initial_sum_rate"] = r.initial_sum_rate;
  d["per_user_rates"] = r.per_user_rates;
  d["per_user_rates_projected"] = r.per_user_rates_projected;
  d["solver_failures"] = r.solver_failures;
  std::vector<double> trace;
  for (const auto& t : r.trace) trace.push_back(t.sum_rate);
  d["trace"] = trace;
  d["P"] = r.final_state.P;
  d["theta"] = r.final_state.theta;
  d["assignment"] = r.final_state.A.size() ? assignment_from_selection(r.final_state.A) : Assignment{};
  return d;
}

py::dict row_dict(const DropRow& r) {
  py::dict d;
  d["method"] = to_string(r.method);
  d["drop"] = r.drop;
  d["axis"] = to_string(r.axis);
  d["axis_value"] = r.axis_value;
  d["iterations"] = r.iterations;
  d["status"] = to_string(r.status);
  d["sum_rate_relaxed"] = r.sum_rate_relaxed;
  d["sum_rate_projected"] = r.sum_rate_projected;
  d["min_user_rate"] = r.min_user_rate;
  d["seed"] = r.seed;
  d["max_power_ratio"] = r.max_power_ratio;
  d["min_sinr_ratio"] = r.min_sinr_ratio;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-IRS joint beamforming and selection";

  py::class_<ScenarioConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("M", &ScenarioConfig::M)
      .def_readwrite("N", &ScenarioConfig::N)
      .def_readwrite("K", &ScenarioConfig::K)
      .def_readwrite("L_v", &ScenarioConfig::L_v)
      .def_readwrite("L_h", &ScenarioConfig::L_h)
      .def_readwrite("P_max_dbm", &ScenarioConfig::P_max_dbm)
      .def_readwrite("sinr_min_db", &ScenarioConfig::sinr_min_db)
      .def_readwrite("noise_dbm", &ScenarioConfig::noise_dbm)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("include_direct_link", &ScenarioConfig::include_direct_link)
      .def_property(
          "irs_positions", [](const ScenarioConfig& c) { return points_out(c.irs_positions); },
          [](ScenarioConfig& c, const std::vector<std::pair<double, double>>& p) { c.irs_positions = points_in(p); })
      .def_property_readonly("L", &ScenarioConfig::L)
      .def("validate", [](const ScenarioConfig& c) { validate(c); })
      .def("to_json", &dump_config)
      .def_static("from_json", &load_config)
      .def("with_irs_count", &with_irs_count)
      .def("with_element_count", &with_element_count)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
      .def("__repr__", [](const ScenarioConfig& c) {
        return "Config(M=" + std::to_string(c.M) + ", N=" + std::to_string(c.N) + ", K=" + std::to_string(c.K) +
               ", L=" + std::to_string(c.L()) + ")";
      });

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("reference_config", &reference_config);
  m.def("preset_config", &preset_config, py::arg("name"));

  py::class_<OptimOptions>(m, "OptimOptions")
      .def(py::init<>())
      .def_readwrite("max_iter", &OptimOptions::max_iter)
      .def_readwrite("tol", &OptimOptions::tol)
      .def_readwrite("selection_keeps_sinr", &OptimOptions::selection_keeps_sinr);

  py::class_<Drop>(m, "Drop")
      .def_readonly("seed", &Drop::seed)
      .def_property_readonly("user_positions",
                             [](const Drop& d) { return points_out(d.layout.user_positions); })
      .def_property_readonly("h_direct", [](const Drop& d) { return d.channels.h_direct; })
      .def_property_readonly("H_bs_irs", [](const Drop& d) { return d.channels.H_bs_irs; })
      .def_property_readonly("h_irs_user", [](const Drop& d) { return d.channels.h_irs_user; });

  m.def("make_drop", &make_drop, py::arg("config"), py::arg("seed"));

  m.def(
      "sinrs",
      [](const Drop& d, const Eigen::MatrixXcd& P, const std::vector<Eigen::VectorXcd>& theta,
         const std::vector<int>& assignment, double noise, bool include_direct) {
        const auto s = make_state(P, theta, assignment, d.channels.K());
        check_shapes(s, d.channels);
        return Eigen::VectorXd(irsbf::sinrs(s, d.channels, {noise, include_direct}));
      },
      py::arg("drop"), py::arg("P"), py::arg("theta"), py::arg("assignment"), py::arg("noise"),
      py::arg("include_direct") = false, "Per-user SINR; noise is linear in mW.");

  m.def(
      "sum_rate",
      [](const Drop& d, const Eigen::MatrixXcd& P, const std::vector<Eigen::VectorXcd>& theta,
         const std::vector<int>& assignment, double noise, bool include_direct) {
        const auto s = make_state(P, theta, assignment, d.channels.K());
        check_shapes(s, d.channels);
        return irsbf::sum_rate(s, d.channels, {noise, include_direct});
      },
      py::arg("drop"), py::arg("P"), py::arg("theta"), py::arg("assignment"), py::arg("noise"),
      py::arg("include_direct") = false, "Sum rate in bps/Hz.");

  m.def(
      "select_assignment",
      [](const Drop& d, const Eigen::MatrixXcd& P, const std::vector<Eigen::VectorXcd>& theta, double noise,
         bool include_direct) {
        const auto s = make_state(P, theta, std::vector<int>(theta.size(), 0), d.channels.K());
        const auto r = enumerate_best_assignment(s, d.channels, {noise, include_direct});
        return py::make_tuple(r.assignment, r.sum_rate);
      },
      py::arg("drop"), py::arg("P"), py::arg("theta"), py::arg("noise"), py::arg("include_direct") = false,
      "Exhaustive search over IRS-to-user assignments.");

  m.def(
      "run_method",
      [](const std::string& method, const ScenarioConfig& config, const Drop& d, const OptimOptions& opts) {
        const Method mt = parse_method(method);
        OptimResult r;
        {
          py::gil_scoped_release release;
          r = irsbf::run_method(mt, config, d.layout, d.channels, d.seed, opts);
        }
        return result_dict(r);
      },
      py::arg("method"), py::arg("config"), py::arg("drop"), py::arg("options") = OptimOptions{});

  m.def(
      "run_drops",
      [](const ScenarioConfig& config, const std::vector<std::string>& methods, int drops, std::uint64_t seed,
         const OptimOptions& opts, int workers) {
        std::vector<Method> ms;
        for (const auto& s : methods) ms.push_back(parse_method(s));
        std::vector<DropRow> rows;
        {
          py::gil_scoped_release release;
          rows = irsbf::run_drops(config, ms, drops, seed, opts, workers);
        }
        py::list out;
        for (const auto& r : rows) out.append(row_dict(r));
        return out;
      },
      py::arg("config"), py::arg("methods"), py::arg("drops"), py::arg("seed") = 1,
      py::arg("options") = OptimOptions{}, py::arg("workers") = 1);

  m.def(
      "summarize",
      [](const ScenarioConfig& config, const std::vector<std::string>& methods, int drops, std::uint64_t seed,
         const OptimOptions& opts, int workers) {
        std::vector<Method> ms;
        for (const auto& s : methods) ms.push_back(parse_method(s));
        std::vector<SummaryRow> sum;
        {
          py::gil_scoped_release release;
          sum = irsbf::summarize(irsbf::run_drops(config, ms, drops, seed, opts, workers));
        }
        py::list out;
        for (const auto& s : sum) {
          py::dict d;
          d["method"] = to_string(s.method);
          d["drops"] = s.drops;
          d["feasible"] = s.feasible;
          d["mean"] = s.mean;
          d["std"] = s.std;
          d["ci95"] = s.ci95;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("methods"), py::arg("drops"), py::arg("seed") = 1,
      py::arg("options") = OptimOptions{}, py::arg("workers") = 1,
      "Run drops and return per-method mean, spread and 95% interval of the projected sum rate.");
}
