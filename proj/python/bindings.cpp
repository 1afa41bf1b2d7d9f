#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcsync/config.hpp"
#include "lcsync/errors.hpp"
#include "lcsync/experiments.hpp"
#include "lcsync/io.hpp"

namespace py = pybind11;
using namespace lcsync;

namespace {

VectorField rossler(double a, double b, double c) { return rossler_field(RosslerParams{a, b, c}); }

json sweep_rows(const SweepResult& sweep) {
  json rows = json::array();
  for (const auto& r : sweep.rows)
    rows.push_back({{"sigma", r.sigma},
                    {"E", std::isfinite(r.E) ? json(r.E) : json(nullptr)},
                    {"H", std::isfinite(r.H) ? json(r.H) : json(nullptr)},
                    {"mu", r.mu},
                    {"varsigma", std::isfinite(r.varsigma) ? json(r.varsigma) : json(nullptr)},
                    {"predicted", r.predicted},
                    {"observed", r.observed},
                    {"initial_spread", r.initial_spread},
                    {"diverged", r.diverged}});
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lcsync core bindings";

  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<RankCollapseError>(m, "RankCollapseError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("rossler_eval",
        [](const Vector& x, double a, double b, double c) { return rossler(a, b, c).eval(x); },
        py::arg("x"), py::arg("a") = 0.165, py::arg("b") = 0.2, py::arg("c") = 10.0);
  m.def("rossler_jacobian",
        [](const Vector& x, double a, double b, double c) { return rossler(a, b, c).jacobian(x); },
        py::arg("x"), py::arg("a") = 0.165, py::arg("b") = 0.2, py::arg("c") = 10.0);
  m.def("finite_difference_jacobian",
        [](const Vector& x, double h, double a, double b, double c) {
          return finite_difference_jacobian(rossler(a, b, c), x, h);
        },
        py::arg("x"), py::arg("h") = 1e-5, py::arg("a") = 0.165, py::arg("b") = 0.2,
        py::arg("c") = 10.0, "Central differences of the Rossler field.");

  py::class_<BlinkingParams>(m, "BlinkingParams")
      .def(py::init([](int mm, int k, double p, double tau, std::uint64_t seed) {
             return BlinkingParams{mm, k, p, tau, seed};
           }),
           py::arg("m") = 50, py::arg("k") = 3, py::arg("p") = 0.04, py::arg("tau") = 1.0,
           py::arg("seed") = 0)
      .def_readwrite("m", &BlinkingParams::m)
      .def_readwrite("k", &BlinkingParams::k)
      .def_readwrite("p", &BlinkingParams::p)
      .def_readwrite("tau", &BlinkingParams::tau)
      .def_readwrite("seed", &BlinkingParams::seed);

  py::class_<CouplingSchedule>(m, "CouplingSchedule")
      .def(py::init([](std::vector<double> breakpoints, const std::vector<Matrix>& pieces, bool periodic) {
             std::vector<LaplacianMatrix> ls;
             for (const auto& p : pieces) ls.emplace_back(p);
             return CouplingSchedule(std::move(breakpoints), std::move(ls), std::nullopt, periodic);
           }),
           py::arg("breakpoints"), py::arg("pieces"), py::arg("periodic") = false)
      .def_static("constant",
                  [](const Matrix& l, double t0, double t1) {
                    return CouplingSchedule::constant(LaplacianMatrix(l), t0, t1);
                  })
      .def_property_readonly("nodes", &CouplingSchedule::nodes)
      .def_property_readonly("horizon", &CouplingSchedule::horizon)
      .def_property_readonly("bound", &CouplingSchedule::bound)
      .def_property_readonly("periodic", &CouplingSchedule::periodic)
      .def_property_readonly("breakpoints", &CouplingSchedule::breakpoints)
      .def_property_readonly("pieces",
                             [](const CouplingSchedule& s) {
                               std::vector<Matrix> out;
                               for (const auto& p : s.pieces()) out.push_back(p.matrix());
                               return out;
                             })
      .def("at", &CouplingSchedule::at, py::arg("t"))
      .def("to_json", [](const CouplingSchedule& s) { return schedule_to_json(s).dump(); });

  m.def("laplacian_from_adjacency",
        [](const Matrix& a) { return laplacian_from_graph(WeightedDigraph(a)).matrix(); },
        "a[i, j] > 0 means node j influences node i.");
  m.def("ring_adjacency", [](int mm, int k) { return ring_graph(mm, k).weights(); });
  m.def("blinking_schedule", &blinking_schedule, py::arg("params"), py::arg("horizon"));
  m.def("integrate_coupling", &integrate_coupling);
  m.def("interval_graph",
        [](const CouplingSchedule& s, double t1, double t2, double delta) {
          return interval_graph(s, t1, t2, delta).edges;
        });
  m.def("has_spanning_tree", [](const BoolMatrix& e) {
    const auto r = has_spanning_tree(e);
    return std::make_pair(r.exists, r.root);
  });
  m.def("hajnal_diameter_matrix",
        [](const Matrix& u, int mm, int n, const std::string& norm) {
          const HajnalNorm hn = norm == "l2" ? HajnalNorm::L2 : norm == "linf" ? HajnalNorm::LInf : HajnalNorm::L1;
          if (norm != "l1" && norm != "l2" && norm != "linf") throw std::invalid_argument("norm: expected l1, l2 or linf");
          return hajnal_diameter_matrix(u, mm, n, hn);
        },
        py::arg("u"), py::arg("m"), py::arg("n") = 1, py::arg("norm") = "l1");
  m.def("scrambling_coefficient", &scrambling_coefficient);

  m.def("integrate_ode",
        [](const Vector& x0, double t0, double t1, double h) {
          const Trajectory t = integrate_ode(rossler(0.165, 0.2, 10.0), x0, t0, t1, h);
          return std::make_pair(t.times, Matrix(t.states));
        },
        py::arg("x0"), py::arg("t0"), py::arg("t1"), py::arg("h") = 0.01,
        "Rossler trajectory with the default parameters; returns (times, states).");
  m.def("integrate_network",
        [](const CouplingSchedule& s, double sigma, const Vector& x0, double t0, double t1, double h,
           const std::string& field) {
          const VectorField f = field == "zero" ? zero_field(static_cast<int>(x0.size()) / s.nodes())
                                                : rossler(0.165, 0.2, 10.0);
          const Trajectory t = integrate_network(f, s, sigma, x0, t0, t1, h);
          return std::make_pair(t.times, Matrix(t.states));
        },
        py::arg("schedule"), py::arg("sigma"), py::arg("x0"), py::arg("t0"), py::arg("t1"),
        py::arg("h") = 0.01, py::arg("field") = "rossler");
  m.def("fundamental_matrix",
        [](const CouplingSchedule& s, double sigma, double t0, double t1, double h) {
          return fundamental_matrix(s, sigma, t0, t1, h).matrix;
        },
        py::arg("schedule"), py::arg("sigma"), py::arg("t0"), py::arg("t1"), py::arg("h") = 0.01);
  m.def("variational_matrix_lcode",
        [](const CouplingSchedule& s, double sigma, const Vector& s0, double t0, double t1, double h) {
          return variational_matrix_lcode(rossler(0.165, 0.2, 10.0), s, sigma, s0, t0, t1, h).matrix;
        },
        py::arg("schedule"), py::arg("sigma"), py::arg("s0"), py::arg("t0"), py::arg("t1"),
        py::arg("h") = 0.01);

  m.def("projection_basis", [](int mm, int n) {
    const ProjectionBasis b = projection_basis(mm, n);
    return py::make_tuple(b.P, b.P1, b.P2);
  });
  m.def("transverse_exponent", &transverse_exponent, py::arg("schedule"), py::arg("sigma"),
        py::arg("t_total"), py::arg("reorth_interval") = 1.0, py::arg("h") = 0.01);
  m.def("hajnal_diameter_linear",
        [](const CouplingSchedule& s, double sigma, double window, const std::vector<double>& t0s, double h) {
          const DiameterEstimate d = hajnal_diameter_linear(s, sigma, window, t0s, h);
          return py::make_tuple(d.estimate, d.per_sample);
        },
        py::arg("schedule"), py::arg("sigma"), py::arg("window"),
        py::arg("t0_samples") = std::vector<double>{0.0}, py::arg("h") = 0.01);
  m.def("floquet_multipliers",
        [](const CouplingSchedule& s, double sigma, double h) {
          const FloquetResult f = floquet_multipliers(s, sigma, h);
          return py::make_tuple(f.multipliers, f.diameter_per_period, f.diameter_rate);
        },
        py::arg("schedule"), py::arg("sigma"), py::arg("h") = 0.01);
  m.def("sync_criterion", [](double mu, double varsigma) {
    const SyncCriterion c = sync_criterion(mu, varsigma);
    return std::make_pair(c.H, c.predicted_synchronized);
  });
  m.def("estimate_mu",
        [](std::uint64_t seed, int samples, double transient, double t_total) {
          SpectrumOptions o;
          o.mu_samples = samples;
          o.mu_transient = transient;
          o.mu_t_total = t_total;
          const MuEstimate e = estimate_mu(rossler(0.165, 0.2, 10.0), o, seed);
          return py::make_tuple(e.mu, e.per_sample);
        },
        py::arg("seed"), py::arg("samples") = 5, py::arg("transient") = 100.0,
        py::arg("t_total") = 2000.0, "Largest Rossler exponent over several initial states.");

  m.def("sync_error_series",
        [](const std::vector<double>& times, const RowMatrix& states, int mm, int n) {
          Trajectory t;
          t.times = times;
          t.states = states;
          t.nodes = mm;
          t.node_dim = n;
          return sync_error_series(t, mm, n);
        });
  m.def("sync_energy", &sync_energy, py::arg("e_series"), py::arg("times"), py::arg("T"), py::arg("R"));
  m.def("consensus_equivalence_check",
        [](const CouplingSchedule& s, double delta, double t_interval, double horizon, double h) {
          const ConsensusReport r = consensus_equivalence_check(s, delta, t_interval, horizon, h);
          return py::make_tuple(r.verdict_a, r.verdict_b, r.residual);
        },
        py::arg("schedule"), py::arg("delta"), py::arg("t_interval"), py::arg("horizon"),
        py::arg("h") = 0.01);

  m.def("_simulate_json", [](const std::string& text, std::optional<std::uint64_t> seed) {
    const SimulateConfig cfg = parse_simulate_config(parse_config_text(text), seed);
    SyncRunResult r;
    {
      py::gil_scoped_release release;
      r = run_sync_experiment(cfg.run);
    }
    json j{{"E", std::isfinite(r.metrics.E) ? json(r.metrics.E) : json(nullptr)},
           {"initial_spread", r.metrics.initial_spread},
           {"final_spread", r.metrics.final_spread},
           {"observed_synchronized", r.metrics.observed_synchronized},
           {"times", r.metrics.times},
           {"e", r.metrics.e_series}};
    if (r.spectrum) j["spectrum"] = spectrum_report_to_json(*r.spectrum);
    return j.dump();
  });
  m.def("_spectrum_json", [](const std::string& text, std::optional<std::uint64_t> seed) {
    const SyncRunConfig cfg = parse_spectrum_config(parse_config_text(text), seed);
    py::gil_scoped_release release;
    return spectrum_report_to_json(run_spectrum(cfg)).dump();
  });
  m.def("_sweep_json", [](const std::string& text, std::optional<std::uint64_t> seed, int threads) {
    SweepConfig cfg = parse_sweep_config(parse_config_text(text), seed);
    cfg.options.threads = threads;
    py::gil_scoped_release release;
    return sweep_rows(sweep_sigma(cfg.run, cfg.sigma_grid, cfg.options)).dump();
  });
}
