#include "lcsync/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lcsync/errors.hpp"

namespace lcsync {

namespace {

json matrix_to_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

Matrix matrix_from_json(const json& j, int m, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a matrix");
  Matrix a(m, m);
  if (j.size() == static_cast<std::size_t>(m) * m && (m == 1 || !j.front().is_array())) {
    for (int k = 0; k < m * m; ++k)
      a(k / m, k % m) = number_at(j[k], path + "[" + std::to_string(k) + "]");
    return a;
  }
  if (j.size() != static_cast<std::size_t>(m)) throw ConfigError(path, "expected " + std::to_string(m) + " rows");
  for (int i = 0; i < m; ++i) {
    const json& row = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != static_cast<std::size_t>(m))
      throw ConfigError(rp, "expected a row of " + std::to_string(m) + " numbers");
    for (int c = 0; c < m; ++c) a(i, c) = number_at(row[c], rp + "[" + std::to_string(c) + "]");
  }
  return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

json schedule_to_json(const CouplingSchedule& schedule) {
  json pieces = json::array();
  for (const auto& p : schedule.pieces()) pieces.push_back(matrix_to_json(p.matrix()));
  return json{{"m", schedule.nodes()},
              {"bound", schedule.bound()},
              {"breakpoints", schedule.breakpoints()},
              {"pieces", std::move(pieces)},
              {"periodic", schedule.periodic()}};
}

CouplingSchedule schedule_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "m" && key != "bound" && key != "breakpoints" && key != "pieces" &&
        key != "periodic" && key != "type")
      throw ConfigError(path + "." + key, "unknown key");
  }
  if (!j.contains("m") || !j["m"].is_number_integer()) throw ConfigError(path + ".m", "required integer");
  const int m = j["m"].get<int>();
  if (m < 1) throw ConfigError(path + ".m", "must be >= 1");
  if (!j.contains("breakpoints") || !j["breakpoints"].is_array())
    throw ConfigError(path + ".breakpoints", "required array");
  if (!j.contains("pieces") || !j["pieces"].is_array())
    throw ConfigError(path + ".pieces", "required array");
  std::vector<double> bps;
  for (std::size_t k = 0; k < j["breakpoints"].size(); ++k)
    bps.push_back(number_at(j["breakpoints"][k], path + ".breakpoints[" + std::to_string(k) + "]"));
  std::vector<LaplacianMatrix> pieces;
  for (std::size_t k = 0; k < j["pieces"].size(); ++k) {
    const std::string pp = path + ".pieces[" + std::to_string(k) + "]";
    try {
      pieces.emplace_back(matrix_from_json(j["pieces"][k], m, pp));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(pp, e.what());
    }
  }
  std::optional<double> bound;
  if (j.contains("bound")) bound = number_at(j["bound"], path + ".bound");
  bool periodic = false;
  if (j.contains("periodic")) {
    if (!j["periodic"].is_boolean()) throw ConfigError(path + ".periodic", "expected a boolean");
    periodic = j["periodic"].get<bool>();
  }
  try {
    return CouplingSchedule(std::move(bps), std::move(pieces), bound, periodic);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

void save_schedule(const std::filesystem::path& file, const CouplingSchedule& schedule) {
  write_file_atomic(file, schedule_to_json(schedule).dump(2) + "\n");
}

CouplingSchedule load_schedule(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("schedule.path", "cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("schedule.path", std::string("malformed JSON: ") + e.what());
  }
  return schedule_from_json(j);
}

json spectrum_options_to_json(const SpectrumOptions& o) {
  return json{{"h", o.h},
              {"reorth_interval", o.reorth_interval},
              {"mu_transient", o.mu_transient},
              {"mu_t_total", o.mu_t_total},
              {"mu_samples", o.mu_samples},
              {"initial_box", {o.initial_lo, o.initial_hi}},
              {"varsigma_t_total", o.varsigma_t_total},
              {"compute_diameter", o.compute_diameter},
              {"diam_window", o.diam_window},
              {"t0_samples", o.t0_samples},
              {"compute_floquet", o.compute_floquet}};
}

json floquet_to_json(const FloquetResult& f) {
  json mult = json::array();
  for (const auto& z : f.multipliers) mult.push_back({z.real(), z.imag()});
  return json{{"period", f.period},
              {"multipliers", std::move(mult)},
              {"moduli", f.moduli},
              {"diameter_per_period", f.diameter_per_period},
              {"diameter_rate", f.diameter_rate}};
}

json spectrum_report_to_json(const SpectrumReport& r) {
  json meta{{"options", spectrum_options_to_json(r.meta.options)},
            {"seed", r.meta.seed},
            {"mu_per_sample", r.meta.mu_per_sample},
            {"mu_initial_states", r.meta.mu_initial_states},
            {"diam_per_sample", r.meta.diam_per_sample},
            {"schedule_extension", r.meta.schedule_extension},
            {"lemma7_degenerate", r.meta.lemma7_degenerate}};
  json out{{"exponents", r.exponents},
           {"mu", finite_or_null(r.mu)},
           {"varsigma", finite_or_null(r.varsigma)},
           {"lambda_p", finite_or_null(r.lambda_p)},
           {"diam_estimate", optional_number(r.diam_estimate)},
           {"H", finite_or_null(r.H)},
           {"predicted_synchronized", r.predicted_synchronized},
           {"meta", std::move(meta)}};
  out["floquet"] = r.floquet ? floquet_to_json(*r.floquet) : json(nullptr);
  return out;
}

json consensus_report_to_json(const ConsensusReport& r) {
  json window = r.counterexample_window
                    ? json::array({r.counterexample_window->first, r.counterexample_window->second})
                    : json(nullptr);
  return json{{"verdict_a", r.verdict_a},
              {"verdict_b", r.verdict_b},
              {"counterexample_window", std::move(window)},
              {"residual", finite_or_null(r.residual)},
              {"windows_checked", r.windows_checked}};
}

void write_metrics_csv(std::ostream& out, const SyncMetrics& metrics, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "t,e\n";
  char buf[64];
  for (std::size_t k = 0; k < metrics.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", metrics.times[k], metrics.e_series[k]);
    out << buf;
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "sigma,E,H,mu,varsigma,predicted,observed\n";
  for (const auto& row : sweep.rows) {
    out << format_double(row.sigma) << ',' << format_double(row.E) << ',' << format_double(row.H)
        << ',' << format_double(row.mu) << ',' << format_double(row.varsigma) << ','
        << (row.predicted ? "true" : "false") << ',' << (row.observed ? "true" : "false") << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& file, const std::string& contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace lcsync
