#include "lcsync/config.hpp"

#include <cmath>
#include <stdexcept>

#include "lcsync/errors.hpp"
#include "lcsync/random.hpp"

namespace lcsync {

// ---------------------------------------------------------------------------
// ConfigSection

ConfigSection::ConfigSection(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError(path_, "expected a JSON object");
}

std::string ConfigSection::key_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool ConfigSection::has(const std::string& key) const { return j_->contains(key); }

const json& ConfigSection::raw(const std::string& key) const {
  if (!has(key)) throw ConfigError(key_path(key), "required key missing");
  used_.insert(key);
  return (*j_)[key];
}

double ConfigSection::number(const std::string& key, std::optional<double> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(key_path(key), "required number missing");
  }
  const json& v = raw(key);
  if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key_path(key), "must be finite");
  return d;
}

long ConfigSection::integer(const std::string& key, std::optional<long> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(key_path(key), "required integer missing");
  }
  const json& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
  return v.get<long>();
}

std::uint64_t ConfigSection::unsigned64(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(key_path(key), "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool ConfigSection::boolean(const std::string& key, std::optional<bool> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(key_path(key), "required boolean missing");
  }
  const json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(key_path(key), "expected a boolean");
  return v.get<bool>();
}

std::string ConfigSection::string(const std::string& key, std::optional<std::string> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(key_path(key), "required string missing");
  }
  const json& v = raw(key);
  if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> ConfigSection::numbers(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

ConfigSection ConfigSection::child(const std::string& key) const {
  return ConfigSection(raw(key), key_path(key));
}

void ConfigSection::finish() const {
  for (const auto& [key, value] : j_->items())
    if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
}

// ---------------------------------------------------------------------------
// Schedules

namespace {

CouplingSchedule constant_schedule(const Matrix& adjacency, double horizon) {
  return CouplingSchedule::constant(laplacian_from_graph(WeightedDigraph(adjacency)), 0.0, horizon);
}

template <class Fn>
auto as_config_error(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

std::uint64_t require_seed(std::optional<std::uint64_t> seed, const std::string& path) {
  if (!seed) throw ConfigError(path, "a seed is required for stochastic runs (config 'seed' or --seed)");
  return *seed;
}

CouplingSchedule concrete_schedule(const ScheduleSpec& spec, double horizon,
                                   std::optional<std::uint64_t> seed, const std::string& path) {
  if (spec.schedule) return *spec.schedule;
  BlinkingParams params = *spec.blinking;
  params.seed = derive_seed(require_seed(seed, "seed"), "schedule");
  return as_config_error(path, [&] { return blinking_schedule(params, horizon); });
}

std::optional<std::uint64_t> read_seed(const ConfigSection& root,
                                       std::optional<std::uint64_t> seed_override) {
  std::optional<std::uint64_t> seed;
  if (root.has("seed")) seed = root.unsigned64("seed");
  if (seed_override) seed = seed_override;
  return seed;
}

}  // namespace

ScheduleSpec parse_schedule(const ConfigSection& s, double default_horizon,
                            std::optional<std::uint64_t> seed) {
  const std::string type = s.string("type");
  ScheduleSpec spec;
  const std::string path = s.key_path("type");
  if (type == "blinking") {
    BlinkingParams p;
    p.m = static_cast<int>(s.integer("m", 50));
    p.k = static_cast<int>(s.integer("k", 3));
    p.p = s.number("p", 0.04);
    p.tau = s.number("tau", 1.0);
    if (p.k < 0 || p.m <= 2 * p.k) throw ConfigError(s.key_path("m"), "need m > 2k");
    if (p.p < 0.0 || p.p > 1.0) throw ConfigError(s.key_path("p"), "must lie in [0, 1]");
    if (!(p.tau > 0.0)) throw ConfigError(s.key_path("tau"), "must be positive");
    if (seed) p.seed = derive_seed(*seed, "schedule");
    spec.blinking = p;
  } else if (type == "explicit") {
    json copy = json::object();
    for (const char* key : {"m", "bound", "breakpoints", "pieces", "periodic"})
      if (s.has(key)) copy[key] = s.raw(key);
    spec.schedule = schedule_from_json(copy, s.path());
  } else if (type == "file") {
    spec.schedule = load_schedule(s.string("path"));
  } else if (type == "complete") {
    const long m = s.integer("m");
    const double w = s.number("weight", 1.0);
    const double horizon = s.number("horizon", default_horizon);
    if (m < 1) throw ConfigError(s.key_path("m"), "must be >= 1");
    Matrix a = Matrix::Constant(m, m, w);
    a.diagonal().setZero();
    spec.schedule = as_config_error(s.key_path("weight"), [&] { return constant_schedule(a, horizon); });
  } else if (type == "ring") {
    const long m = s.integer("m");
    const long k = s.integer("k", 1);
    const double horizon = s.number("horizon", default_horizon);
    spec.schedule = as_config_error(s.key_path("m"), [&] {
      return constant_schedule(ring_graph(static_cast<int>(m), static_cast<int>(k)).weights(), horizon);
    });
  } else if (type == "split") {
    const std::vector<double> sizes = s.numbers("sizes");
    const double horizon = s.number("horizon", default_horizon);
    int m = 0;
    for (double v : sizes) {
      if (v < 1 || v != std::floor(v)) throw ConfigError(s.key_path("sizes"), "sizes must be positive integers");
      m += static_cast<int>(v);
    }
    if (m < 1) throw ConfigError(s.key_path("sizes"), "need at least one node");
    Matrix a = Matrix::Zero(m, m);
    int offset = 0;
    for (double v : sizes) {
      const int size = static_cast<int>(v);
      a.block(offset, offset, size, size).setOnes();
      offset += size;
    }
    a.diagonal().setZero();
    spec.schedule = constant_schedule(a, horizon);
  } else if (type == "star_alternation") {
    const long m = s.integer("m", 3);
    const double d = s.number("duration", 1.0);
    if (m < 2) throw ConfigError(s.key_path("m"), "must be >= 2");
    if (!(d > 0.0)) throw ConfigError(s.key_path("duration"), "must be positive");
    Matrix a0 = Matrix::Zero(m, m), a1 = Matrix::Zero(m, m);
    for (long i = 0; i < m; ++i) {
      if (i != 0) a0(i, 0) = 1.0;
      if (i != 1) a1(i, 1) = 1.0;
    }
    spec.schedule = CouplingSchedule({0.0, d, 2.0 * d},
                                     {laplacian_from_graph(WeightedDigraph(a0)),
                                      laplacian_from_graph(WeightedDigraph(a1))},
                                     std::nullopt, true);
  } else {
    throw ConfigError(path, "unknown schedule type '" + type + "'");
  }
  s.finish();
  return spec;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void parse_field(const ConfigSection& f, FieldSpec& field) {
  field.kind = f.string("kind", "rossler");
  if (field.kind == "rossler") {
    field.rossler.a = f.number("a", 0.165);
    field.rossler.b = f.number("b", 0.2);
    field.rossler.c = f.number("c", 10.0);
  } else if (field.kind == "zero") {
    field.n = static_cast<int>(f.integer("n", 1));
    if (field.n < 1) throw ConfigError(f.key_path("n"), "must be >= 1");
  } else {
    throw ConfigError(f.key_path("kind"), "unknown field kind '" + field.kind + "'");
  }
  f.finish();
}

void parse_spectrum_options(const ConfigSection& s, SpectrumOptions& o) {
  o.reorth_interval = s.number("reorth_interval", o.reorth_interval);
  o.mu_transient = s.number("mu_transient", o.mu_transient);
  o.mu_t_total = s.number("mu_t_total", o.mu_t_total);
  o.mu_samples = static_cast<int>(s.integer("mu_samples", o.mu_samples));
  o.varsigma_t_total = s.number("varsigma_t_total", o.varsigma_t_total);
  o.compute_diameter = s.boolean("compute_diameter", o.compute_diameter);
  o.diam_window = s.number("diam_window", o.diam_window);
  if (s.has("t0_samples")) o.t0_samples = s.numbers("t0_samples");
  o.compute_floquet = s.boolean("compute_floquet", o.compute_floquet);
  s.finish();
}

std::vector<double> parse_grid(const ConfigSection& root) {
  const json& g = root.raw("sigma_grid");
  if (g.is_array()) return root.numbers("sigma_grid");
  const ConfigSection s = root.child("sigma_grid");
  const double start = s.number("start"), stop = s.number("stop"), step = s.number("step");
  s.finish();
  if (!(step > 0.0)) throw ConfigError(s.key_path("step"), "must be positive");
  if (stop < start) throw ConfigError(s.key_path("stop"), "must not be below start");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  // Rounded so that 0:0.02:1 yields 0.06 rather than 0.06000000000000001.
  for (long i = 0; i <= count; ++i)
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  return grid;
}

template <class Fn>
auto validated(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    throw ConfigError(colon == std::string::npos ? "" : what.substr(0, colon),
                      colon == std::string::npos ? what : what.substr(colon + 2));
  }
}

}  // namespace

SyncRunConfig parse_sync_run(const ConfigSection& root, std::optional<std::uint64_t> seed_override,
                             bool sigma_required) {
  SyncRunConfig c;
  const auto seed = read_seed(root, seed_override);
  c.seed = require_seed(seed, "seed");
  if (root.has("field")) parse_field(root.child("field"), c.field);
  c.horizon = root.number("horizon", c.horizon);
  c.T = root.number("T", c.T);
  c.R = root.number("R", c.R);
  c.h = root.number("h", c.h);
  c.sigma = sigma_required ? root.number("sigma") : root.number("sigma", 0.0);
  if (root.has("initial_box")) {
    const auto box = root.numbers("initial_box");
    if (box.size() != 2) throw ConfigError(root.key_path("initial_box"), "expected [lo, hi]");
    c.initial_lo = box[0];
    c.initial_hi = box[1];
  }
  c.sync_threshold = root.number("sync_threshold", c.sync_threshold);
  c.compute_spectrum = root.boolean("compute_spectrum", c.compute_spectrum);
  c.spectrum.h = c.h;
  c.spectrum.initial_lo = c.initial_lo;
  c.spectrum.initial_hi = c.initial_hi;
  if (root.has("spectrum")) parse_spectrum_options(root.child("spectrum"), c.spectrum);
  c.schedule = parse_schedule(root.child("schedule"), c.horizon, c.seed);
  validated([&] {
    c.validate();
    return 0;
  });
  return c;
}

SimulateConfig parse_simulate_config(const json& j, std::optional<std::uint64_t> seed_override) {
  const ConfigSection root(j, "");
  SimulateConfig c;
  c.write_trajectory = root.boolean("write_trajectory", false);
  c.run = parse_sync_run(root, seed_override, true);
  root.finish();
  return c;
}

SyncRunConfig parse_spectrum_config(const json& j, std::optional<std::uint64_t> seed_override) {
  const ConfigSection root(j, "");
  SyncRunConfig c = parse_sync_run(root, seed_override, true);
  root.finish();
  return c;
}

SweepConfig parse_sweep_config(const json& j, std::optional<std::uint64_t> seed_override) {
  const ConfigSection root(j, "");
  SweepConfig c;
  c.sigma_grid = parse_grid(root);
  if (c.sigma_grid.empty()) throw ConfigError("sigma_grid", "must not be empty");
  for (std::size_t i = 1; i < c.sigma_grid.size(); ++i)
    if (!(c.sigma_grid[i] > c.sigma_grid[i - 1])) throw ConfigError("sigma_grid", "must be strictly increasing");
  c.options.shared_schedule = root.boolean("shared_schedule", false);
  c.options.realizations = static_cast<int>(root.integer("realizations", 1));
  if (c.options.realizations < 1) throw ConfigError("realizations", "must be >= 1");
  c.run = parse_sync_run(root, seed_override, false);
  root.finish();
  return c;
}

ConsensusConfig parse_consensus_config(const json& j, std::optional<std::uint64_t> seed_override) {
  const ConfigSection root(j, "");
  const auto seed = read_seed(root, seed_override);
  const double horizon = root.number("horizon", 100.0);
  const ConfigSection sched = root.child("schedule");
  const ScheduleSpec spec = parse_schedule(sched, horizon, seed);
  ConsensusConfig c{concrete_schedule(spec, horizon, seed, "schedule"), 0.5, 1.0, 100.0, 0.01, 1e-6, std::nullopt, std::nullopt, json()};
  c.schedule_source = root.raw("schedule");
  c.seed = seed;
  c.horizon = horizon;
  c.delta = root.number("delta");
  c.t_interval = root.number("T_interval");
  c.h = root.number("h", c.h);
  c.tolerance = root.number("tolerance", c.tolerance);
  if (root.has("x0")) {
    const auto x = root.numbers("x0");
    if (static_cast<int>(x.size()) != c.schedule.nodes())
      throw ConfigError("x0", "must have one entry per node");
    c.x0 = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  }
  if (!(c.delta > 0.0)) throw ConfigError("delta", "must be positive");
  if (!(c.t_interval > 0.0)) throw ConfigError("T_interval", "must be positive");
  if (!(c.horizon >= c.t_interval)) throw ConfigError("horizon", "must be >= T_interval");
  if (!(c.h > 0.0)) throw ConfigError("h", "must be positive");
  if (!(c.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
  root.finish();
  return c;
}

GraphCheckConfig parse_graph_check_config(const json& j, std::optional<std::uint64_t> seed_override) {
  const ConfigSection root(j, "");
  GraphCheckConfig c;
  c.seed = read_seed(root, seed_override);
  if (root.has("horizon")) c.horizon = root.number("horizon");
  if (root.has("schedule")) {
    const double horizon = c.horizon.value_or(100.0);
    const ScheduleSpec spec = parse_schedule(root.child("schedule"), horizon, c.seed);
    c.schedule = concrete_schedule(spec, horizon, c.seed, "schedule");
    c.schedule_source = root.raw("schedule");
    c.delta = root.number("delta", c.delta);
    c.t_interval = root.number("T_interval", c.t_interval);
    if (!(c.delta > 0.0)) throw ConfigError("delta", "must be positive");
    if (!(c.t_interval > 0.0)) throw ConfigError("T_interval", "must be positive");
  }
  if (root.has("matrix")) {
    const ConfigSection ms = root.child("matrix");
    c.matrix_m = static_cast<int>(ms.integer("m"));
    c.matrix_n = static_cast<int>(ms.integer("n", 1));
    const std::string norm = ms.string("norm", "l1");
    if (norm == "l1") c.norm = HajnalNorm::L1;
    else if (norm == "l2") c.norm = HajnalNorm::L2;
    else if (norm == "linf") c.norm = HajnalNorm::LInf;
    else throw ConfigError(ms.key_path("norm"), "expected l1, l2 or linf");
    const auto data = ms.numbers("data");
    const long d = static_cast<long>(c.matrix_m) * c.matrix_n;
    if (c.matrix_m < 1 || c.matrix_n < 1 || static_cast<long>(data.size()) != d * d)
      throw ConfigError(ms.key_path("data"), "expected (m*n)^2 row-major entries");
    c.matrix = Eigen::Map<const RowMatrix>(data.data(), d, d);
    ms.finish();
  }
  if (!c.schedule && !c.matrix) throw ConfigError("schedule", "need a schedule or a matrix to check");
  root.finish();
  return c;
}

json resolved_json(const SyncRunConfig& c) {
  json field{{"kind", c.field.kind}};
  if (c.field.kind == "rossler") {
    field["a"] = c.field.rossler.a;
    field["b"] = c.field.rossler.b;
    field["c"] = c.field.rossler.c;
  } else {
    field["n"] = c.field.n;
  }
  json schedule;
  if (c.schedule.blinking) {
    const auto& b = *c.schedule.blinking;
    schedule = {{"type", "blinking"}, {"m", b.m}, {"k", b.k}, {"p", b.p}, {"tau", b.tau}};
  } else {
    schedule = schedule_to_json(*c.schedule.schedule);
    schedule["type"] = "explicit";
  }
  json spectrum = spectrum_options_to_json(c.spectrum);
  // Mirrors of the top-level h and initial_box.
  spectrum.erase("h");
  spectrum.erase("initial_box");
  return json{{"seed", c.seed},
              {"field", std::move(field)},
              {"schedule", std::move(schedule)},
              {"sigma", c.sigma},
              {"initial_box", {c.initial_lo, c.initial_hi}},
              {"horizon", c.horizon},
              {"T", c.T},
              {"R", c.R},
              {"h", c.h},
              {"sync_threshold", c.sync_threshold},
              {"compute_spectrum", c.compute_spectrum},
              {"spectrum", std::move(spectrum)}};
}

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace lcsync
