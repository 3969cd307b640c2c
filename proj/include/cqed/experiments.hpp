#pragma once

// Experiment drivers behind the command-line tool: single runs, the
// basis-state truth table and noise-rate sweeps, plus their config and
// output formats (JSON config / run record, CSV sweep table).

#include "cqed/dynamics.hpp"
#include "cqed/entanglement.hpp"

#include "json.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <numbers>
#include <optional>
#include <ostream>
#include <thread>

namespace cqed {

inline constexpr std::string_view kEngineVersion = "1.0.0";
inline constexpr std::string_view kLeakageConvention = "project-and-renormalize";
inline constexpr std::string_view kCsvHeader = "gamma_over_g,noise_kind,concurrence,eof,leakage,trace_error";

/// Config problem tied to a dotted field path such as "model.g".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridSpec {
  double min = 1e-3;
  double max = 1.0;
  std::size_t points = 25;

  /// Log-spaced values with exact endpoints.
  std::vector<double> values() const {
    std::vector<double> v(points);
    const double lo = std::log(min);
    const double hi = std::log(max);
    for (std::size_t i = 0; i < points; ++i) {
      v[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    v.front() = min;
    v.back() = max;
    return v;
  }
};

struct SweepSpec {
  std::vector<NoiseKind> kinds{NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss};
  GridSpec grid;
};

struct RunConfig {
  ModelParams model;
  NoiseConfig noise;
  IntegratorConfig integrator;
  PhysicalCalibration calibration;
  std::optional<SweepSpec> sweep;
  std::string output_path;

  void validate() const {
    auto wrap = [](const char* section, auto&& fn) {
      try {
        fn();
      } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        // Messages from the engine already lead with the dotted field path.
        const auto space = msg.find(' ');
        throw ConfigError(space == std::string::npos ? section : msg.substr(0, space), msg);
      }
    };
    wrap("model", [&] { model.validate(); });
    wrap("noise", [&] { noise.validate(); });
    wrap("integrator", [&] { integrator.validate(); });
    wrap("calibration", [&] { calibration.validate(); });
    if (sweep) {
      if (!(sweep->grid.min > 0.0)) throw ConfigError("sweep.gamma_over_g.min", "must be > 0");
      if (!(sweep->grid.max >= sweep->grid.min)) throw ConfigError("sweep.gamma_over_g.max", "must be >= min");
      if (sweep->grid.points < 2) throw ConfigError("sweep.gamma_over_g.points", "must be >= 2");
      if (sweep->kinds.empty()) throw ConfigError("sweep.kinds", "must list at least one noise kind");
    }
  }
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

inline double read_number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback) {
  const std::string field = path + "." + key;
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(field, "missing required field");
    return *fallback;
  }
  if (!obj[key].is_number()) throw ConfigError(field, "expected a number");
  return obj[key].get<double>();
}

inline std::size_t read_count(const json& obj, const std::string& path, const char* key, std::size_t fallback) {
  const std::string field = path + "." + key;
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer() || obj[key].get<long long>() < 0) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  return obj[key].get<std::size_t>();
}

inline NoiseKind read_kind(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a noise kind string");
  const auto k = noise_kind_from_string(j.get<std::string>());
  if (!k) throw ConfigError(field, "unknown noise kind '" + j.get<std::string>() + "'");
  return *k;
}

}  // namespace detail

/// Builds a RunConfig from a JSON document. Absent sections take defaults;
/// a present "model" section must state g explicitly since it fixes the unit.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::json;
  RunConfig cfg;
  detail::require_object(doc, "<root>");
  detail::reject_unknown(doc, "", {"model", "noise", "integrator", "calibration", "sweep", "output_path"});

  if (doc.contains("model")) {
    const json& m = detail::require_object(doc["model"], "model");
    detail::reject_unknown(m, "model", {"g", "delta_omega", "n_max", "dot_count"});
    cfg.model.g = detail::read_number(m, "model", "g", std::nullopt);
    cfg.model.n_max = detail::read_count(m, "model", "n_max", cfg.model.n_max);
    cfg.model.dot_count = detail::read_count(m, "model", "dot_count", cfg.model.dot_count);
    if (m.contains("delta_omega")) {
      const json& d = m["delta_omega"];
      if (d.is_number()) {
        // Scalar shorthand: offset of dot A, dot B at zero.
        cfg.model.delta_omega = {d.get<double>(), 0.0};
      } else if (d.is_array()) {
        cfg.model.delta_omega.clear();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (!d[i].is_number()) throw ConfigError("model.delta_omega[" + std::to_string(i) + "]", "expected a number");
          cfg.model.delta_omega.push_back(d[i].get<double>());
        }
      } else {
        throw ConfigError("model.delta_omega", "expected a number or an array of numbers");
      }
    }
  }
  if (doc.contains("noise")) {
    const json& n = detail::require_object(doc["noise"], "noise");
    detail::reject_unknown(n, "noise", {"kind", "gamma"});
    if (n.contains("kind")) cfg.noise.kind = detail::read_kind(n["kind"], "noise.kind");
    cfg.noise.gamma = detail::read_number(n, "noise", "gamma", cfg.noise.gamma);
  }
  if (doc.contains("integrator")) {
    const json& i = detail::require_object(doc["integrator"], "integrator");
    detail::reject_unknown(i, "integrator", {"dt", "positivity_tolerance", "trace_tolerance"});
    cfg.integrator.dt = detail::read_number(i, "integrator", "dt", cfg.integrator.dt);
    cfg.integrator.positivity_tolerance =
        detail::read_number(i, "integrator", "positivity_tolerance", cfg.integrator.positivity_tolerance);
    cfg.integrator.trace_tolerance =
        detail::read_number(i, "integrator", "trace_tolerance", cfg.integrator.trace_tolerance);
  }
  if (doc.contains("calibration")) {
    const json& c = detail::require_object(doc["calibration"], "calibration");
    detail::reject_unknown(c, "calibration", {"g_physical", "q_factor", "vacuum_field"});
    cfg.calibration.g_physical = detail::read_number(c, "calibration", "g_physical", cfg.calibration.g_physical);
    cfg.calibration.q_factor = detail::read_number(c, "calibration", "q_factor", cfg.calibration.q_factor);
    cfg.calibration.vacuum_field = detail::read_number(c, "calibration", "vacuum_field", cfg.calibration.vacuum_field);
  }
  if (doc.contains("sweep") && !doc["sweep"].is_null()) {
    const json& s = detail::require_object(doc["sweep"], "sweep");
    detail::reject_unknown(s, "sweep", {"kinds", "gamma_over_g"});
    SweepSpec sweep;
    if (s.contains("kinds")) {
      if (!s["kinds"].is_array()) throw ConfigError("sweep.kinds", "expected an array");
      sweep.kinds.clear();
      for (std::size_t i = 0; i < s["kinds"].size(); ++i) {
        const auto k = detail::read_kind(s["kinds"][i], "sweep.kinds[" + std::to_string(i) + "]");
        if (k == NoiseKind::None) throw ConfigError("sweep.kinds[" + std::to_string(i) + "]", "cannot sweep 'none'");
        sweep.kinds.push_back(k);
      }
    }
    if (s.contains("gamma_over_g")) {
      const json& g = detail::require_object(s["gamma_over_g"], "sweep.gamma_over_g");
      detail::reject_unknown(g, "sweep.gamma_over_g", {"min", "max", "points"});
      sweep.grid.min = detail::read_number(g, "sweep.gamma_over_g", "min", sweep.grid.min);
      sweep.grid.max = detail::read_number(g, "sweep.gamma_over_g", "max", sweep.grid.max);
      sweep.grid.points = detail::read_count(g, "sweep.gamma_over_g", "points", sweep.grid.points);
    }
    cfg.sweep = sweep;
  }
  if (doc.contains("output_path")) {
    if (!doc["output_path"].is_string()) throw ConfigError("output_path", "expected a string");
    cfg.output_path = doc["output_path"].get<std::string>();
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["model"] = {{"g", cfg.model.g},
                {"delta_omega", cfg.model.delta_omega},
                {"n_max", cfg.model.n_max},
                {"dot_count", cfg.model.dot_count}};
  j["noise"] = {{"kind", to_string(cfg.noise.kind)}, {"gamma", cfg.noise.gamma}};
  j["integrator"] = {{"dt", cfg.integrator.dt},
                     {"positivity_tolerance", cfg.integrator.positivity_tolerance},
                     {"trace_tolerance", cfg.integrator.trace_tolerance}};
  j["calibration"] = {{"g_physical", cfg.calibration.g_physical},
                      {"q_factor", cfg.calibration.q_factor},
                      {"vacuum_field", cfg.calibration.vacuum_field}};
  if (cfg.sweep) {
    nlohmann::json kinds = nlohmann::json::array();
    for (auto k : cfg.sweep->kinds) kinds.push_back(to_string(k));
    j["sweep"] = {{"kinds", kinds},
                  {"gamma_over_g",
                   {{"min", cfg.sweep->grid.min}, {"max", cfg.sweep->grid.max}, {"points", cfg.sweep->grid.points}}}};
  } else {
    j["sweep"] = nullptr;
  }
  j["output_path"] = cfg.output_path;
  return j;
}

inline nlohmann::json to_json(const Schedule& s) {
  auto pulses = [](const std::vector<PulseSpec>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : list) out.push_back({{"target_dot", p.target_dot}, {"angle", p.angle}, {"transition", "1<->2"}});
    return out;
  };
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : s.segments) segs.push_back({{"delta", seg.delta}, {"duration", seg.duration}});
  return {{"pre_pulses", pulses(s.pre_pulses)},
          {"segments", segs},
          {"post_pulses", pulses(s.post_pulses)},
          {"total_duration", s.total_duration()}};
}

inline nlohmann::json to_json(const Diagnostics& d) {
  return {{"max_trace_drift", d.max_trace_drift},
          {"min_eigenvalue", d.min_eigenvalue},
          {"max_top_fock_population", d.max_top_fock_population},
          {"steps_taken", d.steps_taken},
          {"failed", d.failed},
          {"failure", d.failure}};
}

// ---------------------------------------------------------------------------
// Single run

struct RunOutcome {
  EntanglementReport report;
  Diagnostics diagnostics;
};

inline RunOutcome run_once(const RunConfig& cfg) {
  cfg.validate();
  const auto evolved = run_protocol(cfg.model, cfg.noise, cfg.integrator);
  return {analyze(evolved.final_state), evolved.diagnostics};
}

// ---------------------------------------------------------------------------
// Truth table

struct TruthTableRow {
  std::size_t bit_a = 0;
  std::size_t bit_b = 0;
  int expected_sign = 1;
  double fidelity = 0.0;        // |<expected|actual>|^2
  double relative_phase = 0.0;  // overlap phase relative to row (0,0), local phases factored out
  bool passed = false;
};

struct TruthTableReport {
  std::array<TruthTableRow, 4> rows;
  std::vector<double> local_phases;  // per dot, on |1>
  double phase_error = 0.0;          // |row(1,1) relative phase - π|
  bool passed = false;
};

inline constexpr double kTruthTableRowThreshold = 0.99;
inline constexpr double kTruthTablePhaseTolerance = 1e-2;

inline double wrap_phase(double x) {
  x = std::remainder(x, 2.0 * std::numbers::pi);
  return x <= -std::numbers::pi ? x + 2.0 * std::numbers::pi : x;
}

/// Runs the noiseless protocol on the four computational inputs and compares
/// with the ideal map (+1, +1, +1, -1) modulo a global phase.
inline TruthTableReport truth_table(const ModelParams& params, double row_threshold = kTruthTableRowThreshold,
                                    double phase_tolerance = kTruthTablePhaseTolerance) {
  const Schedule schedule = canonical_entangling_schedule(params);
  const SpaceDescriptor space = params.space();
  TruthTableReport report;
  report.local_phases = local_detuning_phases(schedule, params);

  std::array<double, 4> phase{};
  for (std::size_t r = 0; r < 4; ++r) {
    const std::size_t a = r / 2;
    const std::size_t b = r % 2;
    const auto out = evolve_unitary(basis_input(a, b, space), schedule, params).final_state;
    const double local = static_cast<double>(a) * report.local_phases[0] + static_cast<double>(b) * report.local_phases[1];
    const Complex overlap = out.amplitude({a, b, 0}) * std::exp(-kI * local);
    auto& row = report.rows[r];
    row.bit_a = a;
    row.bit_b = b;
    row.expected_sign = (a == 1 && b == 1) ? -1 : 1;
    row.fidelity = std::norm(overlap);
    row.passed = row.fidelity >= row_threshold;
    phase[r] = std::arg(overlap);
  }
  for (std::size_t r = 0; r < 4; ++r) report.rows[r].relative_phase = wrap_phase(phase[r] - phase[0]);
  report.phase_error = std::abs(wrap_phase(report.rows[3].relative_phase - std::numbers::pi));
  report.passed = report.phase_error <= phase_tolerance;
  for (const auto& row : report.rows) report.passed = report.passed && row.passed;
  return report;
}

inline nlohmann::json to_json(const TruthTableReport& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"input", std::to_string(r.bit_a) + std::to_string(r.bit_b)},
                    {"expected_sign", r.expected_sign},
                    {"fidelity", r.fidelity},
                    {"relative_phase", r.relative_phase},
                    {"passed", r.passed}});
  }
  return {{"rows", rows}, {"local_phases", t.local_phases}, {"phase_error_11", t.phase_error}, {"passed", t.passed}};
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepPoint {
  double gamma_over_g = 0.0;
  NoiseKind kind = NoiseKind::None;
  EntanglementReport report;
  Diagnostics diagnostics;
  bool failed = false;
  std::string failure;
};

/// Runs every (kind, Γ/g) point on `workers` threads. Output is kind-major,
/// ascending Γ/g, independent of completion order. A point that throws or
/// breaches a diagnostic is marked failed; the sweep continues.
inline std::vector<SweepPoint> run_sweep(const RunConfig& cfg, std::size_t workers = 1) {
  cfg.validate();
  if (!cfg.sweep) throw ConfigError("sweep", "missing sweep section");
  const auto grid = cfg.sweep->grid.values();

  std::vector<SweepPoint> points;
  for (auto kind : cfg.sweep->kinds) {
    for (double g : grid) {
      SweepPoint p;
      p.kind = kind;
      p.gamma_over_g = g;
      points.push_back(p);
    }
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      SweepPoint& p = points[i];
      try {
        const NoiseConfig noise{p.kind, p.gamma_over_g};
        const auto evolved = run_protocol(cfg.model, noise, cfg.integrator);
        p.diagnostics = evolved.diagnostics;
        p.report = analyze(evolved.final_state);
        p.failed = evolved.diagnostics.failed;
        p.failure = evolved.diagnostics.failure;
      } catch (const std::exception& e) {
        p.failed = true;
        p.failure = e.what();
        p.report = {std::nan(""), std::nan(""), std::nan("")};
      }
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, points.size());
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return points;
}

/// Locale-independent scientific notation with a lowercase exponent.
inline std::string format_sci(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific, 12);
  return {buf.data(), res.ptr};
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << kCsvHeader << '\n';
  for (const auto& p : points) {
    os << format_sci(p.gamma_over_g) << ',' << to_string(p.kind) << ',' << format_sci(p.report.concurrence) << ','
       << format_sci(p.report.eof) << ',' << format_sci(p.report.leakage) << ','
       << format_sci(p.diagnostics.max_trace_drift) << '\n';
  }
}

inline nlohmann::json to_json(const SweepPoint& p) {
  return {{"gamma_over_g", p.gamma_over_g},
          {"noise_kind", to_string(p.kind)},
          {"concurrence", p.report.concurrence},
          {"eof", p.report.eof},
          {"leakage", p.report.leakage},
          {"max_trace_drift", p.diagnostics.max_trace_drift},
          {"min_eigenvalue", p.diagnostics.min_eigenvalue},
          {"max_top_fock_population", p.diagnostics.max_top_fock_population},
          {"failed", p.failed},
          {"failure", p.failure}};
}

/// gnuplot script plotting EoF against Γ/g, one curve per noise kind.
inline std::string gnuplot_script(const std::string& csv_path, const std::vector<NoiseKind>& kinds) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set logscale x\n";
  s += "set xlabel 'Gamma / g'\n";
  s += "set ylabel 'entanglement of formation'\n";
  s += "set yrange [0:1.05]\n";
  s += "plot ";
  const char* styles[] = {"dt 1", "dt 2", "dt 3"};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const std::string name(to_string(kinds[i]));
    if (i) s += ", \\\n     ";
    s += "'" + csv_path + "' using 1:(strcol(2) eq '" + name + "' ? $4 : 1/0) with lines " + styles[i % 3] +
         " title '" + name + "'";
  }
  s += "\n";
  return s;
}

/// Common envelope of every run-record document.
inline nlohmann::json run_record(std::string_view command, const RunConfig& cfg, double wall_clock_seconds) {
  nlohmann::json j;
  j["engine_version"] = kEngineVersion;
  j["command"] = command;
  j["config"] = to_json(cfg);
  j["leakage_convention"] = kLeakageConvention;
  if (cfg.model.dot_count == 2) j["schedule"] = to_json(canonical_entangling_schedule(cfg.model));
  j["physical_units"] = {{"protocol_duration_seconds", cfg.calibration.seconds(2.0 * std::numbers::pi)},
                         {"g_per_second", cfg.calibration.g_physical}};
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

}  // namespace cqed
