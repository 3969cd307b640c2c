// Command-line front end: run | truth-table | sweep.
//
// Exit codes: 0 success, 1 validation error, 2 diagnostic breach, 3 I/O error.

#include "cqed/cqed.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kDiagnostic = 2, kIo = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string output_path;
  std::size_t workers = 0;
  std::optional<double> dt;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

cqed::RunConfig load_config(const Options& opt) {
  cqed::RunConfig cfg = opt.config_path.empty() ? cqed::RunConfig{} : cqed::parse_config_text(read_file(opt.config_path));
  if (opt.dt) cfg.integrator.dt = *opt.dt;
  if (!opt.output_path.empty()) cfg.output_path = opt.output_path;
  cfg.validate();
  if (!cfg.model.detuning_well_separated()) {
    std::cerr << "warning: |delta_omega_A - delta_omega_B| / g < 10; off-resonant leakage will be significant\n";
  }
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Writes the record to cfg.output_path, or prints it when no path is set.
void emit_record(const cqed::RunConfig& cfg, const nlohmann::json& record, const Options& opt) {
  if (cfg.output_path.empty()) {
    if (!opt.quiet) std::cout << record.dump(2) << '\n';
  } else {
    write_file(cfg.output_path, record.dump(2) + "\n");
  }
}

int cmd_run(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const cqed::RunConfig cfg = load_config(opt);
  const auto outcome = cqed::run_once(cfg);

  auto record = cqed::run_record("run", cfg, seconds_since(t0));
  record["result"] = {{"noise_kind", cqed::to_string(cfg.noise.kind)},
                      {"gamma_over_g", cfg.noise.gamma},
                      {"concurrence", outcome.report.concurrence},
                      {"eof", outcome.report.eof},
                      {"leakage", outcome.report.leakage}};
  record["diagnostics"] = cqed::to_json(outcome.diagnostics);
  emit_record(cfg, record, opt);

  if (!opt.quiet && !cfg.output_path.empty()) {
    std::cout << "concurrence " << outcome.report.concurrence << "  eof " << outcome.report.eof << "  leakage "
              << outcome.report.leakage << '\n';
  }
  if (outcome.diagnostics.failed) {
    std::cerr << "diagnostic breach: " << outcome.diagnostics.failure << '\n';
    return kDiagnostic;
  }
  return kOk;
}

int cmd_truth_table(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const cqed::RunConfig cfg = load_config(opt);
  if (!cfg.noise.is_noiseless()) throw cqed::ConfigError("noise.gamma", "truth-table requires a noiseless configuration");
  const auto table = cqed::truth_table(cfg.model);

  auto record = cqed::run_record("truth-table", cfg, seconds_since(t0));
  record["truth_table"] = cqed::to_json(table);
  emit_record(cfg, record, opt);

  if (!opt.quiet && !cfg.output_path.empty()) {
    for (const auto& r : table.rows) {
      std::cout << r.bit_a << r.bit_b << "  fidelity " << r.fidelity << "  phase " << r.relative_phase
                << (r.passed ? "  ok" : "  FAIL") << '\n';
    }
  }
  return table.passed ? kOk : kDiagnostic;
}

int cmd_sweep(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  cqed::RunConfig cfg = load_config(opt);
  if (!cfg.sweep) cfg.sweep = cqed::SweepSpec{};
  if (cfg.output_path.empty()) cfg.output_path = "sweep.csv";

  const std::size_t workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  const auto points = cqed::run_sweep(cfg, workers);

  const std::filesystem::path csv_path(cfg.output_path);
  std::ostringstream csv;
  cqed::write_sweep_csv(csv, points);
  write_file(csv_path, csv.str());

  auto record_path = csv_path;
  record_path.replace_extension(".json");
  auto gp_path = csv_path;
  gp_path.replace_extension(".gp");
  write_file(gp_path, cqed::gnuplot_script(csv_path.filename().string(), cfg.sweep->kinds));

  auto record = cqed::run_record("sweep", cfg, seconds_since(t0));
  record["csv"] = csv_path.string();
  nlohmann::json rows = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& p : points) {
    rows.push_back(cqed::to_json(p));
    failed += p.failed ? 1 : 0;
  }
  record["points"] = rows;
  record["failed_points"] = failed;
  write_file(record_path, record.dump(2) + "\n");

  if (!opt.quiet) {
    std::cout << "wrote " << points.size() << " rows to " << csv_path.string() << " (" << failed << " failed)\n";
  }
  return failed ? kDiagnostic : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-dot cavity photon-exchange entanglement simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  double dt = 0.0;
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--output", opt.output_path, "output path (run record, or CSV for sweep)");
  app.add_option("--workers", opt.workers, "sweep worker threads (default: hardware concurrency)");
  auto* dt_opt = app.add_option("--dt", dt, "override integrator.dt");
  app.add_flag("--quiet", opt.quiet, "suppress stdout summaries");

  auto* run = app.add_subcommand("run", "run the entangling protocol once");
  auto* table = app.add_subcommand("truth-table", "check the noiseless basis-state map");
  auto* sweep = app.add_subcommand("sweep", "sweep noise rate for each noise kind, write CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kValidation;
  }
  if (dt_opt->count() > 0) opt.dt = dt;

  try {
    if (run->parsed()) return cmd_run(opt);
    if (table->parsed()) return cmd_truth_table(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
  } catch (const cqed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiagnostic;
  }
  return kValidation;
}
