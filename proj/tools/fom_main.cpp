// Command-line front end: execute configured runs with per-iteration
// certification, run the verification suites, and compare presets.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fom/experiment.hpp"
#include "fom/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitCertificateFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitStepCondition = 3;

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, double tol) {
  std::optional<fom::Experiment> loaded;
  try {
    loaded = fom::load_experiment_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  fom::Experiment& exp = *loaded;
  if (tol > 0) {
    exp.tols.residual_abs = tol;
    exp.tols.residual_rel = tol;
  }
  fs::create_directories(out_dir);
  bool all_pass = true;
  const bool have_optimum = exp.optimum.f_star.has_value();
  for (const fom::ExperimentRun& er : exp.runs) {
    fom::RunTrace trace;
    try {
      trace = fom::run(exp.problem, exp.setup, er.config,
                       have_optimum ? std::optional<fom::OptimumInfo>(exp.optimum)
                                    : std::nullopt);
    } catch (const fom::StepConditionViolation& e) {
      std::cerr << er.name << ": " << e.what() << "\n";
      return kExitStepCondition;
    }
    fom::Certificate cert =
        fom::certify(trace, exp.setup, &exp.problem,
                     have_optimum ? &exp.optimum : nullptr, exp.tols);

    json trace_json;
    to_json(trace_json, trace);
    json setup_json;
    to_json(setup_json, exp.setup);
    json problem_json;
    to_json(problem_json, exp.problem);
    json cert_json;
    to_json(cert_json, cert);
    json bundle{{"trace", trace_json},
                {"setup", setup_json},
                {"problem", problem_json},
                {"certificate", cert_json}};
    write_file(fs::path(out_dir) / (er.name + ".trace.json"), bundle.dump(1));

    std::ostringstream csv;
    fom::write_trace_csv(csv, trace, cert);
    write_file(fs::path(out_dir) / (er.name + ".csv"), csv.str());
    std::ostringstream cert_csv;
    fom::write_certificate_csv(cert_csv, trace, cert);
    write_file(fs::path(out_dir) / (er.name + ".certificate.csv"), cert_csv.str());

    const fom::IterationRecord& last = trace.records.back();
    std::cout << er.name << ": k=" << last.k;
    if (!cert.bound.empty()) {
      std::cout << " gap=" << fom::format_double(cert.bound.back().gap)
                << " bound=" << fom::format_double(cert.bound.back().bound);
    } else {
      std::cout << " f=" << fom::format_double(last.f_xhat);
    }
    std::cout << " residual=" << fom::format_double(cert.residual.back())
              << " termination=" << trace.termination
              << (cert.all_pass() ? " [certified]" : " [FAILED]") << "\n";
    if (!cert.all_pass()) {
      all_pass = false;
      for (const std::string& f : cert.consistency.failures)
        std::cerr << "  consistency: " << f << "\n";
    }
  }
  return all_pass ? 0 : kExitCertificateFailure;
}

int cmd_verify(std::vector<std::string> suites, std::uint64_t seed, long kmax,
               const std::string& out_dir) {
  fom::VerifyOptions options;
  options.seed = seed;
  if (kmax > 0) options.kmax = kmax;
  if (suites.empty() || (suites.size() == 1 && suites[0] == "all"))
    suites = fom::suite_names();
  json reports = json::array();
  bool pass = true;
  for (const std::string& name : suites) {
    fom::SuiteReport report;
    try {
      report = fom::run_suite(name, options);
    } catch (const std::exception& e) {
      std::cerr << "suite error: " << e.what() << "\n";
      return kExitConfigError;
    }
    pass = pass && report.pass();
    for (const fom::CheckResult& c : report.checks)
      std::cout << (c.pass ? "[ok]   " : "[FAIL] ") << report.suite << "/" << c.name
                << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    reports.push_back(report.to_json());
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "verify_report.json",
               json{{"pass", pass}, {"suites", reports}}.dump(1));
  }
  std::cout << (pass ? "verify: all suites passed" : "verify: FAILURES") << "\n";
  return pass ? 0 : 1;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
  std::optional<fom::Experiment> loaded;
  try {
    loaded = fom::load_experiment_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  fom::Experiment& exp = *loaded;
  if (exp.runs.size() < 2) {
    std::cerr << "compare needs at least two runs\n";
    return kExitConfigError;
  }
  if (!exp.optimum.f_star) {
    std::cerr << "compare needs a known or configured optimum for gap columns\n";
    return kExitConfigError;
  }
  std::vector<fom::RunTrace> traces;
  for (const fom::ExperimentRun& er : exp.runs) {
    try {
      traces.push_back(fom::run(exp.problem, exp.setup, er.config));
    } catch (const fom::StepConditionViolation& e) {
      std::cerr << er.name << ": " << e.what() << "\n";
      return kExitStepCondition;
    }
  }
  size_t max_k = 0;
  for (const fom::RunTrace& t : traces) max_k = std::max(max_k, t.records.size());
  std::ostringstream csv;
  csv << "# fom-compare-csv v1\nk";
  for (const fom::ExperimentRun& er : exp.runs) csv << ",gap_" << er.name;
  csv << "\n";
  for (size_t k = 0; k < max_k; ++k) {
    csv << k;
    for (const fom::RunTrace& t : traces) {
      csv << ',';
      if (k < t.records.size())
        csv << fom::format_double(t.records[k].f_xhat - *exp.optimum.f_star);
    }
    csv << "\n";
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "compare.csv", csv.str());
  std::cout << "compare: wrote " << (fs::path(out_dir) / "compare.csv").string() << " ("
            << traces.size() << " runs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order convex methods with per-iteration certificates"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  double tol = 0;
  std::uint64_t seed = 12345;
  long kmax = 0;
  std::vector<std::string> suites;

  CLI::App* run = app.add_subcommand("run", "execute and certify configured runs");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--tol", tol, "certificate residual tolerance override");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suite", suites, "suite name(s), default all");
  verify->add_option("--seed", seed, "suite RNG seed");
  verify->add_option("--kmax", kmax, "beta-hat identity horizon");
  verify->add_option("--out", out_dir, "directory for the JSON report")->default_val("");

  CLI::App* compare = app.add_subcommand("compare", "aligned gap columns for >=2 runs");
  compare->add_option("--config", config_path, "experiment config JSON")->required();
  compare->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, tol);
    if (verify->parsed()) return cmd_verify(suites, seed, kmax, out_dir);
    if (compare->parsed()) return cmd_compare(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return 0;
}
