#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fom/auxfunc.hpp"
#include "fom/oracle.hpp"
#include "fom/schedule.hpp"
#include "fom/space.hpp"

namespace fom {

// Raised when a smooth-method step condition (sigma*beta_{k-1}/lambda_k or
// sigma*beta_{k-1}*S_k/lambda_k^2 against L(x_k)) fails: the convergence
// guarantee is conditional on it, so the run must not continue silently.
struct StepConditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MethodKind { SubgradA, SubgradB, Cgm, Fgm };

std::string to_string(MethodKind m);
MethodKind method_from_string(const std::string& s);

struct RunConfig {
  MethodKind method = MethodKind::SubgradA;
  Schedule schedule = Schedule::simple_averages(1.0);
  MixPolicy mix = MixPolicy::pure_md();
  long max_iters = 100;
  std::uint64_t seed = 0;
  // optional early exit once the certified bound drops below this gap
  std::optional<double> target_gap;
};

struct IterationRecord {
  long k = 0;
  Vec x;        // test point x_k
  Vec z;        // subproblem minimizer z_k
  Vec xhat;     // approximate solution
  double lambda = 0, beta = 0, S = 0;
  double f_x = 0, f_z = 0, f_xhat = 0;  // exact objective values
  double min_psi = 0;
  double C = 0;  // running certificate constant
  double grad_dual_norm = 0;
  double reply_value = 0;  // oracle model value at x_k
  Vec reply_slope;
  double delta = 0;
  double lipschitz = std::numeric_limits<double>::quiet_NaN();  // NaN: non-smooth
  ModelChoice model = ModelChoice::MD;
};

struct RunTrace {
  MethodKind method = MethodKind::SubgradA;
  nlohmann::json schedule_desc;
  nlohmann::json mix_desc;
  std::string problem_id, setup_id;
  double beta_init = 0;  // beta_{-1}
  double sigma = 1.0;
  CompositeTerm psi;
  std::vector<IterationRecord> records;
  std::string termination;
};

RunTrace run_subgradient_a(const Problem& problem, const ProxSetup& setup,
                           const RunConfig& config,
                           const std::optional<OptimumInfo>& optimum = {});
RunTrace run_subgradient_b(const Problem& problem, const ProxSetup& setup,
                           const RunConfig& config,
                           const std::optional<OptimumInfo>& optimum = {});
RunTrace run_cgm(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
                 const std::optional<OptimumInfo>& optimum = {});
RunTrace run_fgm(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
                 const std::optional<OptimumInfo>& optimum = {});

// Dispatch by config.method.
RunTrace run(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
             const std::optional<OptimumInfo>& optimum = {});

// Named method presets: (driver, mix policy, optional pinned schedule kind).
struct Preset {
  MethodKind method;
  MixPolicy mix;
  std::optional<Schedule::Kind> schedule_kind;
};
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

std::string setup_id(const ProxSetup& setup);

void to_json(nlohmann::json& j, const RunTrace& trace);
RunTrace trace_from_json(const nlohmann::json& j);

}  // namespace fom
