#pragma once

#include <string>
#include <vector>

#include "fom/certify.hpp"
#include "fom/methods.hpp"

namespace fom {

// Independent transcriptions of the classical recursions, used only to
// cross-check the framework drivers. They use their own closed-form
// subproblem solutions and share nothing with the auxiliary-function
// machinery.
namespace reference {

// x_{k+1} = x_k - lambda_k g(x_k) on a Euclidean free space.
std::vector<Vec> projected_subgradient(const Problem& problem, const Vec& x0,
                                       const std::vector<double>& lambdas);

struct AveragingResult {
  std::vector<Vec> x, z;
};

// Double averaging on the entropy simplex:
//   z_k = softmax(-(sum_i lambda_i g_i)/beta_k),
//   x_{k+1} = (1 - tau_k) x_k + tau_k z_k,  tau_k = lambda_{k+1}/S_{k+1}.
AveragingResult double_averaging_entropy(const Problem& problem, int dim,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas);

struct ApgResult {
  std::vector<Vec> x, z, xhat;
};

// Tseng's second APG method on a Euclidean free space (sigma = 1):
//   z_{k+1} = z_k - (lambda_{k+1}/L) grad f(x_{k+1}).
ApgResult tseng_second_apg(const Problem& problem, const Vec& x0, double L, long iters);

// Tseng's third APG method on a Euclidean free space:
//   z_{k+1} = x0 - (1/L) sum_{i<=k+1} lambda_i grad f(x_i).
ApgResult tseng_third_apg(const Problem& problem, const Vec& x0, double L, long iters);

// x_{k+1} = x_k - (1/L) grad f(x_k).
std::vector<Vec> gradient_descent(const Problem& problem, const Vec& x0, double L,
                                  long iters);

}  // namespace reference

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 12345;
  long kmax = 100000;  // beta-hat identity horizon
  int samples = 200;
  double tol = 1e-9;
};

std::vector<std::string> suite_names();
SuiteReport run_suite(const std::string& name, const VerifyOptions& options = {});

// Seeded 10% corruption of one trace field (lambda, beta, slope or z);
// used by the mutation-soundness suite and its tests.
RunTrace corrupt_trace(const RunTrace& trace, std::uint64_t seed);

}  // namespace fom
