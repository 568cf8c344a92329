#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fom/methods.hpp"
#include "fom/tolerances.hpp"

namespace fom {

enum class Relation { R, RHat, RHatPrime };

// Which certificate relation a method's trace must satisfy:
//   subgrad_a -> RHat   (weighted sum of f at test points)
//   subgrad_b -> R      (S_k f(xhat_k); the paper proves only R for this one)
//   cgm       -> RHatPrime (weighted sum of f at the *next* iterates)
//   fgm       -> R
Relation relation_for(MethodKind method);

// C_k = (1/(2 sigma)) sum_{i<=k} lambda_i^2 ||g_i||_*^2 / beta_{i-1}
std::vector<double> compute_Ck_nonsmooth(const RunTrace& trace);

// C_0 = lambda_0 delta_0; CGM adds lambda_{k+1} delta_{k+1}, FGM adds
// S_{k+1} delta_{k+1}.
std::vector<double> compute_Ck_structured(const RunTrace& trace, MethodKind method);

std::vector<double> compute_Ck(const RunTrace& trace);

// residual_k = min psi_k + C_k - LHS_k; nonnegative (within slack) on a
// valid trace.
std::vector<double> check_relation(const RunTrace& trace, const std::vector<double>& Ck,
                                   Relation which);

struct BoundRow {
  double bound = 0;
  double gap = 0;
  bool pass = false;
};

// Certified optimality-gap bound per iteration:
//   f(xhat_k) - f* <= (beta_k l_d(z_k; x*) + C_k) / S_k,
// or the weaker D-surrogate with l_d replaced by D >= d(x*).
std::vector<BoundRow> check_bound(const RunTrace& trace, const ProxSetup& setup,
                                  const std::vector<double>& Ck, const OptimumInfo& optimum,
                                  bool use_d_surrogate = false,
                                  const Tolerances& tols = default_tolerances());

// Closed-form convergence rate envelopes for the named parameter choices.
struct RateEnvelope {
  enum class Kind { SimpleAverages, WeightedAverages, Cgm, Fgm };
  Kind kind;
  double gamma = 1;      // simple averages
  double rho = 1;        // weighted averages
  double lipschitz = 0;  // cgm / fgm
  double delta = 0;      // constant oracle slack
  double sigma = 1;

  double value(long k, double ld_star, double Mk) const;
};

// Envelope matching the trace's schedule; nullopt when no closed form is
// defined for it.
std::optional<RateEnvelope> envelope_from_trace(const RunTrace& trace);

struct RateRow {
  double envelope = 0;
  double gap = 0;
  bool pass = false;
};

std::vector<RateRow> check_rate(const RunTrace& trace, const ProxSetup& setup,
                                const RateEnvelope& envelope, const OptimumInfo& optimum,
                                const Tolerances& tols = default_tolerances());

// sigma beta_{k-1} / lambda_k >= L(x_k) for CGM;
// sigma beta_{k-1} S_k / lambda_k^2 >= L(x_k) for FGM.
std::vector<bool> check_step_conditions(const RunTrace& trace, MethodKind method,
                                        double rel_slack = 1e-9);

// Internal-consistency audit of a trace: schedule replay, S_k accumulation,
// test-point/average recursions, a full replay of the auxiliary-function
// state machine against the recorded minimizers and minima, dual norms, C_k
// recomputation and (when the problem is given) objective re-evaluation.
// This is what makes corrupted traces detectable.
struct ConsistencyReport {
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

ConsistencyReport check_consistency(const RunTrace& trace, const ProxSetup& setup,
                                    const Problem* problem = nullptr);

struct Certificate {
  std::vector<double> C;
  std::vector<double> residual;      // relation residuals
  std::vector<bool> relation_pass;
  std::vector<BoundRow> bound;       // empty when no optimum available
  std::vector<RateRow> rate;         // empty when no envelope applies
  std::vector<bool> step_pass;       // empty for non-smooth methods
  ConsistencyReport consistency;
  bool all_pass() const;
};

Certificate certify(const RunTrace& trace, const ProxSetup& setup,
                    const Problem* problem = nullptr, const OptimumInfo* optimum = nullptr,
                    const Tolerances& tols = default_tolerances());

void to_json(nlohmann::json& j, const Certificate& cert);

// CSV schema v1: k,f_xhat,gap,bound,residual,lambda,beta (gap/bound blank
// when no optimum is known).
void write_trace_csv(std::ostream& os, const RunTrace& trace, const Certificate& cert);
// CSV schema v1: k,gap,bound,envelope,residual,pass
void write_certificate_csv(std::ostream& os, const RunTrace& trace, const Certificate& cert);

// Deterministic float formatting used for all CSV output.
std::string format_double(double v);

}  // namespace fom
