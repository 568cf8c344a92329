#pragma once

#include <vector>

#include "fom/oracle.hpp"
#include "fom/schedule.hpp"
#include "fom/space.hpp"

namespace fom {

// Canonical closed form of the auxiliary function
//   psi_k(x) = constant + <linear, x> + psi_weight * Psi(x) + beta * d(x).
// Both the extended mirror-descent update and the dual-averaging update
// preserve this shape (the prox linearization l_d is affine), so every
// subproblem reduces to a single prox_argmin call. Value type: updates return
// new states, nothing is shared.
struct AuxState {
  double constant = 0;
  Vec linear;
  double psi_weight = 0;
  double beta = 0;
  Vec minimizer;      // z_k, cached
  double min_value = 0;  // psi_k(z_k), cached
  long step_index = -1;

  double evaluate(const ProxSetup& setup, const CompositeTerm& psi, const Vec& x) const;
};

// psi_{-1} = beta_init * d; minimized at the prox-center with value 0.
AuxState aux_init(const ProxSetup& setup, double beta_init);

// Extended mirror-descent update:
//   psi_{k+1}(x) = min psi_k + lambda * l_f(x_next; x) + beta_next * d(x)
//                  - beta_k * l_d(z_k; x).
// Keeps only the newest linearization; psi_weight resets to lambda.
AuxState update_md(const AuxState& state, const ProxSetup& setup, const CompositeTerm& psi,
                   const OracleReply& reply, const Vec& x_next, double lambda,
                   double beta_next);

// Dual-averaging update:
//   psi_{k+1}(x) = psi_k(x) + lambda * l_f(x_next; x) + (beta_next - beta_k) * d(x).
// Accumulates all linearizations; psi_weight grows by lambda.
AuxState update_da(const AuxState& state, const ProxSetup& setup, const CompositeTerm& psi,
                   const OracleReply& reply, const Vec& x_next, double lambda,
                   double beta_next);

AuxState update_model(ModelChoice model, const AuxState& state, const ProxSetup& setup,
                      const CompositeTerm& psi, const OracleReply& reply, const Vec& x_next,
                      double lambda, double beta_next);

// (argmin over the set, min value) of the state's function.
std::pair<Vec, double> minimize(const AuxState& state, const ProxSetup& setup,
                                const CompositeTerm& psi);

// Verification report for the three framework conditions on a recorded
// update sequence:
//   (i)   min psi_{-1} = 0 and z_{-1} = x0;
//   (ii)  psi_{k+1}(x) >= min psi_k + lambda l_f(x_{k+1}; x) + beta_{k+1} d(x)
//         - beta_k l_d(z_k; x) on sampled feasible x;
//   (iii) min psi_k <= min over the set of
//         { sum_i lambda_i l_f(x_i; x) + beta_k l_d(z_k; x) },
//         minimized exactly on compact sets, sample-checked otherwise.
struct PropertyReport {
  bool init_min_ok = false;
  bool init_minimizer_ok = false;
  std::vector<double> cond2_min_residual;  // per update, min over samples
  std::vector<double> cond3_slack;         // rhs_min - min psi_k, per k >= 0
  std::vector<bool> cond3_exact;           // exact affine minimization used
  double worst_cond2() const;
  double worst_cond3() const;
  bool pass(double tol) const;
};

PropertyReport check_property(const ProxSetup& setup, const CompositeTerm& psi,
                              const std::vector<AuxState>& states,
                              const std::vector<OracleReply>& replies,
                              const std::vector<Vec>& points,
                              const std::vector<double>& lambdas,
                              const std::vector<double>& betas, int sample_count,
                              std::uint64_t seed);

void to_json(nlohmann::json& j, const AuxState& state);

}  // namespace fom
