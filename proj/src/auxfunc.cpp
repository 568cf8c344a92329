#include "fom/auxfunc.hpp"

#include <algorithm>
#include <cmath>

namespace fom {

using nlohmann::json;

double AuxState::evaluate(const ProxSetup& setup, const CompositeTerm& psi,
                          const Vec& x) const {
  return constant + linear.dot(x) + psi_weight * psi.value(x) + beta * d_value(setup, x);
}

AuxState aux_init(const ProxSetup& setup, double beta_init) {
  if (!(beta_init > 0)) throw std::invalid_argument("aux_init: beta must be positive");
  AuxState s;
  s.constant = 0;
  s.linear = Vec::Zero(setup.dim());
  s.psi_weight = 0;
  s.beta = beta_init;
  s.minimizer = setup.x0();
  s.min_value = 0;
  s.step_index = -1;
  return s;
}

namespace {

void check_update_args(const AuxState& state, const ProxSetup& setup, const Vec& x_next,
                       double lambda, double beta_next) {
  setup.require_dim(x_next, "aux update");
  if (!(lambda > 0)) throw std::invalid_argument("aux update: lambda must be positive");
  if (beta_next < state.beta)
    throw std::invalid_argument("aux update: beta must be non-decreasing");
}

void refresh_minimizer(AuxState& s, const ProxSetup& setup, const CompositeTerm& psi) {
  s.minimizer = prox_argmin(setup, s.linear, s.beta, psi, s.psi_weight);
  s.min_value = s.evaluate(setup, psi, s.minimizer);
}

}  // namespace

AuxState update_md(const AuxState& state, const ProxSetup& setup, const CompositeTerm& psi,
                   const OracleReply& reply, const Vec& x_next, double lambda,
                   double beta_next) {
  check_update_args(state, setup, x_next, lambda, beta_next);
  const Vec grad_d = d_grad(setup, state.minimizer);
  const double ld_const = d_value(setup, state.minimizer) - grad_d.dot(state.minimizer);

  AuxState next;
  next.constant = state.min_value + lambda * (reply.value - reply.slope.dot(x_next)) -
                  state.beta * ld_const;
  next.linear = lambda * reply.slope - state.beta * grad_d;
  next.psi_weight = reply.has_composite ? lambda : 0.0;
  next.beta = beta_next;
  next.step_index = state.step_index + 1;
  refresh_minimizer(next, setup, psi);
  return next;
}

AuxState update_da(const AuxState& state, const ProxSetup& setup, const CompositeTerm& psi,
                   const OracleReply& reply, const Vec& x_next, double lambda,
                   double beta_next) {
  check_update_args(state, setup, x_next, lambda, beta_next);
  AuxState next = state;
  next.constant += lambda * (reply.value - reply.slope.dot(x_next));
  next.linear += lambda * reply.slope;
  if (reply.has_composite) next.psi_weight += lambda;
  next.beta = beta_next;
  next.step_index = state.step_index + 1;
  refresh_minimizer(next, setup, psi);
  return next;
}

AuxState update_model(ModelChoice model, const AuxState& state, const ProxSetup& setup,
                      const CompositeTerm& psi, const OracleReply& reply, const Vec& x_next,
                      double lambda, double beta_next) {
  return model == ModelChoice::MD
             ? update_md(state, setup, psi, reply, x_next, lambda, beta_next)
             : update_da(state, setup, psi, reply, x_next, lambda, beta_next);
}

std::pair<Vec, double> minimize(const AuxState& state, const ProxSetup& setup,
                                const CompositeTerm& psi) {
  Vec z = prox_argmin(setup, state.linear, state.beta, psi, state.psi_weight);
  return {z, state.evaluate(setup, psi, z)};
}

double PropertyReport::worst_cond2() const {
  double w = 0;
  for (double r : cond2_min_residual) w = std::min(w, r);
  return w;
}

double PropertyReport::worst_cond3() const {
  double w = 0;
  for (double s : cond3_slack) w = std::min(w, s);
  return w;
}

bool PropertyReport::pass(double tol) const {
  if (!init_min_ok || !init_minimizer_ok) return false;
  return worst_cond2() >= -tol && worst_cond3() >= -tol;
}

PropertyReport check_property(const ProxSetup& setup, const CompositeTerm& psi,
                              const std::vector<AuxState>& states,
                              const std::vector<OracleReply>& replies,
                              const std::vector<Vec>& points,
                              const std::vector<double>& lambdas,
                              const std::vector<double>& betas, int sample_count,
                              std::uint64_t seed) {
  if (states.empty()) throw std::invalid_argument("check_property: no states");
  const size_t updates = states.size() - 1;
  if (replies.size() != updates || points.size() != updates || lambdas.size() != updates ||
      betas.size() != updates)
    throw std::invalid_argument("check_property: sequence length mismatch");

  PropertyReport report;
  const AuxState& init = states.front();
  report.init_min_ok = std::abs(init.min_value) <= 1e-12;
  report.init_minimizer_ok =
      (init.minimizer - setup.x0()).lpNorm<Eigen::Infinity>() <= 1e-12;

  Rng rng(seed);
  report.cond2_min_residual.resize(updates);
  for (size_t i = 0; i < updates; ++i) {
    const AuxState& prev = states[i];
    const AuxState& next = states[i + 1];
    const Vec& z_prev = prev.minimizer;
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
      Vec x = sample_feasible(setup, rng);
      double lhs = next.evaluate(setup, psi, x);
      double rhs = prev.min_value + lambdas[i] * lower_model_value(replies[i], points[i], x, psi) +
                   next.beta * d_value(setup, x) - prev.beta * l_d(setup, z_prev, x);
      worst = std::min(worst, lhs - rhs);
    }
    report.cond2_min_residual[i] = worst;
  }

  // condition (iii): aggregate all linearizations, add beta_k * l_d(z_k; .),
  // and minimize the resulting (affine + optional l1) function over the set.
  const bool compact = setup.set().kind != SetKind::FreeSpace;
  double agg_const = 0;
  Vec agg_lin = Vec::Zero(setup.dim());
  double agg_l1 = 0;
  report.cond3_slack.resize(updates);
  report.cond3_exact.resize(updates);
  for (size_t i = 0; i < updates; ++i) {
    agg_const += lambdas[i] * (replies[i].value - replies[i].slope.dot(points[i]));
    agg_lin += lambdas[i] * replies[i].slope;
    if (replies[i].has_composite) agg_l1 += lambdas[i] * psi.weight;

    const AuxState& st = states[i + 1];
    const Vec grad_d = d_grad(setup, st.minimizer);
    double c0 = agg_const + st.beta * (d_value(setup, st.minimizer) - grad_d.dot(st.minimizer));
    Vec v = agg_lin + st.beta * grad_d;
    double rhs_min;
    bool exact = false;
    if (compact) {
      rhs_min = min_affine_over_set(setup, c0, v, agg_l1);
      exact = true;
    } else {
      rhs_min = std::numeric_limits<double>::infinity();
      for (int s = 0; s < std::max(sample_count, 1); ++s) {
        Vec x = sample_feasible(setup, rng);
        rhs_min = std::min(rhs_min, c0 + v.dot(x) + agg_l1 * x.lpNorm<1>());
      }
      // the minimizer itself is feasible and usually near-optimal for the rhs
      rhs_min = std::min(rhs_min, c0 + v.dot(st.minimizer) +
                                      agg_l1 * st.minimizer.lpNorm<1>());
    }
    report.cond3_slack[i] = rhs_min - st.min_value;
    report.cond3_exact[i] = exact;
  }
  return report;
}

void to_json(json& j, const AuxState& state) {
  j = json{{"constant", state.constant},
           {"linear", std::vector<double>(state.linear.begin(), state.linear.end())},
           {"psi_weight", state.psi_weight},
           {"beta", state.beta},
           {"minimizer", std::vector<double>(state.minimizer.begin(), state.minimizer.end())},
           {"min_value", state.min_value},
           {"step_index", state.step_index}};
}

}  // namespace fom
