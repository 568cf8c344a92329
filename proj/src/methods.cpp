#include "fom/methods.hpp"

#include <cmath>

namespace fom {

using nlohmann::json;

std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::SubgradA:
      return "subgrad_a";
    case MethodKind::SubgradB:
      return "subgrad_b";
    case MethodKind::Cgm:
      return "cgm";
    case MethodKind::Fgm:
      return "fgm";
  }
  throw std::logic_error("unreachable");
}

MethodKind method_from_string(const std::string& s) {
  if (s == "subgrad_a") return MethodKind::SubgradA;
  if (s == "subgrad_b") return MethodKind::SubgradB;
  if (s == "cgm") return MethodKind::Cgm;
  if (s == "fgm") return MethodKind::Fgm;
  throw std::invalid_argument("unknown method " + s);
}

std::string setup_id(const ProxSetup& setup) {
  std::string geom = setup.geometry() == Geometry::Euclidean ? "euclidean" : "entropy";
  std::string set;
  switch (setup.set().kind) {
    case SetKind::FreeSpace:
      set = "free";
      break;
    case SetKind::Box:
      set = "box";
      break;
    case SetKind::Ball:
      set = "ball";
      break;
    case SetKind::Simplex:
      set = "simplex";
      break;
  }
  return geom + "-" + set + "(n=" + std::to_string(setup.dim()) + ")";
}

namespace {

constexpr double kStepConditionSlack = 1e-9;  // relative FP slack only

struct RunContext {
  const Problem& problem;
  const ProxSetup& setup;
  const RunConfig& config;
  const std::optional<OptimumInfo>& optimum;
  CompositeTerm psi;
  RunTrace trace;

  RunContext(const Problem& p, const ProxSetup& s, const RunConfig& c,
             const std::optional<OptimumInfo>& opt)
      : problem(p), setup(s), config(c), optimum(opt), psi(p.composite()) {
    if (c.max_iters < 1) throw std::invalid_argument("run: max_iters must be >= 1");
    trace.method = c.method;
    trace.schedule_desc = c.schedule.to_json();
    trace.mix_desc = c.mix.to_json();
    trace.problem_id = p.id();
    trace.setup_id = setup_id(s);
    trace.beta_init = c.schedule.beta_init();
    trace.sigma = s.sigma();
    trace.psi = psi;
    trace.termination = "max_iters";
  }

  void push_record(long k, const Vec& x, const Vec& z, const Vec& xhat, double lambda,
                   double beta, double S, double min_psi, double C,
                   const OracleReply& reply, double gnorm, ModelChoice model) {
    IterationRecord r;
    r.k = k;
    r.x = x;
    r.z = z;
    r.xhat = xhat;
    r.lambda = lambda;
    r.beta = beta;
    r.S = S;
    r.f_x = problem.true_value(x);
    r.f_z = problem.true_value(z);
    r.f_xhat = problem.true_value(xhat);
    r.min_psi = min_psi;
    r.C = C;
    r.grad_dual_norm = gnorm;
    r.reply_value = reply.value;
    r.reply_slope = reply.slope;
    r.delta = reply.delta;
    r.lipschitz = reply.lipschitz ? *reply.lipschitz : std::numeric_limits<double>::quiet_NaN();
    r.model = model;
    trace.records.push_back(std::move(r));
  }

  // Early exit once the per-iteration certified bound reaches the target.
  bool reached_target(double beta, double C, double S, const Vec& z) {
    if (!config.target_gap || !optimum) return false;
    double ld;
    if (optimum->x_star)
      ld = l_d(setup, z, *optimum->x_star);
    else if (optimum->d_star_upper)
      ld = *optimum->d_star_upper;
    else
      return false;
    return (beta * ld + C) / S <= *config.target_gap;
  }
};

double require_lipschitz(const OracleReply& reply) {
  if (!reply.lipschitz)
    throw std::invalid_argument("structured method: oracle reports no Lipschitz constant");
  return *reply.lipschitz;
}

void check_step_condition(double lhs, double L, long k, const char* method) {
  if (lhs < L * (1.0 - kStepConditionSlack) - 1e-12)
    throw StepConditionViolation(std::string(method) + ": step condition violated at k=" +
                                 std::to_string(k) + " (" + std::to_string(lhs) + " < L=" +
                                 std::to_string(L) + ")");
}

}  // namespace

RunTrace run_subgradient_a(const Problem& problem, const ProxSetup& setup,
                           const RunConfig& config,
                           const std::optional<OptimumInfo>& optimum) {
  if (!problem.nonsmooth_class())
    throw std::invalid_argument("subgrad_a: problem must be in the non-smooth class");
  RunContext ctx(problem, setup, config, optimum);
  AuxState state = aux_init(setup, ctx.trace.beta_init);
  const double sigma = setup.sigma();
  double S = 0, C = 0, prev_beta = ctx.trace.beta_init;
  Vec xhat;
  for (long k = 0; k < config.max_iters; ++k) {
    const Vec x = state.minimizer;  // x_k := z_{k-1}
    const OracleReply reply = problem.query(x);
    const double gnorm = dual_norm(setup, reply.slope);
    double lambda, beta;
    try {
      std::tie(lambda, beta) = config.schedule.next_params(k, gnorm);
    } catch (const OptimalPointDetected&) {
      ctx.trace.termination = "zero_subgradient";
      break;
    }
    const ModelChoice model = config.mix.choice(k);
    state = update_model(model, state, setup, ctx.psi, reply, x, lambda, beta);
    C += lambda * lambda * gnorm * gnorm / (2.0 * sigma * prev_beta);
    prev_beta = beta;
    const double S_prev = S;
    S += lambda;
    xhat = (k == 0) ? x : Vec((S_prev * xhat + lambda * x) / S);
    ctx.push_record(k, x, state.minimizer, xhat, lambda, beta, S, state.min_value, C, reply,
                    gnorm, model);
    if (ctx.reached_target(beta, C, S, state.minimizer)) {
      ctx.trace.termination = "target_gap";
      break;
    }
  }
  return std::move(ctx.trace);
}

RunTrace run_subgradient_b(const Problem& problem, const ProxSetup& setup,
                           const RunConfig& config,
                           const std::optional<OptimumInfo>& optimum) {
  if (!problem.nonsmooth_class())
    throw std::invalid_argument("subgrad_b: problem must be in the non-smooth class");
  if (config.schedule.needs_grad_norm())
    throw std::invalid_argument(
        "subgrad_b: the test point depends on lambda_k, so schedules whose lambda_k "
        "depends on g(x_k) are not usable");
  RunContext ctx(problem, setup, config, optimum);
  AuxState state = aux_init(setup, ctx.trace.beta_init);
  const double sigma = setup.sigma();
  double S = 0, C = 0, prev_beta = ctx.trace.beta_init;
  Vec x;
  for (long k = 0; k < config.max_iters; ++k) {
    const Vec z_prev = state.minimizer;  // z_{k-1}
    auto [lambda, beta] = config.schedule.next_params(k);
    const double S_new = S + lambda;
    x = (k == 0) ? z_prev : Vec((S * x + lambda * z_prev) / S_new);  // x_k = xhat_k
    const OracleReply reply = problem.query(x);
    const double gnorm = dual_norm(setup, reply.slope);
    const ModelChoice model = config.mix.choice(k);
    state = update_model(model, state, setup, ctx.psi, reply, x, lambda, beta);
    C += lambda * lambda * gnorm * gnorm / (2.0 * sigma * prev_beta);
    prev_beta = beta;
    S = S_new;
    ctx.push_record(k, x, state.minimizer, x, lambda, beta, S, state.min_value, C, reply,
                    gnorm, model);
    if (ctx.reached_target(beta, C, S, state.minimizer)) {
      ctx.trace.termination = "target_gap";
      break;
    }
  }
  return std::move(ctx.trace);
}

RunTrace run_cgm(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
                 const std::optional<OptimumInfo>& optimum) {
  if (problem.nonsmooth_class())
    throw std::invalid_argument("cgm: problem must be in the structured class");
  RunContext ctx(problem, setup, config, optimum);
  AuxState state = aux_init(setup, ctx.trace.beta_init);
  const double sigma = setup.sigma();
  double S = 0, C = 0, prev_beta = ctx.trace.beta_init;
  Vec xhat;
  for (long k = 0; k < config.max_iters; ++k) {
    const Vec x = state.minimizer;  // x_k := z_{k-1}
    const OracleReply reply = problem.query(x);
    auto [lambda, beta] = config.schedule.next_params(k);
    const double L = require_lipschitz(reply);
    check_step_condition(sigma * prev_beta / lambda, L, k, "cgm");
    const ModelChoice model = config.mix.choice(k);
    state = update_model(model, state, setup, ctx.psi, reply, x, lambda, beta);
    const Vec& z = state.minimizer;  // x_{k+1} := z_k
    C += lambda * reply.delta;
    prev_beta = beta;
    const double S_prev = S;
    S += lambda;
    // xhat_k averages the *next* iterates x_{i+1} = z_i
    xhat = (k == 0) ? z : Vec((S_prev * xhat + lambda * z) / S);
    ctx.push_record(k, x, z, xhat, lambda, beta, S, state.min_value, C, reply,
                    dual_norm(setup, reply.slope), model);
    if (ctx.reached_target(beta, C, S, z)) {
      ctx.trace.termination = "target_gap";
      break;
    }
  }
  return std::move(ctx.trace);
}

RunTrace run_fgm(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
                 const std::optional<OptimumInfo>& optimum) {
  if (problem.nonsmooth_class())
    throw std::invalid_argument("fgm: problem must be in the structured class");
  if (config.schedule.needs_grad_norm())
    throw std::invalid_argument("fgm: gradient-dependent weight schedules are not usable");
  RunContext ctx(problem, setup, config, optimum);
  AuxState state = aux_init(setup, ctx.trace.beta_init);
  const double sigma = setup.sigma();
  double S = 0, C = 0, prev_beta = ctx.trace.beta_init;
  Vec xhat;
  for (long k = 0; k < config.max_iters; ++k) {
    const Vec z_prev = state.minimizer;  // z_{k-1}
    auto [lambda, beta] = config.schedule.next_params(k);
    const double S_new = S + lambda;
    // x_0 is the prox-center; afterwards x_k mixes the averaged z's with z_{k-1}
    const Vec x = (k == 0) ? setup.x0() : Vec((S * xhat + lambda * z_prev) / S_new);
    const OracleReply reply = problem.query(x);
    const double L = require_lipschitz(reply);
    check_step_condition(sigma * prev_beta * S_new / (lambda * lambda), L, k, "fgm");
    const ModelChoice model = config.mix.choice(k);
    state = update_model(model, state, setup, ctx.psi, reply, x, lambda, beta);
    const Vec& z = state.minimizer;
    C += S_new * reply.delta;
    prev_beta = beta;
    xhat = (k == 0) ? z : Vec((S * xhat + lambda * z) / S_new);
    S = S_new;
    ctx.push_record(k, x, z, xhat, lambda, beta, S, state.min_value, C, reply,
                    dual_norm(setup, reply.slope), model);
    if (ctx.reached_target(beta, C, S, z)) {
      ctx.trace.termination = "target_gap";
      break;
    }
  }
  return std::move(ctx.trace);
}

RunTrace run(const Problem& problem, const ProxSetup& setup, const RunConfig& config,
             const std::optional<OptimumInfo>& optimum) {
  switch (config.method) {
    case MethodKind::SubgradA:
      return run_subgradient_a(problem, setup, config, optimum);
    case MethodKind::SubgradB:
      return run_subgradient_b(problem, setup, config, optimum);
    case MethodKind::Cgm:
      return run_cgm(problem, setup, config, optimum);
    case MethodKind::Fgm:
      return run_fgm(problem, setup, config, optimum);
  }
  throw std::logic_error("unreachable");
}

Preset preset(const std::string& name) {
  if (name == "extended_mdm") return {MethodKind::SubgradA, MixPolicy::pure_md(), {}};
  if (name == "dam") return {MethodKind::SubgradA, MixPolicy::pure_da(), {}};
  if (name == "double_averaging") return {MethodKind::SubgradB, MixPolicy::pure_da(), {}};
  if (name == "mdm_classic")
    return {MethodKind::SubgradA, MixPolicy::pure_md(), Schedule::Kind::MdmClassic};
  if (name == "primal_gradient")
    return {MethodKind::Cgm, MixPolicy::pure_md(), Schedule::Kind::ClassicSmooth};
  if (name == "dual_gradient")
    return {MethodKind::Cgm, MixPolicy::pure_da(), Schedule::Kind::ClassicSmooth};
  if (name == "fgm_md") return {MethodKind::Fgm, MixPolicy::pure_md(), {}};
  if (name == "fgm_da") return {MethodKind::Fgm, MixPolicy::pure_da(), {}};
  if (name == "tseng2")
    return {MethodKind::Fgm, MixPolicy::pure_md(), Schedule::Kind::TsengLambda};
  if (name == "tseng3")
    return {MethodKind::Fgm, MixPolicy::pure_da(), Schedule::Kind::TsengLambda};
  throw std::invalid_argument("unknown preset " + name);
}

std::vector<std::string> preset_names() {
  return {"extended_mdm", "dam",    "double_averaging", "mdm_classic", "primal_gradient",
          "dual_gradient", "fgm_md", "fgm_da",           "tseng2",      "tseng3"};
}

namespace {

std::vector<double> to_std(const Vec& v) { return {v.begin(), v.end()}; }

Vec vec_of(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

void to_json(json& j, const RunTrace& trace) {
  json records = json::array();
  for (const IterationRecord& r : trace.records) {
    json rec{{"k", r.k},
             {"x", to_std(r.x)},
             {"z", to_std(r.z)},
             {"xhat", to_std(r.xhat)},
             {"lambda", r.lambda},
             {"beta", r.beta},
             {"S", r.S},
             {"f_x", r.f_x},
             {"f_z", r.f_z},
             {"f_xhat", r.f_xhat},
             {"min_psi", r.min_psi},
             {"C", r.C},
             {"grad_dual_norm", r.grad_dual_norm},
             {"reply_value", r.reply_value},
             {"reply_slope", to_std(r.reply_slope)},
             {"delta", r.delta},
             {"model", to_string(r.model)}};
    if (!std::isnan(r.lipschitz)) rec["lipschitz"] = r.lipschitz;
    records.push_back(std::move(rec));
  }
  json psi;
  to_json(psi, trace.psi);
  j = json{{"format", "fom-trace-v1"},
           {"method", to_string(trace.method)},
           {"schedule", trace.schedule_desc},
           {"mix", trace.mix_desc},
           {"problem_id", trace.problem_id},
           {"setup_id", trace.setup_id},
           {"beta_init", trace.beta_init},
           {"sigma", trace.sigma},
           {"psi", psi},
           {"termination", trace.termination},
           {"records", std::move(records)}};
}

RunTrace trace_from_json(const json& j) {
  RunTrace t;
  t.method = method_from_string(j.at("method").get<std::string>());
  t.schedule_desc = j.at("schedule");
  t.mix_desc = j.at("mix");
  t.problem_id = j.at("problem_id").get<std::string>();
  t.setup_id = j.at("setup_id").get<std::string>();
  t.beta_init = j.at("beta_init").get<double>();
  t.sigma = j.at("sigma").get<double>();
  t.psi = composite_from_json(j.at("psi"));
  t.termination = j.at("termination").get<std::string>();
  for (const json& rec : j.at("records")) {
    IterationRecord r;
    r.k = rec.at("k").get<long>();
    r.x = vec_of(rec.at("x"));
    r.z = vec_of(rec.at("z"));
    r.xhat = vec_of(rec.at("xhat"));
    r.lambda = rec.at("lambda").get<double>();
    r.beta = rec.at("beta").get<double>();
    r.S = rec.at("S").get<double>();
    r.f_x = rec.at("f_x").get<double>();
    r.f_z = rec.at("f_z").get<double>();
    r.f_xhat = rec.at("f_xhat").get<double>();
    r.min_psi = rec.at("min_psi").get<double>();
    r.C = rec.at("C").get<double>();
    r.grad_dual_norm = rec.at("grad_dual_norm").get<double>();
    r.reply_value = rec.at("reply_value").get<double>();
    r.reply_slope = vec_of(rec.at("reply_slope"));
    r.delta = rec.at("delta").get<double>();
    if (rec.contains("lipschitz")) r.lipschitz = rec.at("lipschitz").get<double>();
    r.model = rec.at("model").get<std::string>() == "MD" ? ModelChoice::MD : ModelChoice::DA;
    t.records.push_back(std::move(r));
  }
  return t;
}

}  // namespace fom
