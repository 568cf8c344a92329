#include "fom/verify.hpp"

#include <cmath>
#include <sstream>

#include "fom/tolerances.hpp"

namespace fom {

using nlohmann::json;

namespace reference {

std::vector<Vec> projected_subgradient(const Problem& problem, const Vec& x0,
                                       const std::vector<double>& lambdas) {
  std::vector<Vec> xs;
  Vec x = x0;
  for (double lambda : lambdas) {
    xs.push_back(x);
    x = x - lambda * problem.query(x).slope;
  }
  return xs;
}

AveragingResult double_averaging_entropy(const Problem& problem, int dim,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas) {
  auto softmax = [](const Vec& a) {
    Vec e = (a.array() - a.maxCoeff()).exp();
    return Vec(e / e.sum());
  };
  AveragingResult out;
  Vec x = Vec::Constant(dim, 1.0 / dim);
  Vec s = Vec::Zero(dim);
  double S = 0;
  for (size_t k = 0; k < lambdas.size(); ++k) {
    out.x.push_back(x);
    s += lambdas[k] * problem.query(x).slope;
    Vec z = softmax(Vec(-s / betas[k]));
    out.z.push_back(z);
    S += lambdas[k];
    if (k + 1 < lambdas.size()) {
      double tau = lambdas[k + 1] / (S + lambdas[k + 1]);
      x = (1.0 - tau) * x + tau * z;
    }
  }
  return out;
}

namespace {

std::vector<double> tseng_lambdas(long iters) {
  std::vector<double> l(static_cast<size_t>(iters));
  double lam = 1.0;
  for (long k = 0; k < iters; ++k) {
    l[static_cast<size_t>(k)] = lam;
    lam = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lam * lam));
  }
  return l;
}

}  // namespace

ApgResult tseng_second_apg(const Problem& problem, const Vec& x0, double L, long iters) {
  const std::vector<double> lam = tseng_lambdas(iters);
  ApgResult out;
  Vec x = x0;
  Vec z = x0 - (lam[0] / L) * problem.query(x0).slope;
  Vec xhat = z;
  double S = lam[0];
  out.x.push_back(x);
  out.z.push_back(z);
  out.xhat.push_back(xhat);
  for (long k = 1; k < iters; ++k) {
    double tau = lam[static_cast<size_t>(k)] / (S + lam[static_cast<size_t>(k)]);
    x = (1.0 - tau) * xhat + tau * z;
    z = z - (lam[static_cast<size_t>(k)] / L) * problem.query(x).slope;
    xhat = (1.0 - tau) * xhat + tau * z;
    S += lam[static_cast<size_t>(k)];
    out.x.push_back(x);
    out.z.push_back(z);
    out.xhat.push_back(xhat);
  }
  return out;
}

ApgResult tseng_third_apg(const Problem& problem, const Vec& x0, double L, long iters) {
  const std::vector<double> lam = tseng_lambdas(iters);
  ApgResult out;
  Vec x = x0;
  Vec s = lam[0] * problem.query(x0).slope;
  Vec z = x0 - s / L;
  Vec xhat = z;
  double S = lam[0];
  out.x.push_back(x);
  out.z.push_back(z);
  out.xhat.push_back(xhat);
  for (long k = 1; k < iters; ++k) {
    double tau = lam[static_cast<size_t>(k)] / (S + lam[static_cast<size_t>(k)]);
    x = (1.0 - tau) * xhat + tau * z;
    s += lam[static_cast<size_t>(k)] * problem.query(x).slope;
    z = x0 - s / L;
    xhat = (1.0 - tau) * xhat + tau * z;
    S += lam[static_cast<size_t>(k)];
    out.x.push_back(x);
    out.z.push_back(z);
    out.xhat.push_back(xhat);
  }
  return out;
}

std::vector<Vec> gradient_descent(const Problem& problem, const Vec& x0, double L,
                                  long iters) {
  std::vector<Vec> xs;
  Vec x = x0;
  for (long k = 0; k < iters; ++k) {
    xs.push_back(x);
    x = x - problem.query(x).slope / L;
  }
  return xs;
}

}  // namespace reference

json SuiteReport::to_json() const {
  json checks = json::array();
  for (const CheckResult& c : this->checks)
    checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return json{{"suite", suite}, {"pass", pass()}, {"checks", checks}};
}

namespace {

void add(SuiteReport& report, const std::string& name, bool pass,
         const std::string& detail = "") {
  report.checks.push_back({name, pass, detail});
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double max_dev(const Vec& a, const Vec& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

std::vector<ProxSetup> standard_setups() {
  std::vector<ProxSetup> setups;
  setups.push_back(ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(6)));
  setups.push_back(ProxSetup::euclidean(
      FeasibleSet::box(Vec::Constant(5, -1.0), Vec::Constant(5, 2.0)), Vec::Zero(5)));
  {
    Vec c(4);
    c << 0.5, -0.25, 0.0, 1.0;
    setups.push_back(ProxSetup::euclidean(FeasibleSet::ball(c, 2.0), c));
  }
  {
    Vec x0 = Vec::Constant(5, 0.2);
    setups.push_back(ProxSetup::euclidean(FeasibleSet::simplex(), x0));
  }
  setups.push_back(ProxSetup::entropy_simplex(6));
  return setups;
}

SuiteReport suite_space(const VerifyOptions& opt) {
  SuiteReport report{"space", {}};
  const Tolerances& tols = default_tolerances();
  Rng rng(opt.seed);
  for (const ProxSetup& setup : standard_setups()) {
    const std::string id = setup_id(setup);
    double worst_sc = 0, worst_ld = 0, worst_split = 0, worst_opt = 0;
    bool x0_exact = true;
    for (int t = 0; t < opt.samples; ++t) {
      Vec z = sample_feasible(setup, rng);
      Vec x = sample_feasible(setup, rng);
      double xi = bregman(setup, z, x);
      worst_sc = std::min(worst_sc,
                          xi - 0.5 * setup.sigma() * (x - z).squaredNorm());
      worst_ld = std::min(worst_ld, d_value(setup, x) - l_d(setup, z, x));
      worst_split =
          std::max(worst_split, std::abs(l_d(setup, z, x) + xi - d_value(setup, x)));

      // prox optimality: F(x) >= F(z*) + beta xi(z*, x)
      Vec s(setup.dim());
      for (int i = 0; i < s.size(); ++i) s[i] = rng.normal();
      double beta = 0.5 + 2.0 * rng.uniform01();
      CompositeTerm psi = CompositeTerm::none();
      double w = 0;
      if (setup.geometry() == Geometry::Euclidean &&
          (setup.set().kind == SetKind::FreeSpace || setup.set().kind == SetKind::Box)) {
        psi = CompositeTerm::l1(0.3);
        w = 1.0 + rng.uniform01();
      }
      Vec zs = prox_argmin(setup, s, beta, psi, w);
      auto F = [&](const Vec& p) {
        return s.dot(p) + w * psi.value(p) + beta * d_value(setup, p);
      };
      worst_opt = std::min(worst_opt, F(x) - F(zs) - beta * bregman(setup, zs, x));
    }
    add(report, "strong-convexity/" + id, worst_sc >= -tols.identity, num(worst_sc));
    add(report, "l_d-minorant/" + id, worst_ld >= -tols.identity, num(worst_ld));
    add(report, "l_d+xi=d/" + id, worst_split <= tols.identity, num(worst_split));
    add(report, "prox-optimality/" + id, worst_opt >= -tols.residual_abs, num(worst_opt));
    Vec z0 = prox_argmin(setup, Vec::Zero(setup.dim()), 1.7, CompositeTerm::none(), 0.0);
    x0_exact = (z0 - setup.x0()).lpNorm<Eigen::Infinity>() == 0.0;
    add(report, "prox-at-zero-slope/" + id, x0_exact);
  }

  // dual-pairing inequality spot check (young's inequality route):
  // <lambda g, x - z> + beta xi(z,x) + ||lambda g||^2/(2 sigma beta) >= 0
  for (const ProxSetup& setup : standard_setups()) {
    double worst = 0;
    for (int t = 0; t < opt.samples; ++t) {
      Vec x = sample_feasible(setup, rng), z = sample_feasible(setup, rng);
      Vec g(setup.dim());
      for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
      double lambda = rng.uniform(-2.0, 2.0), beta = 0.2 + rng.uniform01();
      double gn = dual_norm(setup, Vec(lambda * g));
      double v = lambda * g.dot(x - z) + beta * bregman(setup, z, x) +
                 gn * gn / (2.0 * setup.sigma() * beta);
      worst = std::min(worst, v);
    }
    add(report, "pairing-inequality/" + setup_id(setup), worst >= -opt.tol, num(worst));
  }
  return report;
}

SuiteReport suite_oracle(const VerifyOptions& opt) {
  SuiteReport report{"oracle", {}};
  Rng rng(opt.seed + 1);
  struct Case {
    Problem problem;
    ProxSetup setup;
  };
  std::vector<Case> cases;
  cases.push_back({make_random_problem(ProblemVariant::MaxAffine, 6, 3),
                   ProxSetup::entropy_simplex(6)});
  cases.push_back({make_random_problem(ProblemVariant::Quadratic, 5, 4),
                   ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(5))});
  cases.push_back({make_random_problem(ProblemVariant::CompositeLasso, 5, 5),
                   ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(5))});
  {
    Problem q = make_random_problem(ProblemVariant::Quadratic, 5, 6);
    cases.push_back({Problem::inexact(std::move(q), 0.1, 99),
                     ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(5))});
  }
  for (const Case& c : cases) {
    double worst_lower = 0, worst_sandwich = 0;
    for (int t = 0; t < opt.samples; ++t) {
      Vec y = sample_feasible(c.setup, rng);
      Vec x = sample_feasible(c.setup, rng);
      OracleReply reply = c.problem.query(y);
      double lf = lower_model_value(reply, y, x, c.problem.composite());
      worst_lower = std::min(worst_lower, c.problem.true_value(x) - lf);
      if (reply.lipschitz) {
        double upper = lf + 0.5 * *reply.lipschitz * (x - y).squaredNorm() + reply.delta;
        worst_sandwich = std::min(worst_sandwich, upper - c.problem.true_value(x));
      }
    }
    add(report, "lower-bound/" + c.problem.id(), worst_lower >= -1e-10, num(worst_lower));
    if (!c.problem.nonsmooth_class())
      add(report, "sandwich/" + c.problem.id(), worst_sandwich >= -1e-10,
          num(worst_sandwich));
  }
  return report;
}

struct PropertyCase {
  Problem problem;
  ProxSetup setup;
};

std::vector<PropertyCase> property_cases() {
  std::vector<PropertyCase> cases;
  cases.push_back({make_random_problem(ProblemVariant::MaxAffine, 8, 21),
                   ProxSetup::entropy_simplex(8)});
  {
    ProblemGenOptions o;
    o.pieces = 6;
    cases.push_back({make_random_problem(ProblemVariant::MaxAffine, 5, 22, o),
                     ProxSetup::euclidean(
                         FeasibleSet::box(Vec::Constant(5, -1.5), Vec::Constant(5, 1.5)),
                         Vec::Zero(5))});
  }
  {
    ProblemGenOptions o;
    o.cond = 30;
    Vec x0 = Vec::Constant(6, 1.0 / 6);
    cases.push_back({make_random_problem(ProblemVariant::Quadratic, 6, 23, o),
                     ProxSetup::euclidean(FeasibleSet::simplex(), x0)});
  }
  return cases;
}

// Random MD/DA interleavings at random feasible test points; the framework
// conditions must hold for any of them.
bool run_property_trial(const PropertyCase& pc, std::uint64_t seed, int length,
                        int samples, double tol, double& worst2, double& worst3) {
  Rng rng(seed);
  const CompositeTerm psi = pc.problem.composite();
  std::vector<AuxState> states;
  std::vector<OracleReply> replies;
  std::vector<Vec> points;
  std::vector<double> lambdas, betas;
  double beta = 0.7 + rng.uniform01();
  states.push_back(aux_init(pc.setup, beta));
  for (int k = 0; k < length; ++k) {
    Vec x = sample_feasible(pc.setup, rng);
    OracleReply reply = pc.problem.query(x);
    double lambda = 0.2 + 1.5 * rng.uniform01();
    beta += rng.uniform01();  // non-decreasing
    ModelChoice m = (rng.next_u64() & 1) ? ModelChoice::DA : ModelChoice::MD;
    states.push_back(update_model(m, states.back(), pc.setup, psi, reply, x, lambda, beta));
    replies.push_back(std::move(reply));
    points.push_back(std::move(x));
    lambdas.push_back(lambda);
    betas.push_back(beta);
  }
  PropertyReport rep = check_property(pc.setup, psi, states, replies, points, lambdas,
                                      betas, samples, rng.next_u64());
  worst2 = std::min(worst2, rep.worst_cond2());
  worst3 = std::min(worst3, rep.worst_cond3());
  return rep.pass(tol);
}

SuiteReport suite_property(const VerifyOptions& opt) {
  SuiteReport report{"property", {}};
  int trial_count = 20;
  for (const PropertyCase& pc : property_cases()) {
    bool ok = true;
    double worst2 = 0, worst3 = 0;
    for (int t = 0; t < trial_count; ++t)
      ok = run_property_trial(pc, opt.seed + 100 + t, 12, opt.samples, opt.tol, worst2,
                              worst3) &&
           ok;
    add(report, "mixing/" + pc.problem.id() + "/" + setup_id(pc.setup), ok,
        "cond2=" + num(worst2) + " cond3=" + num(worst3));
  }

  // pure-MD updates satisfy the model recursion with equality
  {
    const PropertyCase pc = property_cases().front();
    Rng rng(opt.seed + 7);
    const CompositeTerm psi = pc.problem.composite();
    AuxState state = aux_init(pc.setup, 1.0);
    double worst = 0;
    double beta = 1.0;
    for (int k = 0; k < 10; ++k) {
      Vec x = sample_feasible(pc.setup, rng);
      OracleReply reply = pc.problem.query(x);
      beta += 0.3;
      AuxState next = update_md(state, pc.setup, psi, reply, x, 1.0, beta);
      for (int t = 0; t < 50; ++t) {
        Vec p = sample_feasible(pc.setup, rng);
        double lhs = next.evaluate(pc.setup, psi, p);
        double rhs = state.min_value + lower_model_value(reply, x, p, psi) +
                     beta * d_value(pc.setup, p) - state.beta * l_d(pc.setup, state.minimizer, p);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      state = next;
    }
    add(report, "md-update-equality", worst <= 1e-9, num(worst));
  }
  return report;
}

SuiteReport suite_beta_hat(const VerifyOptions& opt) {
  SuiteReport report{"beta_hat", {}};
  // recursion base cases
  add(report, "base-cases",
      beta_hat(-1) == 1.0 && beta_hat(0) == 1.0 && beta_hat(1) == 2.0 &&
          beta_hat(2) == 2.5 && std::abs(beta_hat(3) - 2.9) < 1e-15);

  // identity: bh(k) = sum_{i=-1}^{k-1} 1/bh(i)
  double inv_sum = 1.0;  // i = -1 term
  double worst_rel = 0;
  bool identity_ok = true;
  for (long k = 1; k <= opt.kmax; ++k) {
    inv_sum += 1.0 / beta_hat(k - 1);
    double rel = std::abs(beta_hat(k) - inv_sum) / beta_hat(k);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-9) identity_ok = false;
  }
  add(report, "identity", identity_ok, num(worst_rel));

  // bound: sqrt(2k+1) <= bh(k) <= 1/(1+sqrt(3)) + sqrt(2k+1) up to 10^6
  bool bound_ok = true;
  const double upper_off = 1.0 / (1.0 + std::sqrt(3.0));
  double bh = 1.0;
  for (long k = 0; k <= 1000000; ++k) {
    double root = std::sqrt(2.0 * k + 1.0);
    if (!(root <= bh && bh <= upper_off + root)) {
      bound_ok = false;
      break;
    }
    bh += 1.0 / bh;
  }
  add(report, "bound-to-1e6", bound_ok);

  // Tseng weights: S_k = lambda_k^2
  {
    Schedule ts = Schedule::tseng_lambda(1.0, 1.0);
    double S = 0;
    bool ok = true;
    double worst = 0;
    for (long k = 0; k < 200; ++k) {
      auto [lam, beta] = ts.next_params(k);
      S += lam;
      double rel = std::abs(S - lam * lam) / S;
      worst = std::max(worst, rel);
      if (rel > 1e-8) ok = false;
    }
    add(report, "tseng-weight-identity", ok, num(worst));
  }

  // step-condition feeds
  {
    Schedule cs = Schedule::classic_smooth(3.7, 1.0);
    Schedule fs = Schedule::fast_smooth(3.7, 1.0);
    bool ok = true;
    double S = 0;
    for (long k = 0; k < 100; ++k) {
      auto [lc, bc] = cs.next_params(k);
      ok = ok && (1.0 * (k == 0 ? cs.beta_init() : bc) / lc >= 3.7 * (1 - 1e-12));
      auto [lf, bf] = fs.next_params(k);
      S += lf;
      ok = ok && (1.0 * fs.beta_init() * S / (lf * lf) >= 3.7 * (1 - 1e-12));
    }
    add(report, "step-condition-feeds", ok);
  }
  return report;
}

SuiteReport suite_equivalence(const VerifyOptions& opt) {
  SuiteReport report{"equivalence", {}};
  const long iters = 500;

  // (a) subgrad_a + pure MD + beta == 1 on a Euclidean free space is the
  // classical subgradient iteration.
  {
    ProblemGenOptions o;
    o.pieces = 12;
    Problem problem = make_random_problem(ProblemVariant::L1Regression, 8, opt.seed + 11, o);
    ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(8));
    RunConfig config;
    config.method = MethodKind::SubgradA;
    config.schedule = Schedule::mdm_classic(0.1);
    config.mix = MixPolicy::pure_md();
    config.max_iters = iters;
    RunTrace trace = run_subgradient_a(problem, setup, config);
    std::vector<double> lambdas;
    for (long k = 0; k < iters; ++k) lambdas.push_back(config.schedule.next_params(k).first);
    auto ref = reference::projected_subgradient(problem, setup.x0(), lambdas);
    double dev = 0;
    for (long k = 0; k < iters; ++k)
      dev = std::max(dev, max_dev(trace.records[static_cast<size_t>(k)].x,
                                  ref[static_cast<size_t>(k)]));
    add(report, "subgrad_a=projected-subgradient", dev <= 1e-10, num(dev));
  }

  // (b) subgrad_b + pure DA is the double averaging recursion.
  {
    Problem problem = make_random_problem(ProblemVariant::MaxAffine, 10, opt.seed + 12);
    ProxSetup setup = ProxSetup::entropy_simplex(10);
    RunConfig config;
    config.method = MethodKind::SubgradB;
    config.schedule = Schedule::simple_averages(1.0);
    config.mix = MixPolicy::pure_da();
    config.max_iters = iters;
    RunTrace trace = run_subgradient_b(problem, setup, config);
    std::vector<double> lambdas, betas;
    for (long k = 0; k < iters; ++k) {
      auto [l, b] = config.schedule.next_params(k);
      lambdas.push_back(l);
      betas.push_back(b);
    }
    auto ref = reference::double_averaging_entropy(problem, 10, lambdas, betas);
    double dev = 0;
    for (long k = 0; k < iters; ++k) {
      dev = std::max(dev, max_dev(trace.records[static_cast<size_t>(k)].x,
                                  ref.x[static_cast<size_t>(k)]));
      dev = std::max(dev, max_dev(trace.records[static_cast<size_t>(k)].z,
                                  ref.z[static_cast<size_t>(k)]));
    }
    add(report, "subgrad_b+da=double-averaging", dev <= 1e-10, num(dev));
  }

  // (c)/(d) FGM with the Tseng weights matches the second/third APG methods.
  {
    ProblemGenOptions o;
    o.cond = 50;
    Problem problem = make_random_problem(ProblemVariant::Quadratic, 8, opt.seed + 13, o);
    ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(8));
    const double L = *problem.lipschitz();
    for (bool md : {true, false}) {
      RunConfig config;
      config.method = MethodKind::Fgm;
      config.schedule = Schedule::tseng_lambda(L, setup.sigma());
      config.mix = md ? MixPolicy::pure_md() : MixPolicy::pure_da();
      config.max_iters = iters;
      RunTrace trace = run_fgm(problem, setup, config);
      auto ref = md ? reference::tseng_second_apg(problem, setup.x0(), L, iters)
                    : reference::tseng_third_apg(problem, setup.x0(), L, iters);
      double dev = 0;
      for (long k = 0; k < iters; ++k) {
        const IterationRecord& r = trace.records[static_cast<size_t>(k)];
        dev = std::max(dev, max_dev(r.x, ref.x[static_cast<size_t>(k)]));
        dev = std::max(dev, max_dev(r.z, ref.z[static_cast<size_t>(k)]));
        dev = std::max(dev, max_dev(r.xhat, ref.xhat[static_cast<size_t>(k)]));
      }
      add(report, md ? "fgm+md=tseng-second-apg" : "fgm+da=tseng-third-apg", dev <= 1e-10,
          num(dev));
    }
  }

  // CGM + pure MD on a Euclidean free space is plain gradient descent.
  {
    ProblemGenOptions o;
    o.cond = 40;
    Problem problem = make_random_problem(ProblemVariant::Quadratic, 8, opt.seed + 14, o);
    ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(8));
    const double L = *problem.lipschitz();
    RunConfig config;
    config.method = MethodKind::Cgm;
    config.schedule = Schedule::classic_smooth(L, setup.sigma());
    config.mix = MixPolicy::pure_md();
    config.max_iters = iters;
    RunTrace trace = run_cgm(problem, setup, config);
    auto ref = reference::gradient_descent(problem, setup.x0(), L, iters);
    double dev = 0;
    for (long k = 0; k < iters; ++k)
      dev = std::max(dev, max_dev(trace.records[static_cast<size_t>(k)].x,
                                  ref[static_cast<size_t>(k)]));
    add(report, "cgm+md=gradient-descent", dev <= 1e-10, num(dev));
  }
  return report;
}

SuiteReport suite_rates(const VerifyOptions& opt) {
  SuiteReport report{"rates", {}};
  const long iters = 300;

  // non-smooth presets with simple averages on a known-optimum problem
  {
    Problem problem = make_random_problem(ProblemVariant::MaxAffine, 10, opt.seed + 31);
    ProxSetup setup = ProxSetup::entropy_simplex(10);
    OptimumInfo optimum = known_optimum(problem, setup.set());
    for (const char* name : {"dam", "extended_mdm", "double_averaging"}) {
      Preset p = preset(name);
      RunConfig config;
      config.method = p.method;
      config.mix = p.mix;
      config.schedule = Schedule::simple_averages(1.0);
      config.max_iters = iters;
      RunTrace trace = run(problem, setup, config);
      Certificate cert = certify(trace, setup, &problem, &optimum);
      add(report, std::string("certified/") + name, cert.all_pass());
    }
  }

  // smooth presets on a quadratic
  {
    ProblemGenOptions o;
    o.cond = 100;
    Problem problem = make_random_problem(ProblemVariant::Quadratic, 20, opt.seed + 32, o);
    ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(20));
    OptimumInfo optimum = known_optimum(problem, setup.set());
    const double L = *problem.lipschitz();
    for (const char* name : {"primal_gradient", "dual_gradient", "fgm_md", "fgm_da"}) {
      Preset p = preset(name);
      RunConfig config;
      config.method = p.method;
      config.mix = p.mix;
      config.schedule = (p.method == MethodKind::Cgm)
                            ? Schedule::classic_smooth(L, setup.sigma())
                            : Schedule::fast_smooth(L, setup.sigma());
      config.max_iters = iters;
      RunTrace trace = run(problem, setup, config);
      Certificate cert = certify(trace, setup, &problem, &optimum);
      add(report, std::string("certified/") + name, cert.all_pass());
    }
  }

  // re-certification is deterministic
  {
    Problem problem = make_random_problem(ProblemVariant::MaxAffine, 6, opt.seed + 33);
    ProxSetup setup = ProxSetup::entropy_simplex(6);
    OptimumInfo optimum = known_optimum(problem, setup.set());
    RunConfig config;
    config.method = MethodKind::SubgradA;
    config.mix = MixPolicy::pure_da();
    config.schedule = Schedule::simple_averages(1.0);
    config.max_iters = 50;
    RunTrace trace = run(problem, setup, config);
    json a, b;
    to_json(a, certify(trace, setup, &problem, &optimum));
    to_json(b, certify(trace, setup, &problem, &optimum));
    add(report, "certify-deterministic", a == b);
  }
  return report;
}

}  // namespace

RunTrace corrupt_trace(const RunTrace& trace, std::uint64_t seed) {
  Rng rng(seed);
  RunTrace mutated = trace;
  const size_t k = static_cast<size_t>(rng.uniform_int(static_cast<int>(trace.records.size())));
  IterationRecord& r = mutated.records[k];
  const double factor = rng.next_u64() & 1 ? 1.1 : 0.9;
  switch (rng.uniform_int(4)) {
    case 0:
      r.lambda *= factor;
      break;
    case 1:
      r.beta *= factor;
      break;
    case 2:
      r.reply_slope *= factor;
      break;
    default:
      if (r.z.cwiseAbs().maxCoeff() == 0.0)
        r.z.array() += 0.1;
      else
        r.z *= factor;
      break;
  }
  return mutated;
}

namespace {

SuiteReport suite_mutation(const VerifyOptions& opt) {
  SuiteReport report{"mutation", {}};
  struct Scenario {
    Problem problem;
    ProxSetup setup;
    RunConfig config;
  };
  std::vector<Scenario> scenarios;
  {
    Scenario s{make_random_problem(ProblemVariant::MaxAffine, 8, opt.seed + 41),
               ProxSetup::entropy_simplex(8),
               {}};
    s.config.method = MethodKind::SubgradA;
    s.config.mix = MixPolicy::pure_da();
    s.config.schedule = Schedule::simple_averages(1.0);
    s.config.max_iters = 40;
    scenarios.push_back(std::move(s));
  }
  {
    ProblemGenOptions o;
    o.cond = 25;
    Scenario s{make_random_problem(ProblemVariant::Quadratic, 6, opt.seed + 42, o),
               ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(6)),
               {}};
    s.config.method = MethodKind::Fgm;
    s.config.mix = MixPolicy::pure_da();
    s.config.schedule = Schedule::fast_smooth(*s.problem.lipschitz(), 1.0);
    s.config.max_iters = 40;
    scenarios.push_back(std::move(s));
  }
  int caught = 0, total = 0;
  for (size_t si = 0; si < scenarios.size(); ++si) {
    const Scenario& s = scenarios[si];
    OptimumInfo optimum = known_optimum(s.problem, s.setup.set());
    RunTrace trace = run(s.problem, s.setup, s.config);
    Certificate clean = certify(trace, s.setup, &s.problem, &optimum);
    add(report, "clean-trace-passes/" + std::to_string(si), clean.all_pass());
    for (int m = 0; m < 10; ++m) {
      RunTrace bad = corrupt_trace(trace, opt.seed + 1000 * (si + 1) + m);
      Certificate cert = certify(bad, s.setup, &s.problem, &optimum);
      ++total;
      if (!cert.all_pass()) ++caught;
    }
  }
  add(report, "corruptions-caught", caught == total,
      std::to_string(caught) + "/" + std::to_string(total));
  return report;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"space", "oracle", "property", "beta_hat", "equivalence", "rates", "mutation"};
}

SuiteReport run_suite(const std::string& name, const VerifyOptions& options) {
  if (name == "space") return suite_space(options);
  if (name == "oracle") return suite_oracle(options);
  if (name == "property") return suite_property(options);
  if (name == "beta_hat") return suite_beta_hat(options);
  if (name == "equivalence") return suite_equivalence(options);
  if (name == "rates") return suite_rates(options);
  if (name == "mutation") return suite_mutation(options);
  throw std::invalid_argument("unknown suite " + name);
}

}  // namespace fom
