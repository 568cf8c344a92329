#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fom/certify.hpp"
#include "fom/verify.hpp"

using namespace fom;

namespace {

// Minimal hand-built non-smooth trace skeleton for the C_k arithmetic tests.
RunTrace synthetic_nonsmooth_trace(const std::vector<double>& lambdas,
                                   const std::vector<double>& betas, double beta_init,
                                   const std::vector<double>& gnorms) {
  RunTrace t;
  t.method = MethodKind::SubgradA;
  t.beta_init = beta_init;
  t.sigma = 1.0;
  double S = 0;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    IterationRecord r;
    r.k = static_cast<long>(i);
    r.lambda = lambdas[i];
    r.beta = betas[i];
    S += lambdas[i];
    r.S = S;
    r.grad_dual_norm = gnorms[i];
    t.records.push_back(r);
  }
  return t;
}

struct DamRun {
  Problem problem;
  ProxSetup setup;
  OptimumInfo opt;
  RunTrace trace;
};

DamRun run_dam_on_simplex(long iters, std::uint64_t seed) {
  Problem problem = make_random_problem(ProblemVariant::MaxAffine, 8, seed);
  ProxSetup setup = ProxSetup::entropy_simplex(8);
  OptimumInfo opt = known_optimum(problem, setup.set());
  RunConfig c;
  c.method = MethodKind::SubgradA;
  c.schedule = Schedule::simple_averages(1.0);
  c.mix = MixPolicy::pure_da();
  c.max_iters = iters;
  RunTrace trace = run_subgradient_a(problem, setup, c);
  return {std::move(problem), std::move(setup), std::move(opt), std::move(trace)};
}

}  // namespace

TEST_CASE("relation choice per method") {
  CHECK(relation_for(MethodKind::SubgradA) == Relation::RHat);
  CHECK(relation_for(MethodKind::SubgradB) == Relation::R);
  CHECK(relation_for(MethodKind::Cgm) == Relation::RHatPrime);
  CHECK(relation_for(MethodKind::Fgm) == Relation::R);
}

TEST_CASE("non-smooth C_k arithmetic") {
  // zero subgradients accumulate nothing
  RunTrace zero = synthetic_nonsmooth_trace({1, 1, 1}, {1, 1, 1}, 1.0, {0, 0, 0});
  for (double c : compute_Ck_nonsmooth(zero)) CHECK(c == 0.0);

  // lambda = 1, gamma = 1, unit gradient norms: C_1 = (1/2)(1/1 + 1/1) = 1
  RunTrace t = synthetic_nonsmooth_trace({1, 1}, {beta_hat(0), beta_hat(1)}, 1.0, {1, 1});
  std::vector<double> C = compute_Ck_nonsmooth(t);
  CHECK(C[0] == doctest::Approx(0.5));
  CHECK(C[1] == doctest::Approx(1.0));
}

TEST_CASE("C_k of a real run matches an independent fold") {
  DamRun d = run_dam_on_simplex(10, 3);
  const RunTrace& t = d.trace;
  std::vector<double> C = compute_Ck(t);
  double acc = 0, prev_beta = t.beta_init;
  for (size_t i = 0; i < t.records.size(); ++i) {
    const IterationRecord& r = t.records[i];
    acc += r.lambda * r.lambda * r.grad_dual_norm * r.grad_dual_norm / (2.0 * prev_beta);
    prev_beta = r.beta;
    CHECK(C[i] == doctest::Approx(acc).epsilon(1e-14));
    CHECK(r.C == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("structured C_k recurrences") {
  RunTrace t;
  t.sigma = 1.0;
  t.beta_init = 1.0;
  const double delta = 0.25;
  double S = 0;
  for (long k = 0; k < 8; ++k) {
    IterationRecord r;
    r.k = k;
    r.lambda = 0.5 * (k + 1);
    S += r.lambda;
    r.S = S;
    r.delta = delta;
    t.records.push_back(r);
  }
  // CGM: sum of lambda_i * delta
  std::vector<double> cgm = compute_Ck_structured(t, MethodKind::Cgm);
  double acc = 0;
  for (size_t i = 0; i < t.records.size(); ++i) {
    acc += t.records[i].lambda * delta;
    CHECK(cgm[i] == doctest::Approx(acc));
  }
  // FGM with lambda_k = (k+1)/2: C_k = delta * sum S_i = delta (k+1)(k+2)(k+3)/12
  std::vector<double> fgm = compute_Ck_structured(t, MethodKind::Fgm);
  for (size_t i = 0; i < t.records.size(); ++i) {
    double k = static_cast<double>(i);
    CHECK(fgm[i] == doctest::Approx(delta * (k + 1) * (k + 2) * (k + 3) / 12.0));
  }
  // CGM with lambda = 1: C_k = (k+1) delta
  for (IterationRecord& r : t.records) r.lambda = 1.0;
  std::vector<double> flat = compute_Ck_structured(t, MethodKind::Cgm);
  for (size_t i = 0; i < flat.size(); ++i)
    CHECK(flat[i] == doctest::Approx((i + 1) * delta));
  CHECK_THROWS_AS(compute_Ck_structured(t, MethodKind::SubgradA), std::invalid_argument);
}

TEST_CASE("one-step relation residual on a 1-d problem") {
  // subgrad_a at k = 0: residual = min psi_0 + lambda^2 ||g||^2/(2 beta) - lambda f(x0) >= 0
  Mat A(1, 1);
  A << 2.0;  // f(x) = 2x + 1
  Problem p = Problem::max_affine(A, Vec::Constant(1, 1.0));
  ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(1));
  RunConfig c;
  c.method = MethodKind::SubgradA;
  c.schedule = Schedule::simple_averages(1.0);
  c.mix = MixPolicy::pure_md();
  c.max_iters = 1;
  RunTrace t = run_subgradient_a(p, setup, c);
  std::vector<double> C = compute_Ck(t);
  std::vector<double> res = check_relation(t, C, Relation::RHat);
  // by hand: min psi_0 = f(0) - lambda ||g||^2 / (2 beta) = 1 - 2; C_0 = 2
  CHECK(res[0] == doctest::Approx(t.records[0].min_psi + C[0] - 1.0));
  CHECK(res[0] >= -1e-12);
}

TEST_CASE("bound and rate certification of a dual-averaging run") {
  DamRun d = run_dam_on_simplex(300, 5);
  const RunTrace& t = d.trace;
  const ProxSetup& setup = d.setup;
  OptimumInfo& opt = d.opt;
  REQUIRE(opt.x_star.has_value());
  std::vector<double> C = compute_Ck(t);

  std::vector<double> res = check_relation(t, C, relation_for(t.method));
  for (double r : res) CHECK(r >= -1e-9);

  std::vector<BoundRow> bound = check_bound(t, setup, C, opt);
  for (const BoundRow& b : bound) {
    CHECK(b.pass);
    CHECK(b.gap <= b.bound + 1e-9);
  }

  auto env = envelope_from_trace(t);
  REQUIRE(env.has_value());
  CHECK(env->kind == RateEnvelope::Kind::SimpleAverages);
  std::vector<RateRow> rate = check_rate(t, setup, *env, opt);
  for (const RateRow& r : rate) CHECK(r.pass);

  // D-surrogate bound is weaker but must still pass
  OptimumInfo with_d = opt;
  with_d.d_star_upper = d_value(setup, *opt.x_star) + 0.5;
  std::vector<BoundRow> surrogate = check_bound(t, setup, C, with_d, true);
  for (size_t i = 0; i < surrogate.size(); ++i) {
    CHECK(surrogate[i].pass);
    CHECK(surrogate[i].bound >= bound[i].bound - 1e-12);
  }
}

TEST_CASE("gap at the optimum is nonpositive against any certified bound") {
  Mat A = Mat::Identity(2, 2);
  Problem p = Problem::quadratic(A, Vec::Zero(2));  // x* = 0 = x0
  ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  OptimumInfo opt = known_optimum(p, setup.set());
  RunConfig c;
  c.method = MethodKind::Cgm;
  c.schedule = Schedule::classic_smooth(1.0, 1.0);
  c.mix = MixPolicy::pure_md();
  c.max_iters = 3;
  RunTrace t = run_cgm(p, setup, c);
  std::vector<BoundRow> rows = check_bound(t, setup, compute_Ck(t), opt);
  for (const BoundRow& b : rows) {
    CHECK(b.gap <= 1e-15);
    CHECK(b.bound >= -1e-15);
  }
}

TEST_CASE("step conditions per schedule") {
  ProblemGenOptions o;
  o.cond = 60;
  Problem p = make_random_problem(ProblemVariant::Quadratic, 6, 11, o);
  ProxSetup setup = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(6));
  const double L = *p.lipschitz();
  {
    RunConfig c;
    c.method = MethodKind::Cgm;
    c.schedule = Schedule::classic_smooth(L, 1.0);
    c.mix = MixPolicy::pure_da();
    c.max_iters = 20;
    RunTrace t = run_cgm(p, setup, c);
    for (bool ok : check_step_conditions(t, MethodKind::Cgm)) CHECK(ok);
    // classic: equality sigma * beta / lambda == L
    CHECK(t.beta_init * 1.0 == doctest::Approx(L));
  }
  {
    RunConfig c;
    c.method = MethodKind::Fgm;
    c.schedule = Schedule::fast_smooth(L, 1.0);
    c.mix = MixPolicy::pure_md();
    c.max_iters = 20;
    RunTrace t = run_fgm(p, setup, c);
    double prev_beta = t.beta_init;
    for (const IterationRecord& r : t.records) {
      // sigma beta_{k-1} S_k / lambda_k^2 = L (k+2)/(k+1)
      double lhs = prev_beta * r.S / (r.lambda * r.lambda);
      CHECK(lhs == doctest::Approx(L * (r.k + 2.0) / (r.k + 1.0)).epsilon(1e-12));
      prev_beta = r.beta;
    }
    for (bool ok : check_step_conditions(t, MethodKind::Fgm)) CHECK(ok);
  }
  {
    RunConfig c;
    c.method = MethodKind::Fgm;
    c.schedule = Schedule::tseng_lambda(L, 1.0);
    c.mix = MixPolicy::pure_da();
    c.max_iters = 60;
    RunTrace t = run_fgm(p, setup, c);
    double prev_beta = t.beta_init;
    for (const IterationRecord& r : t.records) {
      double lhs = prev_beta * r.S / (r.lambda * r.lambda);
      CHECK(lhs == doctest::Approx(L).epsilon(1e-8));  // S_k = lambda_k^2
      prev_beta = r.beta;
    }
  }
}

TEST_CASE("corrupted traces are rejected") {
  DamRun d = run_dam_on_simplex(40, 9);
  const RunTrace& t = d.trace;
  const ProxSetup& setup = d.setup;
  REQUIRE(certify(t, setup, &d.problem, &d.opt).all_pass());

  // a flipped lambda sign must surface somewhere
  RunTrace flipped = t;
  flipped.records[20].lambda = -flipped.records[20].lambda;
  CHECK(!certify(flipped, setup, &d.problem, &d.opt).all_pass());

  // seeded 10% corruptions of lambda/beta/slope/z are all caught
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunTrace bad = corrupt_trace(t, seed * 7919 + 13);
    Certificate cert = certify(bad, setup, &d.problem, &d.opt);
    CHECK(!cert.all_pass());
  }
}

TEST_CASE("pairing inequality holds on data sampled from a real trace") {
  DamRun d = run_dam_on_simplex(60, 15);
  const RunTrace& t = d.trace;
  const ProxSetup& setup = d.setup;
  Rng rng(3);
  for (const IterationRecord& r : t.records) {
    Vec x = sample_feasible(setup, rng);
    double gn = dual_norm(setup, r.reply_slope);
    double v = r.lambda * r.reply_slope.dot(x - r.z) + r.beta * bregman(setup, r.z, x) +
               r.lambda * r.lambda * gn * gn / (2.0 * setup.sigma() * r.beta);
    CHECK(v >= -1e-9);
  }
}

TEST_CASE("csv writers emit the versioned schema") {
  DamRun d = run_dam_on_simplex(5, 21);
  const RunTrace& t = d.trace;
  Certificate cert = certify(t, d.setup, &d.problem, &d.opt);
  std::ostringstream trace_csv, cert_csv;
  write_trace_csv(trace_csv, t, cert);
  write_certificate_csv(cert_csv, t, cert);
  const std::string trace_text = trace_csv.str();
  const std::string cert_text = cert_csv.str();
  CHECK(trace_text.rfind("# fom-trace-csv v1\nk,f_xhat,gap,bound,residual,lambda,beta\n", 0) ==
        0);
  CHECK(cert_text.rfind("# fom-certificate-csv v1\nk,gap,bound,envelope,residual,pass\n", 0) ==
        0);
  // one line per record plus two header lines
  CHECK(std::count(trace_text.begin(), trace_text.end(), '\n') ==
        static_cast<long>(t.records.size()) + 2);
}
