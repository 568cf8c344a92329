#include <doctest.h>

#include <cmath>

#include "fom/auxfunc.hpp"

using namespace fom;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

OracleReply affine_reply(double value, Vec slope) {
  OracleReply r;
  r.value = value;
  r.slope = std::move(slope);
  return r;
}

}  // namespace

TEST_CASE("init state") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  AuxState s = aux_init(eu, 1.0);
  CHECK(s.min_value == 0.0);
  CHECK((s.minimizer - eu.x0()).norm() == 0.0);
  CHECK(s.step_index == -1);

  ProxSetup en = ProxSetup::entropy_simplex(4);
  AuxState se = aux_init(en, 2.0);
  CHECK((se.minimizer - Vec::Constant(4, 0.25)).lpNorm<Eigen::Infinity>() <= 1e-15);

  // the initial function is beta * d
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    Vec x = sample_feasible(en, rng);
    CHECK(se.evaluate(en, CompositeTerm::none(), x) ==
          doctest::Approx(2.0 * d_value(en, x)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(aux_init(eu, 0.0), std::invalid_argument);
}

TEST_CASE("first mirror-descent step on a free space is a subgradient step") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  AuxState s = aux_init(eu, 1.0);
  Vec g = vec2(0.3, -0.8);
  const double lambda = 1.7;
  AuxState next =
      update_md(s, eu, CompositeTerm::none(), affine_reply(0.4, g), eu.x0(), lambda, 1.0);
  CHECK((next.minimizer - Vec(-lambda * g)).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("md update matches its defining recursion on samples") {
  ProxSetup en = ProxSetup::entropy_simplex(5);
  CompositeTerm psi = CompositeTerm::none();
  Rng rng(3);
  AuxState state = aux_init(en, 1.0);
  double beta = 1.0;
  for (int step = 0; step < 5; ++step) {
    Vec xn = sample_feasible(en, rng);
    Vec g(5);
    for (int i = 0; i < 5; ++i) g[i] = rng.normal();
    OracleReply reply = affine_reply(rng.normal(), g);
    double lambda = 0.5 + rng.uniform01();
    double beta_next = beta + rng.uniform01();
    AuxState next = update_md(state, en, psi, reply, xn, lambda, beta_next);
    for (int t = 0; t < 100; ++t) {
      Vec x = sample_feasible(en, rng);
      double expect = state.min_value + lambda * lower_model_value(reply, xn, x, psi) +
                      beta_next * d_value(en, x) - beta * l_d(en, state.minimizer, x);
      CHECK(next.evaluate(en, psi, x) == doctest::Approx(expect).epsilon(1e-10));
    }
    state = next;
    beta = beta_next;
  }
}

TEST_CASE("with constant beta and x_next = z_k the md step is the classical one") {
  // psi_{k+1}(x) - min psi_k = lambda l_f(x_{k+1}; x) + xi(x_{k+1}, x)
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(3));
  CompositeTerm psi = CompositeTerm::none();
  Rng rng(9);
  AuxState state = aux_init(eu, 1.0);
  for (int step = 0; step < 4; ++step) {
    Vec xn = state.minimizer;
    Vec g(3);
    for (int i = 0; i < 3; ++i) g[i] = rng.normal();
    OracleReply reply = affine_reply(rng.normal(), g);
    double lambda = 0.3 + rng.uniform01();
    AuxState next = update_md(state, eu, psi, reply, xn, lambda, 1.0);
    for (int t = 0; t < 50; ++t) {
      Vec x = sample_feasible(eu, rng);
      double lhs = next.evaluate(eu, psi, x) - state.min_value;
      double rhs = lambda * lower_model_value(reply, xn, x, psi) + bregman(eu, xn, x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
    state = next;
  }
}

TEST_CASE("pure dual-averaging accumulates every linearization") {
  ProxSetup en = ProxSetup::entropy_simplex(4);
  CompositeTerm psi = CompositeTerm::none();
  Rng rng(5);
  AuxState state = aux_init(en, 1.0);
  double beta = 1.0;
  double acc_const = 0;
  Vec acc_lin = Vec::Zero(4);
  std::vector<std::tuple<OracleReply, Vec, double>> steps;
  for (int k = 0; k < 6; ++k) {
    Vec xn = sample_feasible(en, rng);
    Vec g(4);
    for (int i = 0; i < 4; ++i) g[i] = rng.normal();
    OracleReply reply = affine_reply(rng.normal(), g);
    double lambda = 0.2 + rng.uniform01();
    beta += 0.4;
    state = update_da(state, en, psi, reply, xn, lambda, beta);
    acc_const += lambda * (reply.value - g.dot(xn));
    acc_lin += lambda * g;
    for (int t = 0; t < 40; ++t) {
      Vec x = sample_feasible(en, rng);
      double expect = acc_const + acc_lin.dot(x) + beta * d_value(en, x);
      CHECK(state.evaluate(en, psi, x) == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("single da step equals single md step from the start") {
  for (bool entropy : {false, true}) {
    ProxSetup setup = entropy
                          ? ProxSetup::entropy_simplex(4)
                          : ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(4));
    CompositeTerm psi = CompositeTerm::none();
    Rng rng(13);
    AuxState init = aux_init(setup, 1.0);
    Vec xn = sample_feasible(setup, rng);
    Vec g(4);
    for (int i = 0; i < 4; ++i) g[i] = rng.normal();
    OracleReply reply = affine_reply(0.2, g);
    AuxState md = update_md(init, setup, psi, reply, xn, 0.9, 1.5);
    AuxState da = update_da(init, setup, psi, reply, xn, 0.9, 1.5);
    CHECK((md.minimizer - da.minimizer).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(md.min_value == doctest::Approx(da.min_value).epsilon(1e-12));
  }
}

TEST_CASE("update preconditions") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  AuxState s = aux_init(eu, 1.0);
  OracleReply r = affine_reply(0.0, vec2(1, 1));
  CHECK_THROWS_AS(update_da(s, eu, CompositeTerm::none(), r, eu.x0(), 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_md(s, eu, CompositeTerm::none(), r, eu.x0(), 1.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("minimize closed forms") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  AuxState s = aux_init(eu, 2.0);
  auto [z0, v0] = minimize(s, eu, CompositeTerm::none());
  CHECK((z0 - eu.x0()).norm() == 0.0);
  CHECK(v0 == 0.0);

  Vec g = vec2(1.0, -0.5);
  AuxState da = update_da(s, eu, CompositeTerm::none(), affine_reply(0.1, g), eu.x0(), 0.8, 2.0);
  auto [z1, v1] = minimize(da, eu, CompositeTerm::none());
  CHECK((z1 - Vec(eu.x0() - (0.8 / 2.0) * g)).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK(v1 == doctest::Approx(da.min_value));
}

TEST_CASE("composite weights: md resets, da accumulates") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  CompositeTerm psi = CompositeTerm::l1(0.4);
  OracleReply r = affine_reply(0.3, vec2(0.2, 0.1));
  r.has_composite = true;
  AuxState s = aux_init(eu, 1.0);
  AuxState da1 = update_da(s, eu, psi, r, eu.x0(), 0.7, 1.0);
  AuxState da2 = update_da(da1, eu, psi, r, eu.x0(), 0.5, 1.0);
  CHECK(da2.psi_weight == doctest::Approx(1.2));
  AuxState md = update_md(da2, eu, psi, r, eu.x0(), 0.25, 1.0);
  CHECK(md.psi_weight == doctest::Approx(0.25));
}

TEST_CASE("check_property over a mixed sequence") {
  ProxSetup en = ProxSetup::entropy_simplex(4);
  CompositeTerm psi = CompositeTerm::none();
  Rng rng(31);
  std::vector<AuxState> states{aux_init(en, 1.0)};
  std::vector<OracleReply> replies;
  std::vector<Vec> points;
  std::vector<double> lambdas, betas;
  double beta = 1.0;
  for (int k = 0; k < 10; ++k) {
    Vec xn = sample_feasible(en, rng);
    Vec g(4);
    for (int i = 0; i < 4; ++i) g[i] = rng.normal();
    replies.push_back(affine_reply(rng.normal(), g));
    points.push_back(xn);
    double lambda = 0.2 + rng.uniform01();
    beta += 0.2 * rng.uniform01();
    ModelChoice m = (k % 3 == 0) ? ModelChoice::MD : ModelChoice::DA;
    states.push_back(
        update_model(m, states.back(), en, psi, replies.back(), xn, lambda, beta));
    lambdas.push_back(lambda);
    betas.push_back(beta);
  }
  PropertyReport rep = check_property(en, psi, states, replies, points, lambdas, betas,
                                      100, 77);
  CHECK(rep.init_min_ok);
  CHECK(rep.init_minimizer_ok);
  CHECK(rep.pass(1e-9));
  for (bool exact : rep.cond3_exact) CHECK(exact);

  // strong-convexity growth of every psi_k around its minimizer
  for (size_t i = 1; i < states.size(); ++i) {
    for (int t = 0; t < 30; ++t) {
      Vec x = sample_feasible(en, rng);
      CHECK(states[i].evaluate(en, psi, x) >=
            states[i].min_value + states[i].beta * bregman(en, states[i].minimizer, x) - 1e-9);
    }
  }
}

TEST_CASE("aux state json") {
  ProxSetup eu = ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2));
  AuxState s = aux_init(eu, 1.5);
  nlohmann::json j;
  to_json(j, s);
  CHECK(j.at("beta").get<double>() == 1.5);
  CHECK(j.at("step_index").get<long>() == -1);
}
