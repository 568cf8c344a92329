#include <doctest.h>

#include <cmath>

#include "fom/space.hpp"
#include "fom/tolerances.hpp"

using namespace fom;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProxSetup free2() { return ProxSetup::euclidean(FeasibleSet::free_space(), Vec::Zero(2)); }

}  // namespace

TEST_CASE("d_value basics") {
  ProxSetup eu = free2();
  CHECK(d_value(eu, eu.x0()) == 0.0);
  CHECK(d_value(eu, vec2(3, 4)) == doctest::Approx(12.5).epsilon(1e-15));

  ProxSetup en = ProxSetup::entropy_simplex(2);
  CHECK(d_value(en, vec2(1, 0)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(d_value(en, en.x0()) == doctest::Approx(0.0));
  CHECK_THROWS_AS(d_value(en, vec2(1.5, -0.5)), std::domain_error);
  CHECK_THROWS_AS(d_value(eu, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("d_grad basics") {
  ProxSetup eu = free2();
  CHECK((d_grad(eu, vec2(3, 4)) - vec2(3, 4)).norm() == 0.0);
  CHECK(d_grad(eu, eu.x0()).norm() == 0.0);

  ProxSetup en = ProxSetup::entropy_simplex(2);
  Vec g = d_grad(en, vec2(0.5, 0.5));
  CHECK(g[0] == doctest::Approx(1.0 + std::log(0.5)).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(g[0]));
  CHECK_THROWS_AS(d_grad(en, vec2(1, 0)), std::domain_error);
}

TEST_CASE("bregman distance") {
  ProxSetup eu = free2();
  CHECK(bregman(eu, vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bregman(eu, vec2(0.3, -2), vec2(0.3, -2)) == 0.0);

  // entropy Bregman distance is the KL divergence; independent evaluation
  ProxSetup en = ProxSetup::entropy_simplex(2);
  Vec z = vec2(0.5, 0.5), x = vec2(0.75, 0.25);
  double kl = 0;
  for (int i = 0; i < 2; ++i) kl += x[i] * std::log(x[i] / z[i]);
  CHECK(bregman(en, z, x) == doctest::Approx(kl).epsilon(1e-13));
  CHECK(bregman(en, z, x) == doctest::Approx(0.13081203594).epsilon(1e-9));
}

TEST_CASE("l_d linearization") {
  ProxSetup eu = free2();
  Vec z = vec2(1, 0);
  CHECK(l_d(eu, z, z) == doctest::Approx(d_value(eu, z)));
  CHECK(l_d(eu, z, vec2(0, 1)) == doctest::Approx(-0.5).epsilon(1e-15));

  // at the uniform point the entropy gradient is constant, so the
  // linearization vanishes identically on the simplex
  ProxSetup en = ProxSetup::entropy_simplex(2);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Vec x = sample_feasible(en, rng);
    CHECK(std::abs(l_d(en, en.x0(), x)) <= 1e-14);
  }
}

TEST_CASE("l_d + bregman = d, and minorant property") {
  Rng rng(17);
  std::vector<ProxSetup> setups;
  setups.push_back(free2());
  setups.push_back(ProxSetup::entropy_simplex(4));
  setups.push_back(ProxSetup::euclidean(
      FeasibleSet::box(Vec::Constant(3, -2.0), Vec::Constant(3, 1.0)), Vec::Zero(3)));
  for (const ProxSetup& s : setups) {
    for (int t = 0; t < 50; ++t) {
      Vec z = sample_feasible(s, rng), x = sample_feasible(s, rng);
      double d = d_value(s, x);
      CHECK(l_d(s, z, x) <= d + 1e-12);
      CHECK(std::abs(l_d(s, z, x) + bregman(s, z, x) - d) <= 1e-12);
      CHECK(bregman(s, z, x) >= 0.5 * s.sigma() * (x - z).squaredNorm() - 1e-12);
    }
  }
}

TEST_CASE("dual norms") {
  ProxSetup eu = free2();
  CHECK(dual_norm(eu, vec2(3, 4)) == doctest::Approx(5.0));
  ProxSetup en = ProxSetup::entropy_simplex(2);
  CHECK(dual_norm(en, vec2(3, -4)) == doctest::Approx(4.0));
  CHECK(dual_norm(eu, Vec::Zero(2)) == 0.0);
}

TEST_CASE("prox_argmin returns the prox-center at zero slope") {
  std::vector<ProxSetup> setups;
  setups.push_back(free2());
  setups.push_back(ProxSetup::entropy_simplex(3));
  setups.push_back(ProxSetup::euclidean(FeasibleSet::simplex(), Vec::Constant(4, 0.25)));
  for (const ProxSetup& s : setups) {
    Vec z = prox_argmin(s, Vec::Zero(s.dim()), 2.0, CompositeTerm::none(), 0.0);
    CHECK((z - s.x0()).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("entropy prox equals the normalized exponential, checked by grid") {
  ProxSetup en = ProxSetup::entropy_simplex(3);
  Vec s(3);
  s << 1.3, -0.4, 0.2;
  const double beta = 0.8;
  Vec z = prox_argmin(en, s, beta, CompositeTerm::none(), 0.0);

  // closed form
  Vec e = (-s / beta).array().exp();
  Vec expect = e / e.sum();
  CHECK((z - expect).lpNorm<Eigen::Infinity>() <= 1e-14);

  // dense grid minimization over the simplex must not find anything better
  auto objective = [&](const Vec& x) { return s.dot(x) + beta * d_value(en, x); };
  double best_grid = std::numeric_limits<double>::infinity();
  const int grid = 300;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j + i <= grid; ++j) {
      Vec x(3);
      x << double(i) / grid, double(j) / grid, double(grid - i - j) / grid;
      best_grid = std::min(best_grid, objective(x));
    }
  }
  CHECK(objective(z) <= best_grid + 1e-12);
}

TEST_CASE("l1 prox on a free space is coordinatewise soft-thresholding") {
  ProxSetup eu = free2();
  Vec s = vec2(-3.0, 0.5);
  Vec z = prox_argmin(eu, s, 1.0, CompositeTerm::l1(1.0), 1.0);
  CHECK(z[0] == doctest::Approx(2.0));
  CHECK(z[1] == doctest::Approx(0.0));

  // optimality against sampled points: F(x) >= F(z) + (beta/2)||x-z||^2
  auto F = [&](const Vec& x) {
    return s.dot(x) + x.lpNorm<1>() + 0.5 * (x - eu.x0()).squaredNorm();
  };
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Vec x = vec2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    CHECK(F(x) >= F(z) + 0.5 * (x - z).squaredNorm() - 1e-11);
  }
}

TEST_CASE("prox over box, ball, simplex stays optimal") {
  Rng rng(11);
  std::vector<ProxSetup> setups;
  setups.push_back(ProxSetup::euclidean(
      FeasibleSet::box(Vec::Constant(4, -0.5), Vec::Constant(4, 1.5)), Vec::Zero(4)));
  {
    Vec c = vec2(1.0, -1.0);
    setups.push_back(ProxSetup::euclidean(FeasibleSet::ball(c, 0.7), c));
  }
  setups.push_back(ProxSetup::euclidean(FeasibleSet::simplex(), Vec::Constant(5, 0.2)));
  for (const ProxSetup& setup : setups) {
    for (int t = 0; t < 30; ++t) {
      Vec s(setup.dim());
      for (int i = 0; i < s.size(); ++i) s[i] = rng.normal();
      double beta = 0.4 + rng.uniform01();
      bool l1_ok = setup.set().kind == SetKind::Box;
      CompositeTerm psi = l1_ok ? CompositeTerm::l1(0.2) : CompositeTerm::none();
      double w = l1_ok ? 1.3 : 0.0;
      Vec z = prox_argmin(setup, s, beta, psi, w);
      REQUIRE(setup.contains(z, 1e-12));
      auto F = [&](const Vec& p) {
        return s.dot(p) + w * psi.value(p) + beta * d_value(setup, p);
      };
      for (int u = 0; u < 40; ++u) {
        Vec x = sample_feasible(setup, rng);
        CHECK(F(x) >= F(z) + beta * bregman(setup, z, x) - 1e-9);
      }
    }
  }
}

TEST_CASE("prox error cases") {
  ProxSetup en = ProxSetup::entropy_simplex(3);
  CHECK_THROWS_AS(prox_argmin(en, Vec::Zero(3), 0.0, CompositeTerm::none(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(prox_argmin(en, Vec::Zero(3), -1.0, CompositeTerm::none(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(prox_argmin(en, Vec::Zero(3), 1.0, CompositeTerm::l1(1.0), 1.0),
                  UnsupportedSubproblem);
  ProxSetup ball = ProxSetup::euclidean(FeasibleSet::ball(Vec::Zero(2), 1.0), Vec::Zero(2));
  CHECK_THROWS_AS(prox_argmin(ball, Vec::Zero(2), 1.0, CompositeTerm::l1(1.0), 1.0),
                  UnsupportedSubproblem);
}

TEST_CASE("exact affine minimization over compact sets") {
  // box: pick the right bound per sign, honoring the l1 kink
  ProxSetup box = ProxSetup::euclidean(
      FeasibleSet::box(vec2(-1.0, -2.0), vec2(2.0, 3.0)), Vec::Zero(2));
  Vec v = vec2(1.5, -0.5);
  CHECK(min_affine_over_set(box, 0.25, v) ==
        doctest::Approx(0.25 + 1.5 * (-1.0) + (-0.5) * 3.0));
  // with l1 weight 1 > |v_1|, the second coordinate prefers the kink at 0
  CHECK(min_affine_over_set(box, 0.0, v, 1.0) == doctest::Approx(-0.5 + 0.0));

  ProxSetup simplex = ProxSetup::entropy_simplex(3);
  Vec c(3);
  c << 0.4, -0.2, 0.9;
  CHECK(min_affine_over_set(simplex, 1.0, c) == doctest::Approx(0.8));

  ProxSetup ball = ProxSetup::euclidean(FeasibleSet::ball(vec2(1, 1), 2.0), vec2(1, 1));
  CHECK(min_affine_over_set(ball, 0.0, vec2(3, 4)) == doctest::Approx(7.0 - 2.0 * 5.0));

  ProxSetup fs = free2();
  CHECK_THROWS_AS(min_affine_over_set(fs, 0.0, vec2(1, 0)), UnsupportedSubproblem);
}

TEST_CASE("setup json round trip") {
  std::vector<ProxSetup> setups;
  setups.push_back(ProxSetup::entropy_simplex(5));
  setups.push_back(ProxSetup::euclidean(
      FeasibleSet::box(Vec::Constant(3, -1.0), Vec::Constant(3, 4.0)), Vec::Ones(3)));
  setups.push_back(ProxSetup::euclidean(FeasibleSet::ball(vec2(0.5, 0), 2.0), vec2(0.5, 0)));
  for (const ProxSetup& s : setups) {
    nlohmann::json j;
    to_json(j, s);
    ProxSetup back = setup_from_json(j);
    CHECK(back.dim() == s.dim());
    CHECK(back.geometry() == s.geometry());
    CHECK(back.set().kind == s.set().kind);
    CHECK((back.x0() - s.x0()).lpNorm<Eigen::Infinity>() == 0.0);
  }
  // entropy only pairs with the simplex
  nlohmann::json bad{{"dim", 3}, {"geometry", "entropy"}, {"set", {{"kind", "box"}}}};
  CHECK_THROWS_AS(setup_from_json(bad), std::invalid_argument);
}
