#include <doctest.h>

#include <cmath>

#include "fom/oracle.hpp"

using namespace fom;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Problem two_piece_max() {
  Mat A(2, 2);
  A << 1, 0, 0, 1;
  return Problem::max_affine(A, Vec::Zero(2));
}

}  // namespace

TEST_CASE("max_affine query picks the active piece, lowest index on ties") {
  Problem p = two_piece_max();
  OracleReply r = p.query(vec2(2, 1));
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(r.slope[0] == 1.0);
  CHECK(r.slope[1] == 0.0);
  CHECK(!r.lipschitz.has_value());
  CHECK(r.delta == 0.0);

  // exact tie resolves to the first row
  OracleReply tie = p.query(vec2(1, 1));
  CHECK(tie.slope[0] == 1.0);
  CHECK(tie.slope[1] == 0.0);

  CHECK(p.true_value(vec2(2, 1)) == doctest::Approx(2.0));
}

TEST_CASE("quadratic oracle") {
  Mat A = Mat::Identity(2, 2);
  Problem p = Problem::quadratic(A, Vec::Zero(2));
  Vec y = vec2(0.5, -1.5);
  OracleReply r = p.query(y);
  CHECK(r.value == doctest::Approx(0.5 * y.squaredNorm()));
  CHECK((r.slope - y).norm() == doctest::Approx(0.0));
  CHECK(*r.lipschitz == doctest::Approx(1.0));
  CHECK(p.true_value(Vec::Zero(2)) == 0.0);

  Mat bad(2, 2);
  bad << 1, 0, 0, -1;
  CHECK_THROWS_AS(Problem::quadratic(bad, Vec::Zero(2)), std::invalid_argument);
}

TEST_CASE("lower_model_value") {
  Mat A = Mat::Identity(2, 2);
  Problem p = Problem::quadratic(A, Vec::Zero(2));
  Vec y = vec2(1, 0);
  OracleReply r = p.query(y);
  CHECK(lower_model_value(r, y, y, p.composite()) == doctest::Approx(r.value));
  CHECK(lower_model_value(r, y, Vec::Zero(2), p.composite()) == doctest::Approx(-0.5));
}

TEST_CASE("composite lasso oracle carries the l1 term") {
  Mat A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  Vec b(3);
  b << 1, -1, 0.5;
  Problem p = Problem::composite_lasso(A, b, 0.3);
  CHECK(p.composite().is_l1());
  Vec x = vec2(0.7, -0.2);
  double direct = 0.5 * (A * x - b).squaredNorm() + 0.3 * x.lpNorm<1>();
  CHECK(p.true_value(x) == doctest::Approx(direct).epsilon(1e-14));

  Rng rng(2);
  Vec y = vec2(0.1, 0.4);
  OracleReply r = p.query(y);
  CHECK(r.has_composite);
  // declared Lipschitz constant dominates the curvature: sandwich on samples
  for (int t = 0; t < 1000; ++t) {
    Vec q = vec2(2 * rng.normal(), 2 * rng.normal());
    double lf = lower_model_value(r, y, q, p.composite());
    CHECK(p.true_value(q) >= lf - 1e-10);
    CHECK(p.true_value(q) <=
          lf + 0.5 * *r.lipschitz * (q - y).squaredNorm() + r.delta + 1e-10);
  }
}

TEST_CASE("l1 regression subgradient validity") {
  Mat A(3, 2);
  A << 2, 1, -1, 0.5, 0, 1;
  Vec b(3);
  b << 0.3, -0.2, 1.0;
  Problem p = Problem::l1_regression(A, b);
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    Vec y = vec2(2 * rng.normal(), 2 * rng.normal());
    Vec x = vec2(2 * rng.normal(), 2 * rng.normal());
    OracleReply r = p.query(y);
    CHECK(r.value == doctest::Approx(p.true_value(y)).epsilon(1e-13));
    CHECK(p.true_value(x) >= r.value + r.slope.dot(x - y) - 1e-10);
  }
}

TEST_CASE("inexact oracle: deterministic replies satisfying the two-sided model") {
  ProblemGenOptions o;
  o.cond = 10;
  Problem base = make_random_problem(ProblemVariant::Quadratic, 4, 42, o);
  Problem p = Problem::inexact(base, 0.1, 7);
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    Vec y(4), x(4);
    for (int i = 0; i < 4; ++i) {
      y[i] = rng.normal();
      x[i] = rng.normal();
    }
    OracleReply r = p.query(y);
    CHECK(r.delta == doctest::Approx(0.1));
    double lf = lower_model_value(r, y, x, p.composite());
    CHECK(p.true_value(x) >= lf - 1e-10);
    CHECK(p.true_value(x) <= lf + 0.5 * *r.lipschitz * (x - y).squaredNorm() + r.delta + 1e-10);
    // reproducible
    OracleReply r2 = p.query(y);
    CHECK(r2.value == r.value);
  }
}

TEST_CASE("known optimum: unconstrained quadratic") {
  Mat A = Mat::Identity(2, 2);
  Problem p = Problem::quadratic(A, vec2(1, 2));
  OptimumInfo info = known_optimum(p, FeasibleSet::free_space());
  REQUIRE(info.x_star.has_value());
  CHECK((*info.x_star - vec2(1, 2)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(*info.f_star == doctest::Approx(-2.5));
}

TEST_CASE("known optimum: max_affine over the simplex via the exact LP") {
  Mat A(2, 2);
  A << 1, 0, 0, 1;
  Problem p = Problem::max_affine(A, Vec::Zero(2));
  OptimumInfo info = known_optimum(p, FeasibleSet::simplex());
  REQUIRE(info.x_star.has_value());
  CHECK((*info.x_star - vec2(0.5, 0.5)).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(*info.f_star == doctest::Approx(0.5));
}

TEST_CASE("LP reference beats a dense grid on random simplex instances") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    ProblemGenOptions o;
    o.pieces = 5;
    Problem p = make_random_problem(ProblemVariant::MaxAffine, 3, seed, o);
    OptimumInfo info = known_optimum(p, FeasibleSet::simplex());
    REQUIRE(info.f_star.has_value());
    CHECK(p.true_value(*info.x_star) == doctest::Approx(*info.f_star).epsilon(1e-12));
    const int grid = 200;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j + i <= grid; ++j) {
        Vec x(3);
        x << double(i) / grid, double(j) / grid, double(grid - i - j) / grid;
        best = std::min(best, p.true_value(x));
      }
    CHECK(*info.f_star <= best + 1e-9);
    CHECK(*info.f_star >= best - 0.1);  // grid resolution slack
  }
}

TEST_CASE("known optimum: lasso reference satisfies the stationarity conditions") {
  Problem p = make_random_problem(ProblemVariant::CompositeLasso, 5, 12);
  OptimumInfo info = known_optimum(p, FeasibleSet::free_space());
  REQUIRE(info.x_star.has_value());
  const Mat& A = p.matrix();
  const Vec& b = p.rhs();
  const double w = p.composite().weight;
  Vec grad = A.transpose() * (A * *info.x_star - b);
  for (int i = 0; i < grad.size(); ++i) {
    if ((*info.x_star)[i] != 0.0)
      CHECK(std::abs(grad[i] + w * ((*info.x_star)[i] > 0 ? 1 : -1)) <= 1e-9);
    else
      CHECK(std::abs(grad[i]) <= w + 1e-9);
  }
  CHECK(*info.f_star == doctest::Approx(p.true_value(*info.x_star)).epsilon(1e-12));
}

TEST_CASE("no reference optimum is a valid answer") {
  Problem p = make_random_problem(ProblemVariant::MaxAffine, 3, 4);
  OptimumInfo info = known_optimum(p, FeasibleSet::free_space());
  CHECK(!info.x_star.has_value());
  CHECK(!info.f_star.has_value());
}

TEST_CASE("problem json round trip preserves oracle replies") {
  std::vector<Problem> problems;
  problems.push_back(make_random_problem(ProblemVariant::MaxAffine, 4, 5));
  problems.push_back(make_random_problem(ProblemVariant::Quadratic, 4, 6));
  problems.push_back(make_random_problem(ProblemVariant::CompositeLasso, 4, 7));
  problems.push_back(
      Problem::inexact(make_random_problem(ProblemVariant::Quadratic, 4, 8), 0.05, 3));
  Rng rng(20);
  for (const Problem& p : problems) {
    nlohmann::json j;
    to_json(j, p);
    Problem back = problem_from_json(j);
    for (int t = 0; t < 10; ++t) {
      Vec y(4);
      for (int i = 0; i < 4; ++i) y[i] = rng.normal();
      OracleReply a = p.query(y), b = back.query(y);
      CHECK(a.value == b.value);
      CHECK((a.slope - b.slope).lpNorm<Eigen::Infinity>() == 0.0);
      CHECK(p.true_value(y) == back.true_value(y));
    }
  }
}
