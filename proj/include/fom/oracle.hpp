#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fom/space.hpp"

namespace fom {

// One first-order query: the data of the lower convex approximation
//   l_f(y; x) = value + <slope, x - y>  (+ Psi(x) when has_composite)
// together with the structured-class constants at y.
struct OracleReply {
  double value = 0;                  // model value at y
  Vec slope;                         // subgradient / gradient of the smooth part
  std::optional<double> lipschitz;   // L(y); absent for the non-smooth class
  double delta = 0;                  // delta(y) >= 0
  bool has_composite = false;        // l_f carries the composite term
};

struct OptimumInfo {
  std::optional<Vec> x_star;
  std::optional<double> f_star;
  std::optional<double> d_star_upper;  // some D >= d(x*)
};

enum class ProblemVariant { MaxAffine, L1Regression, Quadratic, CompositeLasso, InexactWrapper };

// Convex objective with an exact evaluator and a first-order oracle.
// Immutable after construction; query() is pure (the inexact wrapper derives
// its perturbation deterministically from (seed, y)).
class Problem {
 public:
  // f(x) = max_i (<a_i, x> + b_i); rows of A are the affine pieces.
  static Problem max_affine(Mat A, Vec b);
  // f(x) = ||Ax - b||_1 with sign-pattern subgradients.
  static Problem l1_regression(Mat A, Vec b);
  // f(x) = 0.5 x'Ax - <b, x>, A symmetric positive semidefinite.
  static Problem quadratic(Mat A, Vec b);
  // f(x) = 0.5 ||Ax - b||^2 + w ||x||_1 with smooth part f0 and Psi = w||.||_1.
  static Problem composite_lasso(Mat A, Vec b, double w);
  // Smooth problem observed through an inexact oracle: the reported value is
  // shifted by -u*delta0, u in [0,1] drawn reproducibly from (seed, y); the
  // slope is exact, so the two-sided model inequality holds with (L, delta0).
  static Problem inexact(Problem smooth_base, double delta0, std::uint64_t seed);

  ProblemVariant variant() const { return variant_; }
  int dim() const { return dim_; }
  bool nonsmooth_class() const {
    return variant_ == ProblemVariant::MaxAffine || variant_ == ProblemVariant::L1Regression;
  }
  // Composite term carried by l_f (weighted l1 for the lasso; none otherwise).
  const CompositeTerm& composite() const { return composite_; }
  // Global Lipschitz constant of the smooth part, when defined.
  std::optional<double> lipschitz() const { return lipschitz_; }
  std::string id() const;

  OracleReply query(const Vec& y) const;
  double true_value(const Vec& x) const;

  const Mat& matrix() const { return A_; }
  const Vec& rhs() const { return b_; }

  // inexact-wrapper introspection (null/zero for other variants)
  const Problem* base() const { return base_.get(); }
  double delta0() const { return delta0_; }
  std::uint64_t perturbation_seed() const { return seed_; }

 private:
  Problem() = default;
  ProblemVariant variant_ = ProblemVariant::Quadratic;
  int dim_ = 0;
  Mat A_;
  Vec b_;
  double l1_weight_ = 0;
  CompositeTerm composite_;
  std::optional<double> lipschitz_;
  // inexact wrapper state
  std::shared_ptr<const Problem> base_;
  double delta0_ = 0;
  std::uint64_t seed_ = 0;
};

double lower_model_value(const OracleReply& reply, const Vec& y, const Vec& x,
                         const CompositeTerm& psi);

// Exact reference optimum where one is computable: unconstrained quadratic
// via a linear solve, max-affine over the simplex via an exact LP vertex
// search, unconstrained lasso via coordinate descent run to 1e-12. Absent
// otherwise (a valid answer).
OptimumInfo known_optimum(const Problem& problem, const FeasibleSet& set);

struct ProblemGenOptions {
  int pieces = 10;          // max_affine / l1_regression rows
  double cond = 100.0;      // quadratic condition number
  double l1_weight = 0.1;   // lasso weight
  double delta0 = 1e-3;     // inexact oracle slack
};

Problem make_random_problem(ProblemVariant variant, int dim, std::uint64_t seed,
                            const ProblemGenOptions& options = {});

void to_json(nlohmann::json& j, const Problem& problem);
Problem problem_from_json(const nlohmann::json& j);

}  // namespace fom
