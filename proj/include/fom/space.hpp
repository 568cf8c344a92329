#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <stdexcept>
#include <string>

#include "fom/rng.hpp"

namespace fom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when a requested Bregman subproblem has no supported closed-form
// solver for the (set, geometry, composite) combination.
struct UnsupportedSubproblem : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class SetKind { FreeSpace, Box, Ball, Simplex };

struct FeasibleSet {
  SetKind kind = SetKind::FreeSpace;
  Vec lower, upper;   // box bounds
  Vec center;         // ball center
  double radius = 0;  // ball radius

  static FeasibleSet free_space() { return {}; }
  static FeasibleSet box(Vec lo, Vec hi);
  static FeasibleSet ball(Vec center, double radius);
  static FeasibleSet simplex() {
    FeasibleSet s;
    s.kind = SetKind::Simplex;
    return s;
  }

  bool contains(const Vec& x, double tol = 1e-10) const;
  // Euclidean projection onto the set.
  Vec project(const Vec& x) const;
};

enum class Geometry { Euclidean, EntropySimplex };

// Additional convex term kept outside the smooth part of objectives (weighted
// l1, or an indicator already absorbed into the feasible set).
struct CompositeTerm {
  enum class Kind { None, L1, IndicatorAbsorbed };
  Kind kind = Kind::None;
  double weight = 0;

  static CompositeTerm none() { return {}; }
  static CompositeTerm l1(double w);

  double value(const Vec& x) const {
    return kind == Kind::L1 ? weight * x.lpNorm<1>() : 0.0;
  }
  bool is_l1() const { return kind == Kind::L1 && weight > 0; }
};

// Feasible set + prox-function geometry. Immutable after construction; all
// operations on it are pure, so instances can be shared freely across threads.
class ProxSetup {
 public:
  // d(x) = 0.5*||x - x0||_2^2, sigma = 1 w.r.t. l2. x0 must lie in the set.
  static ProxSetup euclidean(FeasibleSet set, Vec x0);
  // d(x) = ln(n) + sum_i x_i ln x_i on the standard simplex, sigma = 1 w.r.t.
  // l1; the prox-center is the uniform distribution.
  static ProxSetup entropy_simplex(int dim);

  int dim() const { return dim_; }
  const FeasibleSet& set() const { return set_; }
  Geometry geometry() const { return geometry_; }
  double sigma() const { return sigma_; }
  const Vec& x0() const { return x0_; }

  bool contains(const Vec& x, double tol = 1e-10) const { return set_.contains(x, tol); }
  void require_dim(const Vec& v, const char* what) const;

 private:
  ProxSetup() = default;
  int dim_ = 0;
  FeasibleSet set_;
  Geometry geometry_ = Geometry::Euclidean;
  double sigma_ = 1.0;
  Vec x0_;
};

double d_value(const ProxSetup& setup, const Vec& x);
Vec d_grad(const ProxSetup& setup, const Vec& x);

// xi(z, x) = d(x) - d(z) - <grad d(z), x - z>  >= (sigma/2) ||x - z||^2
double bregman(const ProxSetup& setup, const Vec& z, const Vec& x);

// Linearization of d at z: l_d(z; x) = d(z) + <grad d(z), x - z> = d(x) - xi(z, x)
double l_d(const ProxSetup& setup, const Vec& z, const Vec& x);

double dual_norm(const ProxSetup& setup, const Vec& s);

// argmin over the set of  <s, x> + psi_weight * Psi(x) + beta * d(x).
// Unique by strong convexity of d; solved in closed form (or O(n log n)).
Vec prox_argmin(const ProxSetup& setup, const Vec& s, double beta,
                const CompositeTerm& psi, double psi_weight);

// Exact minimum over the set of  c0 + <v, x> + l1_weight * ||x||_1.
// Supported for compact sets (box, simplex, ball; simplex/ball only without
// the l1 term). Throws UnsupportedSubproblem on a free space.
double min_affine_over_set(const ProxSetup& setup, double c0, const Vec& v,
                           double l1_weight = 0.0);

Vec sample_feasible(const ProxSetup& setup, Rng& rng);

void to_json(nlohmann::json& j, const ProxSetup& setup);
ProxSetup setup_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const CompositeTerm& psi);
CompositeTerm composite_from_json(const nlohmann::json& j);

}  // namespace fom
