#include "fom/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace fom {

using nlohmann::json;

FeasibleSet FeasibleSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box: bound sizes differ");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box: lower > upper");
  FeasibleSet s;
  s.kind = SetKind::Box;
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  return s;
}

FeasibleSet FeasibleSet::ball(Vec center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball: radius must be positive");
  FeasibleSet s;
  s.kind = SetKind::Ball;
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  switch (kind) {
    case SetKind::FreeSpace:
      return x.allFinite();
    case SetKind::Box:
      if (x.size() != lower.size()) return false;
      for (int i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
      return true;
    case SetKind::Ball:
      if (x.size() != center.size()) return false;
      return (x - center).norm() <= radius + tol;
    case SetKind::Simplex: {
      if (x.minCoeff() < -tol) return false;
      return std::abs(x.sum() - 1.0) <= std::max(tol, 1e-9);
    }
  }
  return false;
}

namespace {

// Sort-based Euclidean projection onto the standard simplex. Stable sort
// keeps the result deterministic under ties.
Vec project_simplex(const Vec& u) {
  const int n = static_cast<int>(u.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return u[a] > u[b]; });
  double cum = 0;
  double theta = 0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    cum += u[idx[j]];
    double t = (cum - 1.0) / (j + 1);
    if (u[idx[j]] - t > 0) {
      rho = j + 1;
      theta = t;
    }
  }
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = std::max(u[i] - theta, 0.0);
  return x;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

Vec FeasibleSet::project(const Vec& x) const {
  switch (kind) {
    case SetKind::FreeSpace:
      return x;
    case SetKind::Box:
      return x.cwiseMax(lower).cwiseMin(upper);
    case SetKind::Ball: {
      Vec d = x - center;
      double nrm = d.norm();
      if (nrm <= radius) return x;
      return center + (radius / nrm) * d;
    }
    case SetKind::Simplex:
      return project_simplex(x);
  }
  throw std::logic_error("unreachable");
}

CompositeTerm CompositeTerm::l1(double w) {
  if (!(w >= 0) || !std::isfinite(w))
    throw std::invalid_argument("l1 weight must be finite and nonnegative");
  CompositeTerm t;
  t.kind = Kind::L1;
  t.weight = w;
  return t;
}

ProxSetup ProxSetup::euclidean(FeasibleSet set, Vec x0) {
  ProxSetup s;
  s.dim_ = static_cast<int>(x0.size());
  if (s.dim_ <= 0) throw std::invalid_argument("setup: dimension must be positive");
  if (!set.contains(x0, 1e-9)) throw std::invalid_argument("setup: x0 outside feasible set");
  s.set_ = std::move(set);
  s.geometry_ = Geometry::Euclidean;
  s.sigma_ = 1.0;
  s.x0_ = std::move(x0);
  return s;
}

ProxSetup ProxSetup::entropy_simplex(int dim) {
  if (dim <= 0) throw std::invalid_argument("setup: dimension must be positive");
  ProxSetup s;
  s.dim_ = dim;
  s.set_ = FeasibleSet::simplex();
  s.geometry_ = Geometry::EntropySimplex;
  s.sigma_ = 1.0;
  s.x0_ = Vec::Constant(dim, 1.0 / dim);
  return s;
}

void ProxSetup::require_dim(const Vec& v, const char* what) const {
  if (v.size() != dim_)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double d_value(const ProxSetup& setup, const Vec& x) {
  setup.require_dim(x, "d_value");
  if (setup.geometry() == Geometry::Euclidean) {
    return 0.5 * (x - setup.x0()).squaredNorm();
  }
  // entropy: ln(n) + sum x_i ln x_i, with 0 ln 0 = 0
  if (!setup.contains(x, 1e-9)) throw std::domain_error("d_value: point outside simplex");
  double acc = std::log(static_cast<double>(setup.dim()));
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < 0) throw std::domain_error("d_value: negative entry");
    if (x[i] > 0) acc += x[i] * std::log(x[i]);
  }
  return acc;
}

Vec d_grad(const ProxSetup& setup, const Vec& x) {
  setup.require_dim(x, "d_grad");
  if (setup.geometry() == Geometry::Euclidean) {
    return x - setup.x0();
  }
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0))
      throw std::domain_error("d_grad: entropy gradient undefined at the boundary");
    g[i] = 1.0 + std::log(x[i]);
  }
  return g;
}

double bregman(const ProxSetup& setup, const Vec& z, const Vec& x) {
  return d_value(setup, x) - d_value(setup, z) - d_grad(setup, z).dot(x - z);
}

double l_d(const ProxSetup& setup, const Vec& z, const Vec& x) {
  return d_value(setup, z) + d_grad(setup, z).dot(x - z);
}

double dual_norm(const ProxSetup& setup, const Vec& s) {
  setup.require_dim(s, "dual_norm");
  if (setup.geometry() == Geometry::Euclidean) return s.norm();
  return s.lpNorm<Eigen::Infinity>();  // dual of l1
}

Vec prox_argmin(const ProxSetup& setup, const Vec& s, double beta,
                const CompositeTerm& psi, double psi_weight) {
  setup.require_dim(s, "prox_argmin");
  if (!(beta > 0)) throw std::invalid_argument("prox_argmin: beta must be positive");
  if (!(psi_weight >= 0)) throw std::invalid_argument("prox_argmin: negative psi weight");
  const bool with_l1 = psi.is_l1() && psi_weight > 0;

  if (setup.geometry() == Geometry::EntropySimplex) {
    if (with_l1)
      throw UnsupportedSubproblem("prox_argmin: l1 term not supported with entropy geometry");
    // argmin <s,x> + beta*(ln n + sum x ln x) over the simplex: softmax(-s/beta)
    Vec a = (-s / beta).eval();
    double m = a.maxCoeff();
    Vec z = (a.array() - m).exp();
    z /= z.sum();
    // keep iterates strictly positive so the entropy gradient stays defined
    constexpr double kFloor = 1e-300;
    bool renorm = false;
    for (int i = 0; i < z.size(); ++i)
      if (z[i] < kFloor) {
        z[i] = kFloor;
        renorm = true;
      }
    if (renorm) z /= z.sum();
    return z;
  }

  // Euclidean geometry: argmin <s,x> + w*Psi(x) + (beta/2)||x - x0||^2
  const Vec u = setup.x0() - s / beta;
  switch (setup.set().kind) {
    case SetKind::FreeSpace: {
      if (!with_l1) return u;
      const double t = psi_weight * psi.weight / beta;
      Vec z(u.size());
      for (int i = 0; i < u.size(); ++i) z[i] = soft_threshold(u[i], t);
      return z;
    }
    case SetKind::Box: {
      Vec z(u.size());
      const double t = with_l1 ? psi_weight * psi.weight / beta : 0.0;
      for (int i = 0; i < u.size(); ++i) {
        double m = with_l1 ? soft_threshold(u[i], t) : u[i];
        // 1-D convex objective: its box-constrained minimizer is the clipped
        // unconstrained one
        z[i] = std::clamp(m, setup.set().lower[i], setup.set().upper[i]);
      }
      return z;
    }
    case SetKind::Ball: {
      if (with_l1)
        throw UnsupportedSubproblem("prox_argmin: l1 term not supported on a ball");
      Vec d = u - setup.set().center;
      double nrm = d.norm();
      if (nrm <= setup.set().radius) return u;
      return setup.set().center + (setup.set().radius / nrm) * d;
    }
    case SetKind::Simplex: {
      if (with_l1)
        throw UnsupportedSubproblem("prox_argmin: l1 term not supported on the simplex");
      return project_simplex(u);
    }
  }
  throw std::logic_error("unreachable");
}

double min_affine_over_set(const ProxSetup& setup, double c0, const Vec& v,
                           double l1_weight) {
  setup.require_dim(v, "min_affine_over_set");
  if (l1_weight < 0) throw std::invalid_argument("min_affine_over_set: negative l1 weight");
  const FeasibleSet& set = setup.set();
  switch (set.kind) {
    case SetKind::Box: {
      double acc = c0;
      for (int i = 0; i < v.size(); ++i) {
        // per-coordinate piecewise-linear minimum; candidates are the bounds
        // and (when admissible) the kink at zero
        auto val = [&](double x) { return v[i] * x + l1_weight * std::abs(x); };
        double best = std::min(val(set.lower[i]), val(set.upper[i]));
        if (set.lower[i] <= 0 && 0 <= set.upper[i]) best = std::min(best, 0.0);
        acc += best;
      }
      return acc;
    }
    case SetKind::Simplex: {
      if (l1_weight > 0) {
        // on the simplex ||x||_1 = 1
        return c0 + l1_weight + v.minCoeff();
      }
      return c0 + v.minCoeff();
    }
    case SetKind::Ball: {
      if (l1_weight > 0)
        throw UnsupportedSubproblem("min_affine_over_set: l1 on a ball not supported");
      return c0 + v.dot(set.center) - set.radius * v.norm();
    }
    case SetKind::FreeSpace:
      throw UnsupportedSubproblem("min_affine_over_set: unbounded on a free space");
  }
  throw std::logic_error("unreachable");
}

Vec sample_feasible(const ProxSetup& setup, Rng& rng) {
  const int n = setup.dim();
  switch (setup.set().kind) {
    case SetKind::FreeSpace: {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = setup.x0()[i] + 2.0 * rng.normal();
      return x;
    }
    case SetKind::Box: {
      Vec x(n);
      for (int i = 0; i < n; ++i)
        x[i] = rng.uniform(setup.set().lower[i], setup.set().upper[i]);
      return x;
    }
    case SetKind::Ball: {
      Vec dir(n);
      for (int i = 0; i < n; ++i) dir[i] = rng.normal();
      double nrm = dir.norm();
      if (nrm == 0) return setup.set().center;
      double r = setup.set().radius * std::pow(rng.uniform01(), 1.0 / n);
      return setup.set().center + (r / nrm) * dir;
    }
    case SetKind::Simplex: {
      // Dirichlet(1,...,1); strictly positive, so entropy gradients exist
      Vec x(n);
      double sum = 0;
      for (int i = 0; i < n; ++i) {
        x[i] = -std::log(rng.uniform01_open0());
        sum += x[i];
      }
      return x / sum;
    }
  }
  throw std::logic_error("unreachable");
}

void to_json(json& j, const ProxSetup& setup) {
  j = json{{"dim", setup.dim()}};
  switch (setup.geometry()) {
    case Geometry::Euclidean:
      j["geometry"] = "euclidean";
      break;
    case Geometry::EntropySimplex:
      j["geometry"] = "entropy";
      break;
  }
  json set;
  switch (setup.set().kind) {
    case SetKind::FreeSpace:
      set["kind"] = "free";
      break;
    case SetKind::Box:
      set["kind"] = "box";
      set["lower"] = std::vector<double>(setup.set().lower.begin(), setup.set().lower.end());
      set["upper"] = std::vector<double>(setup.set().upper.begin(), setup.set().upper.end());
      break;
    case SetKind::Ball:
      set["kind"] = "ball";
      set["center"] = std::vector<double>(setup.set().center.begin(), setup.set().center.end());
      set["radius"] = setup.set().radius;
      break;
    case SetKind::Simplex:
      set["kind"] = "simplex";
      break;
  }
  j["set"] = set;
  if (setup.geometry() == Geometry::Euclidean)
    j["x0"] = std::vector<double>(setup.x0().begin(), setup.x0().end());
}

namespace {
Vec vec_from_json(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}
}  // namespace

ProxSetup setup_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const std::string geom = j.at("geometry").get<std::string>();
  const json& set = j.at("set");
  const std::string kind = set.at("kind").get<std::string>();
  if (geom == "entropy") {
    if (kind != "simplex")
      throw std::invalid_argument("setup: entropy geometry requires the simplex");
    return ProxSetup::entropy_simplex(dim);
  }
  if (geom != "euclidean") throw std::invalid_argument("setup: unknown geometry " + geom);
  FeasibleSet fs;
  if (kind == "free") {
    fs = FeasibleSet::free_space();
  } else if (kind == "box") {
    fs = FeasibleSet::box(vec_from_json(set.at("lower")), vec_from_json(set.at("upper")));
  } else if (kind == "ball") {
    fs = FeasibleSet::ball(vec_from_json(set.at("center")), set.at("radius").get<double>());
  } else if (kind == "simplex") {
    fs = FeasibleSet::simplex();
  } else {
    throw std::invalid_argument("setup: unknown set kind " + kind);
  }
  Vec x0;
  if (j.contains("x0")) {
    x0 = vec_from_json(j.at("x0"));
  } else if (kind == "simplex") {
    x0 = Vec::Constant(dim, 1.0 / dim);
  } else if (kind == "ball") {
    x0 = fs.center;
  } else {
    x0 = Vec::Zero(dim);
    if (kind == "box") x0 = fs.project(x0);
  }
  return ProxSetup::euclidean(std::move(fs), std::move(x0));
}

void to_json(json& j, const CompositeTerm& psi) {
  switch (psi.kind) {
    case CompositeTerm::Kind::None:
      j = json{{"kind", "none"}};
      break;
    case CompositeTerm::Kind::L1:
      j = json{{"kind", "l1"}, {"weight", psi.weight}};
      break;
    case CompositeTerm::Kind::IndicatorAbsorbed:
      j = json{{"kind", "indicator"}};
      break;
  }
}

CompositeTerm composite_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return CompositeTerm::none();
  if (kind == "l1") return CompositeTerm::l1(j.at("weight").get<double>());
  if (kind == "indicator") {
    CompositeTerm t;
    t.kind = CompositeTerm::Kind::IndicatorAbsorbed;
    return t;
  }
  throw std::invalid_argument("composite: unknown kind " + kind);
}

}  // namespace fom
