#include "fom/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "lp_simplex.hpp"

namespace fom {

using nlohmann::json;

namespace {

double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void check_psd(const Mat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("quadratic: A must be square");
  if (!A.isApprox(A.transpose(), 1e-10))
    throw std::invalid_argument("quadratic: A must be symmetric");
  Eigen::LLT<Mat> llt(A + 1e-12 * Mat::Identity(A.rows(), A.cols()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("quadratic: A must be positive semidefinite");
}

double spectral_norm(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Problem Problem::max_affine(Mat A, Vec b) {
  if (A.rows() != b.size()) throw std::invalid_argument("max_affine: row count mismatch");
  if (A.rows() == 0) throw std::invalid_argument("max_affine: needs at least one piece");
  Problem p;
  p.variant_ = ProblemVariant::MaxAffine;
  p.dim_ = static_cast<int>(A.cols());
  p.A_ = std::move(A);
  p.b_ = std::move(b);
  return p;
}

Problem Problem::l1_regression(Mat A, Vec b) {
  if (A.rows() != b.size()) throw std::invalid_argument("l1_regression: row count mismatch");
  Problem p;
  p.variant_ = ProblemVariant::L1Regression;
  p.dim_ = static_cast<int>(A.cols());
  p.A_ = std::move(A);
  p.b_ = std::move(b);
  return p;
}

Problem Problem::quadratic(Mat A, Vec b) {
  if (A.rows() != b.size()) throw std::invalid_argument("quadratic: size mismatch");
  check_psd(A);
  Problem p;
  p.variant_ = ProblemVariant::Quadratic;
  p.dim_ = static_cast<int>(A.cols());
  p.lipschitz_ = spectral_norm(A);
  p.A_ = std::move(A);
  p.b_ = std::move(b);
  return p;
}

Problem Problem::composite_lasso(Mat A, Vec b, double w) {
  if (A.rows() != b.size()) throw std::invalid_argument("lasso: size mismatch");
  if (!(w >= 0)) throw std::invalid_argument("lasso: weight must be nonnegative");
  Problem p;
  p.variant_ = ProblemVariant::CompositeLasso;
  p.dim_ = static_cast<int>(A.cols());
  p.l1_weight_ = w;
  p.composite_ = CompositeTerm::l1(w);
  p.lipschitz_ = spectral_norm(A.transpose() * A);
  p.A_ = std::move(A);
  p.b_ = std::move(b);
  return p;
}

Problem Problem::inexact(Problem smooth_base, double delta0, std::uint64_t seed) {
  if (smooth_base.nonsmooth_class())
    throw std::invalid_argument("inexact: base problem must be structured");
  if (smooth_base.variant_ == ProblemVariant::InexactWrapper)
    throw std::invalid_argument("inexact: cannot wrap a wrapper");
  if (!(delta0 >= 0)) throw std::invalid_argument("inexact: delta must be nonnegative");
  Problem p;
  p.variant_ = ProblemVariant::InexactWrapper;
  p.dim_ = smooth_base.dim_;
  p.composite_ = smooth_base.composite_;
  p.lipschitz_ = smooth_base.lipschitz_;
  p.delta0_ = delta0;
  p.seed_ = seed;
  p.base_ = std::make_shared<Problem>(std::move(smooth_base));
  return p;
}

std::string Problem::id() const {
  switch (variant_) {
    case ProblemVariant::MaxAffine:
      return "max_affine(n=" + std::to_string(dim_) + ",m=" + std::to_string(A_.rows()) + ")";
    case ProblemVariant::L1Regression:
      return "l1_regression(n=" + std::to_string(dim_) + ",m=" + std::to_string(A_.rows()) + ")";
    case ProblemVariant::Quadratic:
      return "quadratic(n=" + std::to_string(dim_) + ")";
    case ProblemVariant::CompositeLasso:
      return "composite_lasso(n=" + std::to_string(dim_) + ")";
    case ProblemVariant::InexactWrapper:
      return "inexact[" + base_->id() + ",delta=" + std::to_string(delta0_) + "]";
  }
  return "problem";
}

OracleReply Problem::query(const Vec& y) const {
  if (y.size() != dim_) throw std::invalid_argument("query: dimension mismatch");
  OracleReply r;
  switch (variant_) {
    case ProblemVariant::MaxAffine: {
      Vec vals = A_ * y + b_;
      int best = 0;
      for (int i = 1; i < vals.size(); ++i)
        if (vals[i] > vals[best]) best = i;  // ties resolve to the lowest index
      r.value = vals[best];
      r.slope = A_.row(best).transpose();
      return r;
    }
    case ProblemVariant::L1Regression: {
      Vec res = A_ * y - b_;
      r.value = res.lpNorm<1>();
      Vec s(res.size());
      for (int i = 0; i < res.size(); ++i) s[i] = sign0(res[i]);
      r.slope = A_.transpose() * s;
      return r;
    }
    case ProblemVariant::Quadratic: {
      Vec Ay = A_ * y;
      r.value = 0.5 * y.dot(Ay) - b_.dot(y);
      r.slope = Ay - b_;
      r.lipschitz = lipschitz_;
      return r;
    }
    case ProblemVariant::CompositeLasso: {
      Vec res = A_ * y - b_;
      r.value = 0.5 * res.squaredNorm();  // smooth part only; Psi rides along
      r.slope = A_.transpose() * res;
      r.lipschitz = lipschitz_;
      r.has_composite = true;
      return r;
    }
    case ProblemVariant::InexactWrapper: {
      r = base_->query(y);
      std::uint64_t h = hash_doubles(seed_, y.data(), y.size());
      double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      r.value -= u * delta0_;  // keeps l_f below f; slack stays within delta0
      r.delta = delta0_;
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

double Problem::true_value(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("true_value: dimension mismatch");
  switch (variant_) {
    case ProblemVariant::MaxAffine:
      return (A_ * x + b_).maxCoeff();
    case ProblemVariant::L1Regression:
      return (A_ * x - b_).lpNorm<1>();
    case ProblemVariant::Quadratic:
      return 0.5 * x.dot(A_ * x) - b_.dot(x);
    case ProblemVariant::CompositeLasso:
      return 0.5 * (A_ * x - b_).squaredNorm() + l1_weight_ * x.lpNorm<1>();
    case ProblemVariant::InexactWrapper:
      return base_->true_value(x);
  }
  throw std::logic_error("unreachable");
}

double lower_model_value(const OracleReply& reply, const Vec& y, const Vec& x,
                         const CompositeTerm& psi) {
  double v = reply.value + reply.slope.dot(x - y);
  if (reply.has_composite) v += psi.value(x);
  return v;
}

namespace {

// Exact LP for min_{x in simplex} max_i(<a_i,x> + b_i): variables
// [x, t+, t-, slacks], rows are the m epigraph constraints plus sum(x)=1.
OptimumInfo max_affine_simplex_optimum(const Mat& A, const Vec& b) {
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  Mat E = Mat::Zero(m + 1, n + 2 + m);
  Vec rhs(m + 1), cost = Vec::Zero(n + 2 + m);
  for (int i = 0; i < m; ++i) {
    E.row(i).head(n) = A.row(i);
    E(i, n) = -1.0;      // t+
    E(i, n + 1) = 1.0;   // t-
    E(i, n + 2 + i) = 1.0;
    rhs[i] = -b[i];
  }
  E.row(m).head(n).setOnes();
  rhs[m] = 1.0;
  cost[n] = 1.0;
  cost[n + 1] = -1.0;
  auto y = detail::solve_lp_standard_form(E, rhs, cost);
  if (!y) return {};
  OptimumInfo info;
  Vec x = y->head(n);
  // clean tiny negative round-off and renormalize onto the simplex
  for (int i = 0; i < n; ++i) x[i] = std::max(x[i], 0.0);
  x /= x.sum();
  info.x_star = x;
  info.f_star = (A * x + b).maxCoeff();
  return info;
}

// Cyclic coordinate descent for 0.5||Ax-b||^2 + w||x||_1, iterated until the
// sweep movement stalls at machine precision.
OptimumInfo lasso_optimum(const Mat& A, const Vec& b, double w) {
  const int n = static_cast<int>(A.cols());
  Vec colsq(n);
  for (int j = 0; j < n; ++j) colsq[j] = A.col(j).squaredNorm();
  Vec x = Vec::Zero(n);
  Vec res = -b;  // Ax - b
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double max_move = 0;
    for (int j = 0; j < n; ++j) {
      if (colsq[j] == 0) continue;
      double old = x[j];
      double rho = A.col(j).dot(res) - colsq[j] * old;  // gradient part sans x_j
      double z = -rho;
      double next = 0;
      if (z > w)
        next = (z - w) / colsq[j];
      else if (z < -w)
        next = (z + w) / colsq[j];
      if (next != old) {
        res += A.col(j) * (next - old);
        x[j] = next;
        max_move = std::max(max_move, std::abs(next - old));
      }
    }
    if (max_move < 1e-15) break;
  }
  OptimumInfo info;
  info.x_star = x;
  info.f_star = 0.5 * res.squaredNorm() + w * x.lpNorm<1>();
  return info;
}

}  // namespace

OptimumInfo known_optimum(const Problem& problem, const FeasibleSet& set) {
  switch (problem.variant()) {
    case ProblemVariant::Quadratic: {
      if (set.kind != SetKind::FreeSpace) return {};
      Eigen::LDLT<Mat> ldlt(problem.matrix());
      if (ldlt.info() != Eigen::Success) return {};
      OptimumInfo info;
      Vec x = ldlt.solve(problem.rhs());
      info.x_star = x;
      info.f_star = problem.true_value(x);
      return info;
    }
    case ProblemVariant::MaxAffine: {
      if (set.kind != SetKind::Simplex) return {};
      return max_affine_simplex_optimum(problem.matrix(), problem.rhs());
    }
    case ProblemVariant::CompositeLasso: {
      if (set.kind != SetKind::FreeSpace) return {};
      return lasso_optimum(problem.matrix(), problem.rhs(), problem.composite().weight);
    }
    case ProblemVariant::InexactWrapper:
      // the true objective is the base problem's
      return known_optimum(*problem.base(), set);
    default:
      return {};
  }
}

Problem make_random_problem(ProblemVariant variant, int dim, std::uint64_t seed,
                            const ProblemGenOptions& options) {
  Rng rng(seed ^ 0xabcd1234ULL);
  switch (variant) {
    case ProblemVariant::MaxAffine: {
      Mat A(options.pieces, dim);
      Vec b(options.pieces);
      const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
      for (int i = 0; i < options.pieces; ++i) {
        for (int j = 0; j < dim; ++j) A(i, j) = scale * rng.normal();
        b[i] = 0.3 * rng.normal();
      }
      return Problem::max_affine(std::move(A), std::move(b));
    }
    case ProblemVariant::L1Regression: {
      Mat A(options.pieces, dim);
      Vec b(options.pieces);
      for (int i = 0; i < options.pieces; ++i) {
        for (int j = 0; j < dim; ++j) A(i, j) = rng.normal();
        b[i] = rng.normal();
      }
      return Problem::l1_regression(std::move(A), std::move(b));
    }
    case ProblemVariant::Quadratic: {
      // A = Q diag(s) Q' with log-spaced spectrum in [1, cond]
      Mat G(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = rng.normal();
      Eigen::HouseholderQR<Mat> qr(G);
      Mat Q = qr.householderQ();
      Vec s(dim);
      for (int i = 0; i < dim; ++i) {
        double t = dim == 1 ? 0.0 : static_cast<double>(i) / (dim - 1);
        s[i] = std::pow(options.cond, t);
      }
      Mat A = Q * s.asDiagonal() * Q.transpose();
      A = 0.5 * (A + A.transpose());
      Vec b(dim);
      for (int i = 0; i < dim; ++i) b[i] = rng.normal();
      return Problem::quadratic(std::move(A), std::move(b));
    }
    case ProblemVariant::CompositeLasso: {
      int rows = std::max(options.pieces, dim / 2);
      Mat A(rows, dim);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) = rng.normal() / std::sqrt(rows);
      Vec b(rows);
      for (int i = 0; i < rows; ++i) b[i] = rng.normal();
      return Problem::composite_lasso(std::move(A), std::move(b), options.l1_weight);
    }
    case ProblemVariant::InexactWrapper: {
      Problem base = make_random_problem(ProblemVariant::Quadratic, dim, seed, options);
      return Problem::inexact(std::move(base), options.delta0, seed);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

json mat_to_json(const Mat& A) {
  std::vector<double> flat(A.size());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) flat[static_cast<size_t>(i) * A.cols() + j] = A(i, j);
  return json{{"rows", A.rows()}, {"cols", A.cols()}, {"data", flat}};
}

Mat mat_from_json(const json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<long>(flat.size()) != rows * cols)
    throw std::invalid_argument("matrix: bad payload size");
  Mat A(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c) A(i, c) = flat[static_cast<size_t>(i) * cols + c];
  return A;
}

}  // namespace

void to_json(json& j, const Problem& problem) {
  if (problem.variant() == ProblemVariant::InexactWrapper) {
    json base;
    to_json(base, *problem.base());
    j = json{{"variant", "inexact"},
             {"dim", problem.dim()},
             {"base", base},
             {"delta0", problem.delta0()},
             {"seed", problem.perturbation_seed()}};
    return;
  }
  json inner;
  switch (problem.variant()) {
    case ProblemVariant::MaxAffine:
      inner["variant"] = "max_affine";
      break;
    case ProblemVariant::L1Regression:
      inner["variant"] = "l1_regression";
      break;
    case ProblemVariant::Quadratic:
      inner["variant"] = "quadratic";
      break;
    case ProblemVariant::CompositeLasso:
      inner["variant"] = "composite_lasso";
      inner["l1_weight"] = problem.composite().weight;
      break;
    case ProblemVariant::InexactWrapper:
      break;  // handled above
  }
  inner["dim"] = problem.dim();
  inner["A"] = mat_to_json(problem.matrix());
  inner["b"] = std::vector<double>(problem.rhs().begin(), problem.rhs().end());
  j = inner;
}

Problem problem_from_json(const json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "inexact") {
    Problem base = problem_from_json(j.at("base"));
    return Problem::inexact(std::move(base), j.at("delta0").get<double>(),
                            j.at("seed").get<std::uint64_t>());
  }
  Mat A = mat_from_json(j.at("A"));
  auto bv = j.at("b").get<std::vector<double>>();
  Vec b = Eigen::Map<const Vec>(bv.data(), static_cast<long>(bv.size()));
  if (variant == "max_affine") return Problem::max_affine(std::move(A), std::move(b));
  if (variant == "l1_regression") return Problem::l1_regression(std::move(A), std::move(b));
  if (variant == "quadratic") return Problem::quadratic(std::move(A), std::move(b));
  if (variant == "composite_lasso")
    return Problem::composite_lasso(std::move(A), std::move(b), j.at("l1_weight").get<double>());
  throw std::invalid_argument("problem: unknown variant " + variant);
}

}  // namespace fom
