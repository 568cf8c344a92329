#include "lp_simplex.hpp"

#include <cmath>
#include <vector>

namespace fom::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kEps = 1e-11;

// Tableau simplex on [A | b] with basis tracking; only columns below
// n_enterable may enter (phase 2 locks the artificials out). Bland's rule
// (lowest eligible index) guarantees termination. Returns false on
// unboundedness.
bool run_simplex(MatrixXd& T, std::vector<int>& basis, const VectorXd& cost,
                 int n_enterable, double& obj) {
  const int m = static_cast<int>(T.rows());
  const int n = static_cast<int>(T.cols()) - 1;
  for (;;) {
    VectorXd r = cost;
    for (int i = 0; i < m; ++i)
      if (cost[basis[i]] != 0.0) r -= cost[basis[i]] * T.row(i).head(n).transpose();

    int enter = -1;
    for (int j = 0; j < n_enterable; ++j)
      if (r[j] < -kEps) {
        enter = j;
        break;
      }
    if (enter < 0) {
      obj = 0;
      for (int i = 0; i < m; ++i) obj += cost[basis[i]] * T(i, n);
      return true;
    }

    int leave = -1;
    double best_ratio = 0;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kEps) {
        double ratio = T(i, n) / T(i, enter);
        if (leave < 0 || ratio < best_ratio - kEps ||
            (std::abs(ratio - best_ratio) <= kEps && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    T.row(leave) /= T(leave, enter);
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }
}

}  // namespace

std::optional<VectorXd> solve_lp_standard_form(const MatrixXd& A, const VectorXd& b,
                                               const VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());

  // Phase 1 with artificial variables; flip row signs so b >= 0.
  MatrixXd T(m, n + m + 1);
  T.leftCols(n) = A;
  T.middleCols(n, m) = MatrixXd::Identity(m, m);
  T.col(n + m) = b;
  for (int i = 0; i < m; ++i)
    if (T(i, n + m) < 0) {
      T.row(i).head(n) *= -1.0;
      T(i, n + m) *= -1.0;
      T(i, n + i) = 1.0;  // keep the artificial column a positive unit
    }

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  VectorXd phase1_cost = VectorXd::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  double obj = 0;
  if (!run_simplex(T, basis, phase1_cost, n + m, obj)) return std::nullopt;
  if (obj > 1e-8) return std::nullopt;  // infeasible

  // Drive leftover artificials out of the basis when possible. A row that
  // cannot be pivoted is redundant; its artificial stays basic at value 0 and
  // never moves in phase 2 (its row has no nonzero structural coefficient).
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) {
      int enter = -1;
      for (int j = 0; j < n; ++j)
        if (std::abs(T(i, j)) > kEps) {
          enter = j;
          break;
        }
      if (enter >= 0) {
        T.row(i) /= T(i, enter);
        for (int r = 0; r < m; ++r) {
          if (r == i) continue;
          double f = T(r, enter);
          if (f != 0.0) T.row(r) -= f * T.row(i);
        }
        basis[i] = enter;
      }
    }
  }

  VectorXd phase2_cost = VectorXd::Zero(n + m);
  phase2_cost.head(n) = c;
  if (!run_simplex(T, basis, phase2_cost, n, obj)) return std::nullopt;  // unbounded

  VectorXd y = VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) y[basis[i]] = T(i, n + m);
  return y;
}

}  // namespace fom::detail
