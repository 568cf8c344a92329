#pragma once

#include <Eigen/Core>
#include <optional>

namespace fom::detail {

// Dense two-phase primal simplex with Bland's rule, for the small exact
// reference LPs used by known_optimum. Solves
//   min c'y  s.t.  A y = b,  y >= 0
// and returns the optimal y, or nullopt when infeasible/unbounded.
std::optional<Eigen::VectorXd> solve_lp_standard_form(const Eigen::MatrixXd& A,
                                                      const Eigen::VectorXd& b,
                                                      const Eigen::VectorXd& c);

}  // namespace fom::detail
