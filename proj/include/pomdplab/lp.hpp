#pragma once

#include <Eigen/Dense>
#include <optional>

namespace pomdplab {

/// Dense two-phase simplex for
///     min c'x   s.t.  A x = b,  x >= 0,
/// with Bland's rule (no cycling). Sized for the desk-scale LPs used by
/// the observability-margin computation (tens of rows/columns).
struct LpSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// Returns nullopt when the program is infeasible or unbounded.
std::optional<LpSolution> solve_equality_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& c);

}  // namespace pomdplab
