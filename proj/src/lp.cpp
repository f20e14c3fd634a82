#include "pomdplab/lp.hpp"

#include <cmath>
#include <vector>

namespace pomdplab {

namespace {

constexpr double kPivotTol = 1e-11;

// Simplex on the tableau [B^{-1}A | B^{-1}b]. Bland's rule: entering =
// lowest-index negative reduced cost; leaving = min ratio, ties broken by
// lowest basis index. Returns false when unbounded.
bool run_simplex(Eigen::MatrixXd& tab, Eigen::VectorXd& rhs, const Eigen::VectorXd& cost,
                 std::vector<int>& basis) {
    const int m = static_cast<int>(tab.rows());
    const int n = static_cast<int>(tab.cols());

    for (;;) {
        Eigen::VectorXd cb(m);
        for (int i = 0; i < m; ++i) cb[i] = cost[basis[i]];
        Eigen::RowVectorXd red = cost.transpose() - cb.transpose() * tab;

        int enter = -1;
        for (int j = 0; j < n; ++j) {
            if (red[j] < -kPivotTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;  // optimal

        int leave = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < m; ++i) {
            if (tab(i, enter) > kPivotTol) {
                const double ratio = rhs[i] / tab(i, enter);
                if (leave < 0 || ratio < best_ratio - 1e-15 ||
                    (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) return false;

        const double piv = tab(leave, enter);
        tab.row(leave) /= piv;
        rhs[leave] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = tab(i, enter);
            if (f != 0.0) {
                tab.row(i) -= f * tab.row(leave);
                rhs[i] -= f * rhs[leave];
            }
        }
        basis[leave] = enter;
    }
}

}  // namespace

std::optional<LpSolution> solve_equality_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& c) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());

    // Phase 1: minimize the sum of artificials, rows flipped so b >= 0.
    Eigen::MatrixXd tab(m, n + m);
    Eigen::VectorXd rhs = b;
    tab.leftCols(n) = A;
    tab.rightCols(m).setIdentity();
    for (int i = 0; i < m; ++i) {
        if (rhs[i] < 0) {
            rhs[i] = -rhs[i];
            tab.row(i).head(n) = -A.row(i);
        }
    }
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(n + m);
    cost1.tail(m).setOnes();
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    if (!run_simplex(tab, rhs, cost1, basis)) return std::nullopt;
    double phase1 = 0.0;
    for (int i = 0; i < m; ++i) phase1 += cost1[basis[i]] * rhs[i];
    if (phase1 > 1e-8) return std::nullopt;  // infeasible

    // Pivot artificials out of the basis where possible; rows where no
    // original column has a nonzero entry are redundant and get dropped.
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) {
            keep.push_back(i);
            continue;
        }
        int enter = -1;
        for (int j = 0; j < n; ++j) {
            if (std::abs(tab(i, j)) > kPivotTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) continue;  // redundant constraint
        const double piv = tab(i, enter);
        tab.row(i) /= piv;
        rhs[i] /= piv;
        for (int r = 0; r < m; ++r) {
            if (r == i) continue;
            const double f = tab(r, enter);
            if (f != 0.0) {
                tab.row(r) -= f * tab.row(i);
                rhs[r] -= f * rhs[i];
            }
        }
        basis[i] = enter;
        keep.push_back(i);
    }

    const int m2 = static_cast<int>(keep.size());
    Eigen::MatrixXd tab2(m2, n);
    Eigen::VectorXd rhs2(m2);
    std::vector<int> basis2(m2);
    for (int i = 0; i < m2; ++i) {
        tab2.row(i) = tab.row(keep[i]).head(n);
        rhs2[i] = rhs[keep[i]];
        basis2[i] = basis[keep[i]];
    }

    if (!run_simplex(tab2, rhs2, c, basis2)) return std::nullopt;

    LpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m2; ++i) sol.x[basis2[i]] = rhs2[i];
    sol.objective = c.dot(sol.x);
    return sol;
}

}  // namespace pomdplab
