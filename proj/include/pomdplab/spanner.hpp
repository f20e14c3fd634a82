#pragma once

#include <functional>
#include <vector>

#include "pomdplab/policy.hpp"
#include "pomdplab/zmdp.hpp"

namespace pomdplab {

/// One answer from the linear-optimization oracle: the maximizing window
/// policy, the optimum of <r, .>, and the maximizer's achievable vector.
struct OraclePoint {
    ZPolicy policy;
    double value = 0.0;
    Vec point;
};

using LinearOracle = std::function<OraclePoint(const Vec& direction)>;

/// Barycentric spanner of the oracle's achievable set.
/// `points` are k linearly independent achievable vectors; `embedding`
/// has orthonormal columns spanning them, so coefficients of any
/// achievable x solve the k x k system in embedded coordinates.
struct SpannerResult {
    std::vector<ZPolicy> policies;
    std::vector<Vec> points;
    Mat embedding;  // dim x k
    double lambda = 2.0;
    int ambient_dim = 0;
    int rank() const { return static_cast<int>(points.size()); }
};

struct SpannerTrace {
    int oracle_calls = 0;
    std::vector<double> swap_ratios;  // |det| growth factor of each accepted swap
    double log_abs_det = 0.0;         // accumulated log|det| relative to the initialized matrix
};

/// Determinant-swap construction over the oracle, in three phases:
/// rank discovery (signed oracle calls on directions orthogonal to the
/// accumulated span), initialization of a k x k matrix by cofactor
/// directions, then the swap loop which accepts a column replacement only
/// when it multiplies |det| by more than lambda. Swap comparisons use
/// determinant ratios and log|det| accumulation, never raw determinants.
SpannerResult barycentric_spanner(const LinearOracle& oracle, int dim, double lambda,
                                  SpannerTrace* trace = nullptr);

struct BarySpannerOutcome {
    GeneralPolicy policy;
    int rank = 0;
};

/// Algorithm step used by the learner: spanner of the achievable
/// observation-visitation set at step h-L of the Z-MDP, returned as the
/// uniform mixture over the spanner policies (padded with repeats of the
/// first policy up to O components). For h <= L, or when the achievable
/// set is {0}, falls back to uniformly random play.
BarySpannerOutcome bary_spanner_policy(const TabularZMDP& zmdp, int h);

struct CoefficientReport {
    double max_abs_coefficient = 0.0;
    bool within_bound = false;
    std::vector<int> span_violations;  // indices of points outside the span
};

/// Expresses each point against the spanner and reports the largest
/// coefficient magnitude observed.
CoefficientReport verify_spanner(const std::vector<Vec>& points, const SpannerResult& spanner,
                                 double bound);

}  // namespace pomdplab
