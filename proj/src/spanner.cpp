#include "pomdplab/spanner.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pomdplab {

namespace {

constexpr double kRankTolScale = 1e-9;

double residual_norm(const Mat& Q, const Vec& x) {
    if (Q.cols() == 0) return x.norm();
    return (x - Q * (Q.transpose() * x)).norm();
}

bool in_span(const Mat& Q, const Vec& x) {
    return residual_norm(Q, x) <= kRankTolScale * (1.0 + x.norm());
}

}  // namespace

SpannerResult barycentric_spanner(const LinearOracle& oracle, int dim, double lambda,
                                  SpannerTrace* trace) {
    if (lambda <= 1.0) throw ConfigError("barycentric_spanner: lambda must exceed 1");
    if (dim < 1) throw ConfigError("barycentric_spanner: dim must be >= 1");

    SpannerResult res;
    res.lambda = lambda;
    res.ambient_dim = dim;

    auto call = [&](const Vec& r) {
        if (trace) ++trace->oracle_calls;
        OraclePoint pt = oracle(r);
        if (pt.point.size() != dim) throw InternalError("oracle returned wrong dimension");
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(pt.point[i])) throw InternalError("oracle returned non-finite point");
        if (!std::isfinite(pt.value)) throw InternalError("oracle returned non-finite value");
        return pt;
    };

    // Phase 0: rank discovery. Scan +/- optima along coordinate axes
    // orthogonalized against the accumulated span; restart the scan after
    // every acceptance. When a full scan adds nothing, both signed optima
    // of every complement direction lie in the span, which certifies that
    // the achievable set does too.
    std::vector<OraclePoint> found;
    Mat Q(dim, 0);
    bool grew = true;
    while (grew && static_cast<int>(found.size()) < dim) {
        grew = false;
        for (int j = 0; j < dim && !grew; ++j) {
            Vec u = Vec::Unit(dim, j);
            if (Q.cols() > 0) u -= Q * (Q.transpose() * u);
            const double un = u.norm();
            if (un <= 1e-12) continue;
            u /= un;
            for (int sign : {+1, -1}) {
                OraclePoint pt = call(sign > 0 ? u : Vec(-u));
                if (!in_span(Q, pt.point)) {
                    Vec q = pt.point;
                    if (Q.cols() > 0) q -= Q * (Q.transpose() * q);
                    q.normalize();
                    Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
                    Q.col(Q.cols() - 1) = q;
                    found.push_back(std::move(pt));
                    grew = true;
                    break;
                }
            }
        }
    }

    const int k = static_cast<int>(found.size());
    if (k == 0) {
        res.embedding = Mat(dim, 0);
        return res;  // achievable set is {0}
    }
    res.embedding = Q;

    auto embed = [&](const Vec& x) -> Vec { return Q.transpose() * x; };
    auto lift = [&](const Vec& y) -> Vec { return Q * y; };

    // Phases 1 and 2 run in the embedded k-dimensional coordinates where
    // the achievable set is full rank.
    Mat M = Mat::Identity(k, k);
    std::vector<OraclePoint> chosen(k);
    std::vector<bool> installed(k, false);

    auto best_signed = [&](const Vec& dir_emb) {
        OraclePoint plus = call(lift(dir_emb));
        OraclePoint minus = call(lift(-dir_emb));
        const double vplus = std::abs(dir_emb.dot(embed(plus.point)));
        const double vminus = std::abs(dir_emb.dot(embed(minus.point)));
        return vplus >= vminus ? plus : minus;
    };

    // Phase 1: replace each identity column by the achievable point
    // maximizing |det| along the cofactor direction of that column.
    for (int i = 0; i < k; ++i) {
        const Vec w = M.transpose().partialPivLu().solve(Vec::Unit(k, i));
        OraclePoint pick = best_signed(w);
        const Vec y = embed(pick.point);
        const double ratio = std::abs(w.dot(y));
        if (!(ratio > 1e-13))
            throw InternalError("spanner initialization found a singular direction");
        M.col(i) = y;
        chosen[i] = std::move(pick);
        installed[i] = true;
    }

    // Phase 2: the swap loop. det(M with col i <- y) / det(M) = <w_i, y>
    // for the unscaled cofactor direction w_i = M^{-T} e_i, so the
    // acceptance test |<w_i, y>| > lambda needs no determinant values.
    const int max_sweeps = 64 * k * k + 64;
    int sweeps = 0;
    bool swapped = true;
    while (swapped) {
        if (++sweeps > max_sweeps) throw InternalError("spanner swap loop failed to terminate");
        swapped = false;
        for (int i = 0; i < k; ++i) {
            const Vec w = M.transpose().partialPivLu().solve(Vec::Unit(k, i));
            OraclePoint pick = best_signed(w);
            const Vec y = embed(pick.point);
            const double ratio = std::abs(w.dot(y));
            if (ratio > lambda) {
                M.col(i) = y;
                chosen[i] = std::move(pick);
                swapped = true;
                if (trace) {
                    trace->swap_ratios.push_back(ratio);
                    trace->log_abs_det += std::log(ratio);
                }
            }
        }
    }

    res.policies.reserve(k);
    res.points.reserve(k);
    for (int i = 0; i < k; ++i) {
        res.policies.push_back(std::move(chosen[i].policy));
        res.points.push_back(std::move(chosen[i].point));
    }
    return res;
}

BarySpannerOutcome bary_spanner_policy(const TabularZMDP& zmdp, int h) {
    const ZSpace& zs = zmdp.zspace();
    const int L = zs.window();
    if (h < 1 || h > zmdp.horizon()) throw ConfigError("bary_spanner_policy: h out of range");
    if (h <= L) return {GeneralPolicy::uniform(), 0};

    const int dim = zs.num_ext_obs();
    const int target = h - L;
    LinearOracle oracle = [&](const Vec& r) -> OraclePoint {
        LinOptResult lo = linear_opt(zmdp, r, h);
        OraclePoint pt;
        pt.value = lo.value;
        if (target == 1) {
            pt.point = Vec::Zero(dim);
        } else {
            pt.point = obs_visitation(zmdp, GeneralPolicy::atom(lo.policy), target);
        }
        pt.policy = std::move(lo.policy);
        return pt;
    };

    SpannerResult sp = barycentric_spanner(oracle, dim, 2.0);
    if (sp.rank() == 0) return {GeneralPolicy::uniform(), 0};

    // Uniform mixture over the spanner policies, padded with repeats of
    // the first policy up to O components.
    std::vector<std::pair<double, GeneralPolicy>> comps;
    const int n = std::max(sp.rank(), zs.num_real_obs());
    comps.reserve(n);
    for (int i = 0; i < n; ++i) {
        const ZPolicy& pol = i < sp.rank() ? sp.policies[i] : sp.policies[0];
        comps.emplace_back(1.0 / n, GeneralPolicy::atom(pol));
    }
    return {GeneralPolicy::mixture(std::move(comps)), sp.rank()};
}

CoefficientReport verify_spanner(const std::vector<Vec>& points, const SpannerResult& spanner,
                                 double bound) {
    const int k = spanner.rank();
    if (k < 1) throw ConfigError("verify_spanner: spanner rank must be >= 1");

    Mat M(k, k);
    for (int i = 0; i < k; ++i) M.col(i) = spanner.embedding.transpose() * spanner.points[i];
    const auto lu = M.partialPivLu();

    CoefficientReport rep;
    rep.max_abs_coefficient = 0.0;
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        const Vec& x = points[idx];
        const Vec alpha = lu.solve(spanner.embedding.transpose() * x);
        Vec recon = Vec::Zero(x.size());
        for (int i = 0; i < k; ++i) recon += alpha[i] * spanner.points[i];
        if ((x - recon).norm() > 1e-7 * (1.0 + x.norm())) {
            rep.span_violations.push_back(static_cast<int>(idx));
            continue;
        }
        rep.max_abs_coefficient = std::max(rep.max_abs_coefficient, alpha.cwiseAbs().maxCoeff());
    }
    rep.within_bound = rep.span_violations.empty() && rep.max_abs_coefficient <= bound;
    return rep;
}

}  // namespace pomdplab
