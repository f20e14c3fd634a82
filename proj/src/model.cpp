#include "pomdplab/model.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "pomdplab/lp.hpp"
#include "pomdplab/parallel.hpp"
#include "pomdplab/rng.hpp"

namespace pomdplab {

namespace {

std::string idx3(int h, int a, int s) {
    std::ostringstream os;
    os << "(h=" << h << ",a=" << a << ",s=" << s << ")";
    return os.str();
}

bool column_is_stochastic(const Vec& col, std::string* why) {
    double sum = 0.0;
    for (int i = 0; i < col.size(); ++i) {
        if (col[i] < 0.0) {
            *why = "negative entry";
            return false;
        }
        sum += col[i];
    }
    if (std::abs(sum - 1.0) > kValidationTol) {
        std::ostringstream os;
        os << "column sums to " << sum;
        *why = os.str();
        return false;
    }
    return true;
}

}  // namespace

ValidationReport validate_model(const PomdpModel& m) {
    ValidationReport rep;
    const int S = m.num_states(), A = m.num_actions(), O = m.num_obs(), H = m.horizon;

    if (H < 2) rep.error("horizon", "horizon must be >= 2");
    if (S < 1 || A < 1 || O < 1) rep.error("shape", "empty state/action/observation set");
    if (m.b1.size() != S) rep.error("b1", "wrong length");
    if (static_cast<int>(m.T.size()) != std::max(H - 1, 0)) rep.error("T", "expected H-1 step tables");
    if (static_cast<int>(m.Ob.size()) != std::max(H - 1, 0)) rep.error("Ob", "expected H-1 step tables (steps 2..H)");
    if (static_cast<int>(m.R.size()) != std::max(H - 1, 0)) rep.error("R", "expected H-1 step tables (steps 2..H)");
    if (!rep.pass()) return rep;

    std::string why;
    double b1sum = 0.0;
    for (int s = 0; s < S; ++s) {
        if (m.b1[s] < 0.0) rep.error("b1", "negative entry at s=" + std::to_string(s));
        b1sum += m.b1[s];
    }
    if (std::abs(b1sum - 1.0) > kValidationTol) rep.error("b1", "sums to " + std::to_string(b1sum));

    for (int h = 1; h <= H - 1; ++h) {
        if (static_cast<int>(m.T[h - 1].size()) != A) {
            rep.error("T[h=" + std::to_string(h) + "]", "expected one matrix per action");
            continue;
        }
        for (int a = 0; a < A; ++a) {
            const Mat& Ta = m.trans(h, a);
            if (Ta.rows() != S || Ta.cols() != S) {
                rep.error("T" + idx3(h, a, -1), "wrong shape");
                continue;
            }
            for (int s = 0; s < S; ++s) {
                if (!column_is_stochastic(Ta.col(s), &why)) rep.error("T" + idx3(h, a, s), why);
            }
        }
    }
    for (int h = 2; h <= H; ++h) {
        const Mat& Oh = m.obs(h);
        if (Oh.rows() != O || Oh.cols() != S) {
            rep.error("Ob(h=" + std::to_string(h) + ")", "wrong shape");
            continue;
        }
        for (int s = 0; s < S; ++s) {
            if (!column_is_stochastic(Oh.col(s), &why))
                rep.error("Ob(h=" + std::to_string(h) + ",s=" + std::to_string(s) + ")", why);
        }
        if (m.R[h - 2].size() != O) {
            rep.error("R(h=" + std::to_string(h) + ")", "wrong length");
            continue;
        }
        for (int o = 0; o < O; ++o) {
            const double r = m.reward(h, o);
            if (r < 0.0 || r > 1.0)
                rep.error("R(h=" + std::to_string(h) + ",o=" + std::to_string(o) + ")",
                          "reward outside [0,1]");
        }
    }

    if (m.extended) {
        const int ss = m.sink_state(), so = m.sink_obs();
        for (int h = 1; h <= H - 1; ++h)
            for (int a = 0; a < A; ++a)
                if (std::abs(m.trans(h, a)(ss, ss) - 1.0) > kValidationTol)
                    rep.error("T" + idx3(h, a, ss), "sink state not absorbing");
        for (int h = 2; h <= H; ++h) {
            if (std::abs(m.obs(h)(so, ss) - 1.0) > kValidationTol)
                rep.error("Ob(h=" + std::to_string(h) + ")", "sink state must emit the sink observation");
            if (m.reward(h, so) != 0.0)
                rep.error("R(h=" + std::to_string(h) + ")", "sink observation reward must be 0");
        }
    }
    return rep;
}

PomdpModel extend_with_sinks(const PomdpModel& model) {
    if (model.extended) return model;
    ValidationReport rep = validate_model(model);
    if (!rep.pass()) {
        std::string msg = "cannot sink-extend an invalid model:";
        for (const auto& e : rep.entries)
            if (e.severity == Severity::Error) msg += " [" + e.location + "] " + e.message + ";";
        throw ModelValidationError(msg);
    }

    PomdpModel m;
    const int S = model.num_states(), A = model.num_actions(), O = model.num_obs();
    m.horizon = model.horizon;
    m.state_labels = model.state_labels;
    m.state_labels.push_back("__sink__");
    m.action_labels = model.action_labels;
    m.obs_labels = model.obs_labels;
    m.obs_labels.push_back("__sink__");
    m.extended = true;

    m.b1 = Vec::Zero(S + 1);
    m.b1.head(S) = model.b1;

    m.T.resize(model.T.size());
    for (std::size_t hi = 0; hi < model.T.size(); ++hi) {
        m.T[hi].resize(A);
        for (int a = 0; a < A; ++a) {
            Mat t = Mat::Zero(S + 1, S + 1);
            t.topLeftCorner(S, S) = model.T[hi][a];
            t(S, S) = 1.0;
            m.T[hi][a] = std::move(t);
        }
    }
    m.Ob.resize(model.Ob.size());
    m.R.resize(model.R.size());
    for (std::size_t hi = 0; hi < model.Ob.size(); ++hi) {
        Mat ob = Mat::Zero(O + 1, S + 1);
        ob.topLeftCorner(O, S) = model.Ob[hi];
        ob(O, S) = 1.0;
        m.Ob[hi] = std::move(ob);
        Vec r = Vec::Zero(O + 1);
        r.head(O) = model.R[hi];
        m.R[hi] = std::move(r);
    }
    return m;
}

Belief belief_update(const PomdpModel& model, const Belief& belief, int a, int o) {
    const int h = belief.step;
    if (h < 1 || h > model.horizon - 1) throw ConfigError("belief_update: step out of range");
    const Vec pushed = model.trans(h, a) * belief.p;
    Vec numer = model.obs(h + 1).row(o).transpose().cwiseProduct(pushed);
    const double norm = numer.sum();
    Belief out;
    out.step = h + 1;
    if (norm < kBeliefFloor) {
        model.require_extended();
        out.p = Vec::Zero(model.num_states());
        out.p[model.sink_state()] = 1.0;
        return out;
    }
    out.p = numer / norm;
    return out;
}

Belief exact_belief(const PomdpModel& model, const std::vector<int>& actions,
                    const std::vector<int>& observations) {
    if (actions.size() != observations.size()) throw ConfigError("exact_belief: history length mismatch");
    const int h = static_cast<int>(actions.size()) + 1;
    if (h > model.horizon) throw ConfigError("exact_belief: history longer than horizon");
    Belief b{model.b1, 1};
    for (int i = 0; i < h - 1; ++i) b = belief_update(model, b, actions[i], observations[i]);
    return b;
}

Belief approx_belief(const PomdpModel& model, const Vec& prior, const std::vector<int>& actions,
                     const std::vector<int>& observations, int h, int L) {
    if (L < 0 || h < 1 || h > model.horizon) throw ConfigError("approx_belief: bad h or L");
    const int win = std::min(L, h - 1);
    if (static_cast<int>(actions.size()) != win || static_cast<int>(observations.size()) != win)
        throw ConfigError("approx_belief: window must have length min(L, h-1)");
    Belief b;
    if (h - L > 1) {
        if (prior.size() != model.num_states()) throw ConfigError("approx_belief: prior has wrong length");
        b = Belief{prior, h - L};
    } else {
        b = Belief{model.b1, 1};
    }
    for (int i = 0; i < win; ++i) b = belief_update(model, b, actions[i], observations[i]);
    return b;
}

namespace {

// min ||Ob (p - q)||_1 with p supported on P, q on Q, p,q >= 0 and
// sum(p) = sum(q) = 1/2; the absolute values are split into u - v rows.
// With ||p - q||_1 = 1 the LP value is the ratio directly.
std::optional<LpSolution> bipartition_lp(const Mat& Ob, const std::vector<int>& P,
                                         const std::vector<int>& Q) {
    const int O = static_cast<int>(Ob.rows());
    const int np = static_cast<int>(P.size()), nq = static_cast<int>(Q.size());
    const int n = np + nq + 2 * O;
    const int mrows = O + 2;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(mrows, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mrows);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);

    for (int o = 0; o < O; ++o) {
        for (int i = 0; i < np; ++i) A(o, i) = Ob(o, P[i]);
        for (int j = 0; j < nq; ++j) A(o, np + j) = -Ob(o, Q[j]);
        A(o, np + nq + o) = -1.0;      // u_o
        A(o, np + nq + O + o) = 1.0;   // v_o
        c[np + nq + o] = 1.0;
        c[np + nq + O + o] = 1.0;
    }
    for (int i = 0; i < np; ++i) A(O, i) = 1.0;
    b[O] = 0.5;
    for (int j = 0; j < nq; ++j) A(O + 1, np + j) = 1.0;
    b[O + 1] = 0.5;

    return solve_equality_lp(A, b, c);
}

MarginResult margin_impl(const PomdpModel& model, int h, bool parallel) {
    if (h < 2 || h > model.horizon) throw ConfigError("observability_margin: h out of range");
    const int Sn = model.num_core_states();
    if (Sn > kMarginExactStateLimit)
        throw DeskScaleError("exact margin requires desk-scale S (<= " +
                             std::to_string(kMarginExactStateLimit) +
                             " non-sink states); use the sampled mode");
    if (Sn < 2) throw ConfigError("observability_margin: need at least 2 states");
    const Mat& Ob = model.obs(h);

    const std::uint64_t nmask = (1ULL << (Sn - 1));  // state 0 pinned to P
    struct Best {
        double gamma;
        std::uint64_t mask;
    };
    Best best{std::numeric_limits<double>::infinity(), 0};

    auto eval_mask = [&](std::uint64_t bits) -> double {
        std::vector<int> P, Q;
        P.push_back(0);
        for (int s = 1; s < Sn; ++s) ((bits >> (s - 1)) & 1 ? P : Q).push_back(s);
        auto sol = bipartition_lp(Ob, P, Q);
        if (!sol) throw InternalError("margin bipartition LP infeasible");
        return sol->objective;
    };

    // Lexicographic (gamma, mask) minimum is order-free, so the parallel
    // per-thread reduction is bit-identical to the serial scan.
    auto better = [](const Best& cand, const Best& cur) {
        return cand.gamma < cur.gamma || (cand.gamma == cur.gamma && cand.mask < cur.mask);
    };
    const std::int64_t total = static_cast<std::int64_t>(nmask) - 1;  // bits in 0..nmask-2, Q nonempty
    if (parallel) {
        const int nt = max_threads();
        std::vector<Best> local(nt, best);
        parallel_for(total, [&](std::int64_t it) {
            const Best cand{eval_mask(static_cast<std::uint64_t>(it)), static_cast<std::uint64_t>(it)};
            Best& mine = local[omp_thread_index()];
            if (better(cand, mine)) mine = cand;
        });
        for (const Best& cand : local)
            if (better(cand, best)) best = cand;
    } else {
        for (std::int64_t it = 0; it < total; ++it) {
            const Best cand{eval_mask(static_cast<std::uint64_t>(it)), static_cast<std::uint64_t>(it)};
            if (better(cand, best)) best = cand;
        }
    }

    // Reconstruct the minimizing direction for the winning bipartition.
    std::vector<int> P, Q;
    P.push_back(0);
    for (int s = 1; s < Sn; ++s) ((best.mask >> (s - 1)) & 1 ? P : Q).push_back(s);
    auto sol = bipartition_lp(Ob, P, Q);
    if (!sol) throw InternalError("margin bipartition LP infeasible");

    MarginResult res;
    res.gamma = best.gamma;
    res.minimizer = Vec::Zero(model.num_states());
    for (std::size_t i = 0; i < P.size(); ++i) res.minimizer[P[i]] += sol->x[i];
    for (std::size_t j = 0; j < Q.size(); ++j) res.minimizer[Q[j]] -= sol->x[P.size() + j];
    return res;
}

}  // namespace

MarginResult observability_margin(const PomdpModel& model, int h) { return margin_impl(model, h, true); }

MarginResult observability_margin_serial(const PomdpModel& model, int h) {
    return margin_impl(model, h, false);
}

double observability_margin_sampled(const PomdpModel& model, int h, int samples, std::uint64_t seed) {
    if (h < 2 || h > model.horizon) throw ConfigError("observability_margin_sampled: h out of range");
    const int Sn = model.num_core_states();
    const Mat& Ob = model.obs(h);
    Stream stream(seed);
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < samples; ++it) {
        Vec x = Vec::Zero(model.num_states());
        for (int s = 0; s < Sn; ++s) x[s] = stream.uniform01() - 0.5;
        x.head(Sn).array() -= x.head(Sn).mean();
        const double norm = x.lpNorm<1>();
        if (norm < 1e-12) continue;
        best = std::min(best, (Ob * (x / norm)).lpNorm<1>());
    }
    return best;
}

}  // namespace pomdplab
