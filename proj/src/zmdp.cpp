#include "pomdplab/zmdp.hpp"

#include <cmath>
#include <limits>

#include "pomdplab/parallel.hpp"

namespace pomdplab {

void TabularZMDP::set_row(int h, std::uint64_t z, int a, std::vector<double> dist) {
    if (h < 1 || h > horizon_ - 1) throw ConfigError("set_row: step out of range");
    if (static_cast<int>(dist.size()) != zspace_.num_ext_obs())
        throw ConfigError("set_row: distribution has wrong length");
    if (zspace_.contains_sink_obs(z))
        throw InternalError("set_row: windows containing the sink observation must divert");
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0) throw InternalError("set_row: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kArithmeticTol) throw InternalError("set_row: row does not sum to 1");
    rows_[h - 1][key(z, a)] = std::move(dist);
}

void TabularZMDP::set_reward(int h, std::uint64_t z, double r) {
    if (h < 1 || h > horizon_) throw ConfigError("set_reward: step out of range");
    if (zspace_.contains_sink_obs(z) && r != 0.0)
        throw InternalError("set_reward: sink windows carry zero reward");
    rewards_[h - 1][z] = r;
}

namespace {

DpResult dp_impl(const TabularZMDP& zmdp, bool parallel) {
    const ZSpace& zs = zmdp.zspace();
    const int H = zmdp.horizon();
    const int A = zs.num_actions();
    const int Oe = zs.num_ext_obs();

    DpResult res;
    res.policy = ZPolicy(zs, H);
    res.value.assign(H, std::vector<double>(zs.size(), 0.0));

    for (int h = H; h >= 1; --h) {
        const auto states = zs.canonical_states_at_step(h);
        const std::vector<double>* vnext = h < H ? &res.value[h] : nullptr;
        auto evaluate = [&](std::int64_t idx) {
            const std::uint64_t z = states[idx];
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = 0.0;
                if (vnext) {
                    const auto dist = zmdp.next_obs_distribution(h, z, a);
                    for (int o = 0; o < Oe; ++o) {
                        if (dist[o] != 0.0) q += dist[o] * (*vnext)[zs.advance(z, a, o)];
                    }
                }
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            res.value[h - 1][z] = zmdp.reward(h, z) + best;
            res.policy.set(h, z, best_a);
        };
        if (parallel) {
            parallel_for(static_cast<std::int64_t>(states.size()), evaluate);
        } else {
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(states.size()); ++i) evaluate(i);
        }
    }
    res.root_value = res.value[0][zs.all_pad()];
    return res;
}

}  // namespace

DpResult dp_optimal(const TabularZMDP& zmdp) { return dp_impl(zmdp, true); }
DpResult dp_optimal_serial(const TabularZMDP& zmdp) { return dp_impl(zmdp, false); }

std::vector<std::vector<double>> zmdp_occupancy(const TabularZMDP& zmdp,
                                                const ResolvedComponent& comp, int upto) {
    const ZSpace& zs = zmdp.zspace();
    const int A = zs.num_actions();
    const int Oe = zs.num_ext_obs();

    std::vector<std::vector<double>> occ(upto, std::vector<double>(zs.size(), 0.0));
    occ[0][zs.all_pad()] = 1.0;
    for (int h = 1; h < upto; ++h) {
        const auto states = zs.canonical_states_at_step(h);
        for (std::uint64_t z : states) {
            const double mass = occ[h - 1][z];
            if (mass == 0.0) continue;
            const auto& rule = comp.rule(h);
            int table_action = -1;
            if (!rule.uniform) {
                const ZSpace& tzs = rule.table->zspace;
                const std::uint64_t tz = tzs.window() == zs.window() ? z : zs.translate(z, tzs, h);
                table_action = rule.table->act(h, tz);
            }
            for (int a = 0; a < A; ++a) {
                double pa;
                if (rule.uniform) {
                    pa = 1.0 / A;
                } else {
                    pa = (table_action == a) ? 1.0 : 0.0;
                }
                if (pa == 0.0) continue;
                const auto dist = zmdp.next_obs_distribution(h, z, a);
                for (int o = 0; o < Oe; ++o) {
                    if (dist[o] != 0.0) occ[h][zs.advance(z, a, o)] += mass * pa * dist[o];
                }
            }
        }
    }
    return occ;
}

Vec obs_visitation(const TabularZMDP& zmdp, const GeneralPolicy& policy, int h) {
    if (h < 2 || h > zmdp.horizon())
        throw ConfigError("obs_visitation: defined for 2 <= h <= H (no observation at step 1)");
    const ZSpace& zs = zmdp.zspace();
    Vec d = Vec::Zero(zs.num_ext_obs());
    for (const auto& [w, comp] : resolve_all(policy, zmdp.horizon())) {
        const auto occ = zmdp_occupancy(zmdp, comp, h);
        for (std::uint64_t z : zs.canonical_states_at_step(h)) {
            if (occ[h - 1][z] != 0.0) d[zs.last_obs(z)] += w * occ[h - 1][z];
        }
    }
    return d;
}

LinOptResult linear_opt(const TabularZMDP& zmdp, const Vec& r, int h) {
    const ZSpace& zs = zmdp.zspace();
    const int target = h - zs.window();
    if (target < 1) throw ConfigError("linear_opt: effective target step h-L must be >= 1");
    if (r.size() != zs.num_ext_obs()) throw ConfigError("linear_opt: r has wrong length");
    for (int i = 0; i < r.size(); ++i)
        if (!std::isfinite(r[i])) throw ConfigError("linear_opt: r must be finite");

    LinOptResult res;
    res.policy = ZPolicy(zs, zmdp.horizon());
    if (target == 1) {
        // The step-1 window carries no observation; every policy achieves
        // the zero vector.
        res.value = 0.0;
        return res;
    }

    const int A = zs.num_actions();
    const int Oe = zs.num_ext_obs();
    std::vector<double> next(zs.size(), 0.0);
    for (std::uint64_t z : zs.canonical_states_at_step(target)) next[z] = r[zs.last_obs(z)];

    for (int u = target - 1; u >= 1; --u) {
        std::vector<double> cur(zs.size(), 0.0);
        for (std::uint64_t z : zs.canonical_states_at_step(u)) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = 0.0;
                const auto dist = zmdp.next_obs_distribution(u, z, a);
                for (int o = 0; o < Oe; ++o) {
                    if (dist[o] != 0.0) q += dist[o] * next[zs.advance(z, a, o)];
                }
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            cur[z] = best;
            res.policy.set(u, z, best_a);
        }
        next = std::move(cur);
    }
    res.value = next[zs.all_pad()];
    return res;
}

double zmdp_policy_value(const TabularZMDP& zmdp, const GeneralPolicy& policy) {
    const ZSpace& zs = zmdp.zspace();
    const int H = zmdp.horizon();
    double value = 0.0;
    for (const auto& [w, comp] : resolve_all(policy, H)) {
        const auto occ = zmdp_occupancy(zmdp, comp, H);
        double v = 0.0;
        // Accumulate in canonical state order so the sum is reproducible.
        for (int h = 1; h <= H; ++h) {
            for (std::uint64_t z : zs.canonical_states_at_step(h)) {
                const double m = occ[h - 1][z];
                if (m != 0.0) v += m * zmdp.reward(h, z);
            }
        }
        value += w * v;
    }
    return value;
}

}  // namespace pomdplab
