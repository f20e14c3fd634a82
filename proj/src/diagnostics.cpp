#include "pomdplab/diagnostics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pomdplab/simulator.hpp"

namespace pomdplab {

namespace {

int policy_window(const GeneralPolicy::NodePtr& node) {
    using Kind = GeneralPolicy::Kind;
    switch (node->kind) {
        case Kind::Uniform:
            return 0;
        case Kind::Atom:
            return node->atom->zspace.window();
        case Kind::PrefixUniform:
            return policy_window(node->base);
        case Kind::Mixture: {
            int w = 0;
            for (const auto& c : node->components) w = std::max(w, policy_window(c.node));
            return w;
        }
    }
    return 0;
}

// Occupancy over (latent state, window) for one resolved component.
std::vector<std::vector<double>> component_occupancy(const PomdpModel& model, const ZSpace& zs,
                                                     const ResolvedComponent& comp) {
    const int H = model.horizon;
    const int S = model.num_states();
    const int A = model.num_actions();
    const int O = model.num_obs();
    const std::size_t zsize = zs.size();

    std::vector<std::vector<double>> occ(H, std::vector<double>(S * zsize, 0.0));
    for (int s = 0; s < S; ++s) occ[0][s * zsize + zs.all_pad()] = model.b1[s];

    for (int h = 1; h < H; ++h) {
        const auto states = zs.canonical_states_at_step(h);
        const auto& rule = comp.rule(h);
        for (std::uint64_t z : states) {
            int table_action = -1;
            if (!rule.uniform) {
                const ZSpace& tzs = rule.table->zspace;
                const std::uint64_t tz = tzs.window() == zs.window() ? z : zs.translate(z, tzs, h);
                table_action = rule.table->act(h, tz);
            }
            for (int s = 0; s < S; ++s) {
                const double mass = occ[h - 1][s * zsize + z];
                if (mass == 0.0) continue;
                for (int a = 0; a < A; ++a) {
                    double pa;
                    if (rule.uniform) {
                        pa = 1.0 / A;
                    } else {
                        pa = (table_action == a) ? 1.0 : 0.0;
                    }
                    if (pa == 0.0) continue;
                    const auto& Ta = model.trans(h, a);
                    const auto& Oh = model.obs(h + 1);
                    for (int sn = 0; sn < S; ++sn) {
                        const double pt = Ta(sn, s);
                        if (pt == 0.0) continue;
                        const double base = mass * pa * pt;
                        for (int o = 0; o < O; ++o) {
                            const double po = Oh(o, sn);
                            if (po == 0.0) continue;
                            occ[h][sn * zsize + zs.advance(z, a, o)] += base * po;
                        }
                    }
                }
            }
        }
    }
    return occ;
}

}  // namespace

JointOccupancy joint_occupancy(const PomdpModel& model, const GeneralPolicy& policy, int L) {
    model.require_extended();
    L = std::max({1, L, policy_window(policy.node())});
    const ZSpace zs(model.num_actions(), model.num_core_obs(), L);

    JointOccupancy jo;
    jo.zspace = zs;
    jo.num_states = model.num_states();
    jo.occ.assign(model.horizon, std::vector<double>(model.num_states() * zs.size(), 0.0));

    for (const auto& [w, comp] : resolve_all(policy, model.horizon)) {
        const auto occ = component_occupancy(model, zs, comp);
        for (int h = 0; h < model.horizon; ++h)
            for (std::size_t i = 0; i < occ[h].size(); ++i) jo.occ[h][i] += w * occ[h][i];
    }
    return jo;
}

Vec visitation(const PomdpModel& model, const GeneralPolicy& policy, int h, VisitationKind kind,
               int L) {
    if (h < 1 || h > model.horizon) throw ConfigError("visitation: h out of range");
    if (kind == VisitationKind::Observation && h < 2)
        throw ConfigError("visitation: no observation at step 1");
    const JointOccupancy jo = joint_occupancy(model, policy, L);
    const ZSpace& zs = jo.zspace;
    const std::size_t zsize = zs.size();
    const int S = jo.num_states;

    switch (kind) {
        case VisitationKind::State: {
            Vec d = Vec::Zero(S);
            for (int s = 0; s < S; ++s)
                for (std::uint64_t z : zs.canonical_states_at_step(h))
                    d[s] += jo.occ[h - 1][s * zsize + z];
            return d;
        }
        case VisitationKind::Observation: {
            Vec d = Vec::Zero(model.num_obs());
            for (int s = 0; s < S; ++s)
                for (std::uint64_t z : zs.canonical_states_at_step(h)) {
                    const double m = jo.occ[h - 1][s * zsize + z];
                    if (m != 0.0) d[zs.last_obs(z)] += m;
                }
            return d;
        }
        case VisitationKind::ZState: {
            // Project to the requested window length when the occupancy
            // was tracked on a longer one.
            const ZSpace out =
                (L > 0 && L < zs.window()) ? ZSpace(zs.num_actions(), zs.num_real_obs(), L) : zs;
            Vec d = Vec::Zero(out.size());
            for (std::uint64_t z : zs.canonical_states_at_step(h)) {
                double m = 0.0;
                for (int s = 0; s < S; ++s) m += jo.occ[h - 1][s * zsize + z];
                if (m != 0.0)
                    d[out.window() == zs.window() ? z : zs.translate(z, out, h)] += m;
            }
            return d;
        }
    }
    throw InternalError("unreachable visitation kind");
}

double exact_policy_value(const PomdpModel& model, const GeneralPolicy& policy) {
    model.require_extended();
    const int L = std::max(1, policy_window(policy.node()));
    const ZSpace zs(model.num_actions(), model.num_core_obs(), L);
    const int H = model.horizon;
    const std::size_t zsize = zs.size();

    double value = 0.0;
    for (const auto& [w, comp] : resolve_all(policy, H)) {
        const auto occ = component_occupancy(model, zs, comp);
        double v = 0.0;
        for (int h = 2; h <= H; ++h) {
            for (std::uint64_t z : zs.canonical_states_at_step(h)) {
                const int o = zs.last_obs(z);
                for (int s = 0; s < model.num_states(); ++s) {
                    const double m = occ[h - 1][s * zsize + z];
                    if (m != 0.0) v += m * model.reward(h, o);
                }
            }
        }
        value += w * v;
    }
    return value;
}

namespace {

struct OptSearch {
    const PomdpModel* model;
    std::int64_t max_histories;
    std::int64_t seen = 0;
    std::map<std::vector<int>, int> actions;

    double go(const Vec& b, int h, std::vector<int>& hist) {
        if (++seen > max_histories)
            throw DeskScaleError("exact_optimal_value: history tree exceeds the desk-scale bound");
        const int H = model->horizon;
        if (h == H) return 0.0;
        const int A = model->num_actions();
        const int O = model->num_obs();

        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < A; ++a) {
            const Vec pushed = model->trans(h, a) * b;
            double q = 0.0;
            for (int o = 0; o < O; ++o) {
                Vec numer = model->obs(h + 1).row(o).transpose().cwiseProduct(pushed);
                const double p = numer.sum();
                if (p < kBeliefFloor) continue;
                hist.push_back(a);
                hist.push_back(o);
                q += p * (model->reward(h + 1, o) + go(numer / p, h + 1, hist));
                hist.pop_back();
                hist.pop_back();
            }
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        actions[hist] = best_a;
        return best;
    }
};

}  // namespace

OptimalValueResult exact_optimal_value(const PomdpModel& model, std::int64_t max_histories) {
    model.require_extended();
    OptSearch search{&model, max_histories, 0, {}};
    std::vector<int> hist;
    OptimalValueResult res;
    res.value = search.go(model.b1, 1, hist);
    res.actions = std::move(search.actions);
    res.histories = search.seen;
    return res;
}

TabularZMDP tilde_mdp(const PomdpModel& model, const std::vector<GeneralPolicy>& pis, int L) {
    model.require_extended();
    const int H = model.horizon;
    if (static_cast<int>(pis.size()) != H) throw ConfigError("tilde_mdp: need one policy per step");
    const ZSpace zs(model.num_actions(), model.num_core_obs(), L);
    TabularZMDP out(zs, H);

    for (int h = 1; h <= H - 1; ++h) {
        Vec prior;
        if (h - L > 1) prior = visitation(model, pis[h - 1], h - L, VisitationKind::State);

        for (std::uint64_t z : zs.canonical_states_at_step(h)) {
            if (zs.contains_sink_obs(z)) continue;  // diverts by default
            // Decode the window, oldest pair first.
            const int real = zs.real_pairs_at_step(h);
            std::vector<int> wa(real), wo(real);
            for (int age = 0; age < real; ++age) {
                auto [a, o] = zs.pair_at(z, age);
                wa[real - 1 - age] = a;
                wo[real - 1 - age] = o;
            }
            const Belief btilde = approx_belief(model, prior, wa, wo, h, L);
            for (int a = 0; a < model.num_actions(); ++a) {
                const Vec dist = model.obs(h + 1) * (model.trans(h, a) * btilde.p);
                std::vector<double> row(dist.data(), dist.data() + dist.size());
                out.set_row(h, z, a, std::move(row));
            }
        }
    }
    return out;
}

PomdpModel truncated_pomdp(const PomdpModel& model, const std::vector<GeneralPolicy>& pis,
                           double phi, int h_prime, int L) {
    model.require_extended();
    const int H = model.horizon;
    if (h_prime > H) throw ConfigError("truncated_pomdp: H' must be <= H");
    if (static_cast<int>(pis.size()) != H)
        throw ConfigError("truncated_pomdp: need one policy per step");

    PomdpModel cur = model;
    for (int hpp = L + 1; hpp <= h_prime; ++hpp) {
        const int target = hpp - L;  // step whose underexplored states get cut off
        const Vec d = visitation(cur, pis[hpp - 1], target, VisitationKind::State);
        std::vector<int> cut;
        for (int s = 0; s < cur.num_core_states(); ++s)
            if (d[s] < phi) cut.push_back(s);
        if (cut.empty()) continue;

        if (target == 1) {
            for (int s : cut) {
                cur.b1[cur.sink_state()] += cur.b1[s];
                cur.b1[s] = 0.0;
            }
        } else {
            const int t = target - 1;  // transition step feeding the target step
            for (int a = 0; a < cur.num_actions(); ++a) {
                Mat& Ta = cur.trans(t, a);
                for (int s : cut) {
                    Ta.row(cur.sink_state()) += Ta.row(s);
                    Ta.row(s).setZero();
                }
            }
        }
    }
    return cur;
}

std::vector<int> underexplored_set(const PomdpModel& model, const GeneralPolicy& policy,
                                   double phi, int h) {
    const Vec d = visitation(model, policy, h, VisitationKind::State);
    std::vector<int> out;
    for (int s = 0; s < model.num_core_states(); ++s)
        if (d[s] < phi) out.push_back(s);
    return out;
}

std::vector<std::uint64_t> zlow_set(const PomdpModel& model, const GeneralPolicy& policy,
                                    double zeta, int h, int L) {
    model.require_extended();
    const int L_occ = std::max({1, L, policy_window(policy.node())});
    const ZSpace zs_occ(model.num_actions(), model.num_core_obs(), L_occ);
    const ZSpace zs_out(model.num_actions(), model.num_core_obs(), L);
    const std::size_t zsize = zs_occ.size();

    std::vector<double> d(zs_out.size(), 0.0);
    for (const auto& [w, comp] : resolve_all(policy, model.horizon)) {
        const auto occ = component_occupancy(model, zs_occ, comp);
        for (std::uint64_t z : zs_occ.canonical_states_at_step(h)) {
            double m = 0.0;
            for (int s = 0; s < model.num_states(); ++s) m += occ[h - 1][s * zsize + z];
            if (m != 0.0) d[zs_occ.translate(z, zs_out, h)] += w * m;
        }
    }
    std::vector<std::uint64_t> out;
    for (std::uint64_t z : zs_out.canonical_states_at_step(h))
        if (d[z] <= zeta) out.push_back(z);
    return out;
}

Mat pseudo_inverse(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-10 * sv[0] : 0.0;
    Vec inv = Vec::Zero(sv.size());
    for (int i = 0; i < sv.size(); ++i) inv[i] = sv[i] > cutoff ? 1.0 / sv[i] : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vec latent_estimate(const TabularZMDP& zmdp, const GeneralPolicy& policy, int h, const Mat& Ob_h) {
    const Vec d = obs_visitation(zmdp, policy, h);
    if (Ob_h.rows() != d.size()) throw ConfigError("latent_estimate: Ob_h has wrong shape");
    return pseudo_inverse(Ob_h) * d;
}

std::vector<ContractionPoint> contraction_profile(const PomdpModel& model,
                                                  const GeneralPolicy& policy, const Vec& prior,
                                                  const std::vector<int>& Ls, int h, int n,
                                                  std::uint64_t seed) {
    model.require_extended();
    if (h < 2 || h > model.horizon) throw ConfigError("contraction_profile: h out of range");
    if (n < 1) throw ConfigError("contraction_profile: need n >= 1");

    const auto batch = rollout_batch(model, policy, n, seed, "contraction");
    std::vector<ContractionPoint> out;
    out.reserve(Ls.size());
    for (int L : Ls) {
        double sum = 0.0, sumsq = 0.0;
        for (const auto& tr : batch) {
            const std::vector<int> acts(tr.observed.actions.begin(),
                                        tr.observed.actions.begin() + (h - 1));
            const std::vector<int> obs(tr.observed.observations.begin(),
                                       tr.observed.observations.begin() + (h - 1));
            const Belief exact = exact_belief(model, acts, obs);
            const int win = std::min(L, h - 1);
            const std::vector<int> wa(acts.end() - win, acts.end());
            const std::vector<int> wo(obs.end() - win, obs.end());
            const Belief approx = approx_belief(model, prior, wa, wo, h, L);
            const double err = (exact.p - approx.p).lpNorm<1>();
            sum += err;
            sumsq += err * err;
        }
        const double mean = sum / n;
        const double var = std::max(0.0, sumsq / n - mean * mean);
        out.push_back({L, mean, std::sqrt(var / n)});
    }
    return out;
}

std::string underexplored_listing_csv(const PomdpModel& model, const GeneralPolicy& policy,
                                      double phi) {
    std::string csv = "h,state,visitation\n";
    for (int h = 1; h <= model.horizon; ++h) {
        const Vec d = visitation(model, policy, h, VisitationKind::State);
        for (int s : underexplored_set(model, policy, phi, h))
            csv += std::to_string(h) + "," + model.state_labels[s] + "," +
                   std::to_string(d[s]) + "\n";
    }
    return csv;
}

std::string zlow_listing_csv(const PomdpModel& model, const GeneralPolicy& policy, double zeta,
                             int L) {
    std::string csv = "h,z_index,visitation\n";
    for (int h = 1; h <= model.horizon; ++h) {
        const Vec d = visitation(model, policy, h, VisitationKind::ZState, L);
        for (std::uint64_t z : zlow_set(model, policy, zeta, h, L))
            csv += std::to_string(h) + "," + std::to_string(z) + "," + std::to_string(d[z]) +
                   "\n";
    }
    return csv;
}

}  // namespace pomdplab
