#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pomdplab/diagnostics.hpp"
#include "pomdplab/generator.hpp"
#include "pomdplab/simulator.hpp"
#include "test_util.hpp"

using namespace pomdplab;
using testutil::random_model;
using testutil::random_zpolicy;

namespace {

// Optimum of an identity-observation model. From step 2 on the state is
// observed (o_h = s_h), so values are tabular; at step 1 no observation
// exists yet and the action can only depend on b1.
double tabular_mdp_optimum(const PomdpModel& m) {
    const int S = m.num_states();
    Vec v = Vec::Zero(S);  // V_{h} for h = H..2
    for (int h = m.horizon - 1; h >= 2; --h) {
        Vec next(S);
        for (int s = 0; s < S; ++s) {
            double best = -1e300;
            for (int a = 0; a < m.num_actions(); ++a) {
                double q = 0.0;
                for (int sn = 0; sn < S; ++sn) {
                    const double pt = m.trans(h, a)(sn, s);
                    if (pt > 0.0) q += pt * (m.reward(h + 1, sn) + v[sn]);
                }
                best = std::max(best, q);
            }
            next[s] = best;
        }
        v = std::move(next);
    }
    double best = -1e300;
    for (int a = 0; a < m.num_actions(); ++a) {
        double q = 0.0;
        for (int s = 0; s < S; ++s)
            for (int sn = 0; sn < S; ++sn)
                q += m.b1[s] * m.trans(1, a)(sn, s) * (m.reward(2, sn) + v[sn]);
        best = std::max(best, q);
    }
    return best;
}

// States reachable with positive probability at each step under *some*
// policy: support reachability over the transition tables.
std::vector<std::vector<bool>> support_reachable(const PomdpModel& m) {
    std::vector<std::vector<bool>> reach(m.horizon, std::vector<bool>(m.num_states(), false));
    for (int s = 0; s < m.num_states(); ++s) reach[0][s] = m.b1[s] > 0.0;
    for (int h = 1; h < m.horizon; ++h)
        for (int s = 0; s < m.num_states(); ++s) {
            if (!reach[h - 1][s]) continue;
            for (int a = 0; a < m.num_actions(); ++a)
                for (int sn = 0; sn < m.num_states(); ++sn)
                    if (m.trans(h, a)(sn, s) > 0.0) reach[h][sn] = true;
        }
    return reach;
}

double path_probability(const PomdpModel& m, const oracle::Path& p) {
    double prob = m.b1[p.states[0]];
    for (std::size_t i = 0; i + 1 < p.states.size() && prob > 0.0; ++i) {
        const int h = static_cast<int>(i) + 1;
        prob *= m.trans(h, p.actions[i])(p.states[i + 1], p.states[i]);
        prob *= m.obs(h + 1)(p.observations[i], p.states[i + 1]);
    }
    return prob;
}

}  // namespace

TEST_CASE("exact_policy_value matches full-history enumeration") {
    // zero rewards
    PomdpModel zero = random_model(2, 2, 2, 3, 1);
    for (auto& r : zero.R) r.setZero();
    CHECK(exact_policy_value(zero, GeneralPolicy::uniform()) == 0.0);

    // deterministic chain: value is the sum of rewards along the cycle
    const PomdpModel chain = testutil::deterministic_chain(3, 1, 4);
    const double expect = chain.reward(2, 1) + chain.reward(3, 2) + chain.reward(4, 0);
    CHECK(exact_policy_value(chain, GeneralPolicy::uniform()) == doctest::Approx(expect));

    // random micro models and mixed policies against the oracle
    const ZSpace zs(2, 2, 1);
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        const PomdpModel m = random_model(2, 2, 2, 3, seed);
        const GeneralPolicy pol = GeneralPolicy::mixture(
            {{0.25, GeneralPolicy::uniform()},
             {0.5, GeneralPolicy::atom(random_zpolicy(zs, 3, seed))},
             {0.25, GeneralPolicy::prefix_then_uniform(
                        GeneralPolicy::atom(random_zpolicy(zs, 3, seed + 50)), 2)}});
        CHECK(exact_policy_value(m, pol) ==
              doctest::Approx(oracle::policy_value(m, pol)).epsilon(1e-10));
    }
}

TEST_CASE("exact_optimal_value roof, oracle agreement, and desk-scale bound") {
    PomdpModel zero = random_model(2, 2, 2, 3, 21);
    for (auto& r : zero.R) r.setZero();
    CHECK(exact_optimal_value(zero).value == doctest::Approx(0.0));

    // fully observable model: equals the tabular optimum
    const PomdpModel mdp = testutil::deterministic_chain(3, 2, 4);
    CHECK(exact_optimal_value(mdp).value == doctest::Approx(tabular_mdp_optimum(mdp)).epsilon(1e-12));
    PomdpModel ident =
        extend_with_sinks(generate_model(3, 2, 3, 4, 1.0, GenStructure::NoisyPermutation, 23));
    CHECK(exact_optimal_value(ident).value ==
          doctest::Approx(tabular_mdp_optimum(ident)).epsilon(1e-9));

    // single action: optimum equals the value of the only policy
    const PomdpModel solo = random_model(2, 1, 2, 3, 25);
    CHECK(exact_optimal_value(solo).value ==
          doctest::Approx(exact_policy_value(solo, GeneralPolicy::uniform())).epsilon(1e-10));

    // brute-force history recursion on random micro models
    for (std::uint64_t seed : {31ull, 32ull}) {
        const PomdpModel m = random_model(2, 2, 2, 3, seed);
        const OptimalValueResult res = exact_optimal_value(m);
        CHECK(res.value == doctest::Approx(oracle::optimal_value(m)).epsilon(1e-9));
        // the optimum dominates sampled policies
        for (int i = 0; i < 20; ++i) {
            const GeneralPolicy pi =
                GeneralPolicy::atom(random_zpolicy(ZSpace(2, 2, 2), 3, 700 + i));
            CHECK(res.value >= exact_policy_value(m, pi) - 1e-9);
        }
    }

    CHECK_THROWS_AS(exact_optimal_value(random_model(3, 3, 3, 6, 33), 1000), DeskScaleError);
}

TEST_CASE("visitation marginals: base case, matrix identity, enumeration, Monte Carlo") {
    const PomdpModel m = random_model(3, 2, 3, 4, 41);
    const ZSpace zs(2, 3, 1);
    const GeneralPolicy pol = GeneralPolicy::mixture(
        {{0.5, GeneralPolicy::uniform()}, {0.5, GeneralPolicy::atom(random_zpolicy(zs, 4, 43))}});

    CHECK((visitation(m, pol, 1, VisitationKind::State) - m.b1).lpNorm<1>() < 1e-12);

    for (int h = 2; h <= m.horizon; ++h) {
        const Vec ds = visitation(m, pol, h, VisitationKind::State);
        const Vec dobs = visitation(m, pol, h, VisitationKind::Observation);
        CHECK((dobs - m.obs(h) * ds).lpNorm<1>() < 1e-10);
        CHECK(ds.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((ds - oracle::state_visitation(m, pol, h)).lpNorm<1>() < 1e-9);
    }

    // canonical window masses sum to one
    const Vec dz = visitation(m, pol, 3, VisitationKind::ZState);
    CHECK(dz.sum() == doctest::Approx(1.0).epsilon(1e-9));

    // Monte Carlo cross-check of the observation marginal
    const int n = 100000;
    Vec freq = Vec::Zero(m.num_obs());
    for (const auto& tr : rollout_batch(m, pol, n, 47, "vis"))
        freq[tr.observed.observations[1]] += 1.0 / n;
    CHECK((freq - visitation(m, pol, 3, VisitationKind::Observation)).lpNorm<1>() / 2.0 <= 0.02);
}

TEST_CASE("tilde_mdp clipping, identity-observation kernel, and row normalization") {
    const int H = 4;
    const PomdpModel m = random_model(3, 2, 3, H, 51);
    const std::vector<GeneralPolicy> pis(H, GeneralPolicy::uniform());

    // L >= H: the window always covers the whole history, so rows equal
    // the exact next-observation kernel of the model
    const TabularZMDP wide = tilde_mdp(m, pis, H);
    const ZSpace& zw = wide.zspace();
    for (int h = 1; h <= H - 1; ++h) {
        for (std::uint64_t z : zw.canonical_states_at_step(h)) {
            if (zw.contains_sink_obs(z)) continue;
            const int real = zw.real_pairs_at_step(h);
            std::vector<int> wa(real), wo(real);
            for (int age = 0; age < real; ++age) {
                auto [a, o] = zw.pair_at(z, age);
                wa[real - 1 - age] = a;
                wo[real - 1 - age] = o;
            }
            const Belief exact = exact_belief(m, wa, wo);
            for (int a = 0; a < m.num_actions(); ++a) {
                const Vec kernel = m.obs(h + 1) * (m.trans(h, a) * exact.p);
                const auto row = wide.next_obs_distribution(h, z, a);
                double sum = 0.0;
                for (int o = 0; o < zw.num_ext_obs(); ++o) {
                    CHECK(row[o] == doctest::Approx(kernel[o]).epsilon(1e-10));
                    sum += row[o];
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }

    // identity observations: the window pins the latent state, so rows
    // match the latent kernel composed with the observation matrix
    const PomdpModel ident =
        extend_with_sinks(generate_model(3, 2, 3, H, 1.0, GenStructure::NoisyPermutation, 53));
    const TabularZMDP tident = tilde_mdp(ident, pis, 1);
    const ZSpace& zi = tident.zspace();
    for (int h = 2; h <= H - 1; ++h) {
        for (std::uint64_t z : zi.canonical_states_at_step(h)) {
            if (zi.contains_sink_obs(z)) continue;
            const int s = zi.last_obs(z);  // observation == state
            for (int a = 0; a < ident.num_actions(); ++a) {
                const Vec kernel = ident.obs(h + 1) * ident.trans(h, a).col(s);
                const auto row = tident.next_obs_distribution(h, z, a);
                for (int o = 0; o < zi.num_ext_obs(); ++o)
                    CHECK(row[o] == doctest::Approx(kernel[o]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("truncation identity and total cutoffs") {
    const int H = 4, L = 1;
    const PomdpModel m = random_model(3, 2, 3, H, 61);
    std::vector<GeneralPolicy> pis(H, GeneralPolicy::uniform());

    // phi = 0: the strict inequality never triggers
    const PomdpModel same = truncated_pomdp(m, pis, 0.0, H, L);
    for (int h = 1; h <= H - 1; ++h)
        for (int a = 0; a < m.num_actions(); ++a)
            CHECK((same.trans(h, a) - m.trans(h, a)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((same.b1 - m.b1).cwiseAbs().maxCoeff() == 0.0);

    // phi > 1: every state is rerouted at each applicable step
    const PomdpModel cut = truncated_pomdp(m, pis, 1.5, H, L);
    CHECK(cut.b1[cut.sink_state()] == doctest::Approx(1.0));  // step-1 reroute hits b1
    const Vec dsink = visitation(cut, GeneralPolicy::uniform(), H, VisitationKind::State);
    CHECK(dsink[cut.sink_state()] == doctest::Approx(1.0));
}

TEST_CASE("truncations are dominated by the original everywhere") {
    const int H = 4, L = 1;
    for (std::uint64_t seed : {71ull, 72ull}) {
        const PomdpModel m = random_model(3, 2, 3, H, seed);
        const ZSpace zs(2, 3, L);
        std::vector<GeneralPolicy> pis;
        for (int h = 1; h <= H; ++h)
            pis.push_back(GeneralPolicy::atom(random_zpolicy(zs, H, seed * 10 + h)));
        const PomdpModel trunc = truncated_pomdp(m, pis, 0.15, H, L);

        for (int i = 0; i < 10; ++i) {
            const GeneralPolicy pol =
                i == 0 ? GeneralPolicy::uniform()
                       : GeneralPolicy::atom(random_zpolicy(zs, H, 900 + i));
            double prev_sink = 0.0;
            for (int h = 1; h <= H; ++h) {
                const Vec d_orig = visitation(m, pol, h, VisitationKind::State);
                const Vec d_trunc = visitation(trunc, pol, h, VisitationKind::State);
                for (int s = 0; s < m.num_core_states(); ++s)
                    CHECK(d_trunc[s] <= d_orig[s] + 1e-10);
                CHECK(d_trunc[trunc.sink_state()] >= prev_sink - 1e-12);
                prev_sink = d_trunc[trunc.sink_state()];
            }
        }
    }
}

TEST_CASE("nested truncations dominate each other along the chain") {
    const int H = 4, L = 1;
    const PomdpModel m = random_model(2, 2, 2, H, 81);
    const ZSpace zs(2, 2, L);
    std::vector<GeneralPolicy> pis;
    for (int h = 1; h <= H; ++h)
        pis.push_back(GeneralPolicy::atom(random_zpolicy(zs, H, 800 + h)));

    const PomdpModel t2 = truncated_pomdp(m, pis, 0.2, 2, L);
    const PomdpModel t3 = truncated_pomdp(m, pis, 0.2, 3, L);
    const PomdpModel t4 = truncated_pomdp(m, pis, 0.2, 4, L);

    // exact full-path comparison: deeper truncations only lose mass
    const GeneralPolicy probe = GeneralPolicy::atom(random_zpolicy(zs, H, 99));
    for (const auto& [w, comp] : resolve_all(probe, H)) {
        oracle::enumerate_paths(m, oracle::history_fn(comp, 2), [&](const oracle::Path& p) {
            const double p2 = path_probability(t2, p);
            const double p3 = path_probability(t3, p);
            const double p4 = path_probability(t4, p);
            CHECK(p4 <= p3 + 1e-15);
            CHECK(p3 <= p2 + 1e-15);
        });
    }
}

TEST_CASE("truncation keeps reachable states explored") {
    // any state still reachable in the truncation is visited with
    // probability >= phi by the policy that defined the cut
    const int H = 4, L = 1;
    const double phi = 0.1;
    for (std::uint64_t seed : {85ull, 86ull, 87ull}) {
        const PomdpModel m = random_model(3, 2, 3, H, seed);
        const ZSpace zs(2, 3, L);
        std::vector<GeneralPolicy> pis;
        for (int h = 1; h <= H; ++h)
            pis.push_back(GeneralPolicy::mixture(
                {{0.5, GeneralPolicy::uniform()},
                 {0.5, GeneralPolicy::atom(random_zpolicy(zs, H, seed * 100 + h))}}));
        for (int h = L + 1; h <= H; ++h) {
            const PomdpModel trunc = truncated_pomdp(m, pis, phi, h, L);
            const auto reach = support_reachable(trunc);
            const Vec d = visitation(trunc, pis[h - 1], h - L, VisitationKind::State);
            for (int s = 0; s < m.num_core_states(); ++s)
                if (reach[h - L - 1][s]) CHECK(d[s] >= phi - 1e-12);
        }
    }
}

TEST_CASE("underexplored and low-visitation sets are literal thresholds") {
    const PomdpModel m = random_model(3, 2, 3, 4, 91);
    const GeneralPolicy pol = GeneralPolicy::uniform();

    CHECK(underexplored_set(m, pol, 0.0, 3).empty());
    CHECK(underexplored_set(m, pol, 2.0, 3).size() == std::size_t(m.num_core_states()));
    const Vec d = oracle::state_visitation(m, pol, 3);
    for (double phi : {0.05, 0.2, 0.5}) {
        const auto set = underexplored_set(m, pol, phi, 3);
        for (int s = 0; s < m.num_core_states(); ++s) {
            const bool in = std::find(set.begin(), set.end(), s) != set.end();
            CHECK(in == (d[s] < phi));
        }
    }

    const int L = 1;
    CHECK(zlow_set(m, pol, -0.1, 3, L).empty());
    const ZSpace zs(2, 3, L);
    CHECK(zlow_set(m, pol, 1.0, 3, L).size() == zs.canonical_states_at_step(3).size());
    const Vec dz = visitation(m, pol, 3, VisitationKind::ZState, L);
    for (double zeta : {0.01, 0.1}) {
        const auto set = zlow_set(m, pol, zeta, 3, L);
        for (std::uint64_t z : zs.canonical_states_at_step(3)) {
            const bool in = std::find(set.begin(), set.end(), z) != set.end();
            CHECK(in == (dz[z] <= zeta));
        }
    }
}

TEST_CASE("latent estimates recover the true visitation in the exact case") {
    const int H = 4, L = H;  // window covers everything: tilde == truth
    const PomdpModel m = extend_with_sinks(
        generate_model(3, 2, 3, H, 0.5, GenStructure::NoisyPermutation, 95));
    const std::vector<GeneralPolicy> pis(H, GeneralPolicy::uniform());
    const TabularZMDP tilde = tilde_mdp(m, pis, L);
    const ZSpace zs(2, 3, 1);
    const GeneralPolicy probe = GeneralPolicy::atom(random_zpolicy(zs, H, 97));

    for (int t = 2; t <= H; ++t) {
        const Vec est = latent_estimate(tilde, probe, t, m.obs(t));
        const Vec truth = visitation(m, probe, t, VisitationKind::State);
        CHECK((est - truth).lpNorm<1>() < 1e-9);
    }

    // identity observations: the estimate is the observation visitation
    const PomdpModel ident = testutil::deterministic_chain(3, 2, 4);
    const TabularZMDP tid = tilde_mdp(ident, pis, H);
    const Vec d_obs = obs_visitation(tid, probe, 3);
    const Vec est = latent_estimate(tid, probe, 3, ident.obs(3));
    CHECK((est.head(3) - d_obs.head(3)).lpNorm<1>() < 1e-9);

    // pseudoinverse l1 bound
    const double gamma = observability_margin(m, 2).gamma;
    const Mat pinv = pseudo_inverse(m.obs(2));
    Stream stream(5);
    for (int i = 0; i < 100; ++i) {
        Vec x(m.num_obs());
        for (int o = 0; o < m.num_obs(); ++o) x[o] = stream.uniform01() - 0.5;
        CHECK((pinv * x).lpNorm<1>() <=
              std::sqrt(double(m.num_core_states())) / gamma * x.lpNorm<1>() + 1e-9);
    }
}

TEST_CASE("contraction profile: exactness at full windows and identity observations") {
    const PomdpModel m = random_model(3, 2, 3, 5, 101);
    const Vec prior = Vec::Constant(m.num_states(), 1.0 / m.num_states());

    // L >= h-1 reduces to the exact belief
    const auto full = contraction_profile(m, GeneralPolicy::uniform(), prior, {4, 6}, 5, 200, 1);
    for (const auto& pt : full) CHECK(pt.mean_error == doctest::Approx(0.0));

    // identity observations: the belief is a point mass after one step
    const PomdpModel ident =
        extend_with_sinks(generate_model(3, 2, 3, 5, 1.0, GenStructure::NoisyPermutation, 103));
    const auto id_prof = contraction_profile(ident, GeneralPolicy::uniform(), prior, {1, 2}, 4, 200, 2);
    for (const auto& pt : id_prof) CHECK(pt.mean_error == doctest::Approx(0.0).epsilon(1e-12));

    // noisy fixture: error shrinks with the window, within noise
    const PomdpModel noisy =
        extend_with_sinks(generate_model(3, 2, 3, 8, 0.5, GenStructure::NoisyPermutation, 105));
    const auto prof = contraction_profile(noisy, GeneralPolicy::uniform(), prior, {1, 4}, 8, 2000, 3);
    CHECK(prof[1].mean_error <= prof[0].mean_error + 2.0 * (prof[0].std_error + prof[1].std_error));
}
