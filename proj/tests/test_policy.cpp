#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pomdplab/diagnostics.hpp"
#include "pomdplab/policy.hpp"
#include "pomdplab/simulator.hpp"
#include "test_util.hpp"

using namespace pomdplab;

namespace {

ZPolicy constant_policy(const ZSpace& zs, int H, int action) {
    ZPolicy pi(zs, H);
    for (int h = 1; h <= H; ++h)
        for (std::uint64_t z : zs.canonical_states_at_step(h)) pi.set(h, z, action);
    return pi;
}

}  // namespace

TEST_CASE("atom execution replays its table; unit-weight mixture is transparent") {
    const ZSpace zs(2, 2, 1);
    const int H = 4;
    const ZPolicy table = testutil::random_zpolicy(zs, H, 5);
    const GeneralPolicy atom = GeneralPolicy::atom(table);
    const GeneralPolicy unit = GeneralPolicy::mixture({{1.0, atom}});

    for (std::uint64_t ep = 0; ep < 50; ++ep) {
        PolicyExecution e1 = begin_episode(atom, H, 2, Stream(SeedSpec{1, "t", ep}, 1));
        PolicyExecution e2 = begin_episode(unit, H, 2, Stream(SeedSpec{1, "t", ep}, 1));
        std::vector<int> as, os;
        Stream obs_stream(ep);
        for (int h = 1; h <= H - 1; ++h) {
            const int a1 = e1.act(h);
            const int a2 = e2.act(h);
            const std::uint64_t z = zs.canonical(as, os);
            CHECK(a1 == table.act(h, z));
            CHECK(a1 == a2);
            const int o = obs_stream.uniform_int(2);
            e1.observe(a1, o);
            e2.observe(a2, o);
            as.push_back(a1);
            os.push_back(o);
        }
    }
}

TEST_CASE("mixture resolution is per episode with the right frequencies") {
    const ZSpace zs(2, 2, 1);
    const int H = 3;
    const GeneralPolicy zero = GeneralPolicy::atom(constant_policy(zs, H, 0));
    const GeneralPolicy one = GeneralPolicy::atom(constant_policy(zs, H, 1));
    const GeneralPolicy mix = GeneralPolicy::mixture({{0.5, zero}, {0.5, one}});

    const int n = 100000;
    int picked_zero = 0;
    for (int ep = 0; ep < n; ++ep) {
        PolicyExecution e = begin_episode(mix, H, 2, Stream(SeedSpec{2, "mix", (std::uint64_t)ep}, 1));
        const int first = e.act(1);
        e.observe(first, 0);
        // per-episode resolution: the drawn component is followed all episode
        CHECK(e.act(2) == first);
        if (first == 0) ++picked_zero;
    }
    CHECK(std::abs(picked_zero / double(n) - 0.5) < 0.01);
}

TEST_CASE("uniform actions have uniform frequencies") {
    const int n = 100000;
    std::vector<int> counts(3, 0);
    for (int ep = 0; ep < n; ++ep) {
        PolicyExecution e = begin_episode(GeneralPolicy::uniform(), 2, 3,
                                          Stream(SeedSpec{3, "unif", (std::uint64_t)ep}, 1));
        ++counts[e.act(1)];
    }
    for (int a = 0; a < 3; ++a) CHECK(std::abs(counts[a] / double(n) - 1.0 / 3.0) < 0.01);
}

TEST_CASE("malformed mixture weights are rejected") {
    CHECK_THROWS_AS(GeneralPolicy::mixture({}), ConfigError);
    CHECK_THROWS_AS(GeneralPolicy::mixture({{0.4, GeneralPolicy::uniform()},
                                            {0.4, GeneralPolicy::uniform()}}),
                    ConfigError);
    CHECK_THROWS_AS(GeneralPolicy::mixture({{1.5, GeneralPolicy::uniform()},
                                            {-0.5, GeneralPolicy::uniform()}}),
                    ConfigError);
}

TEST_CASE("hat_policy cutoff arithmetic") {
    const ZSpace zs(2, 2, 1);
    const int H = 6, L = 1;
    const GeneralPolicy base = GeneralPolicy::atom(constant_policy(zs, H, 1));

    // h <= L+1: fully uniform
    for (int h = 1; h <= L + 1; ++h) {
        const GeneralPolicy hat = hat_policy(base, h, L);
        const auto comps = resolve_all(hat, H);
        REQUIRE(comps.size() == 1);
        for (int step = 1; step <= H; ++step) CHECK(comps[0].second.rule(step).uniform);
    }

    // h = L+3: base plays exactly steps 1..2
    const GeneralPolicy hat = hat_policy(base, L + 3, L);
    const auto comps = resolve_all(hat, H);
    REQUIRE(comps.size() == 1);
    CHECK(!comps[0].second.rule(1).uniform);
    CHECK(!comps[0].second.rule(2).uniform);
    for (int step = 3; step <= H; ++step) CHECK(comps[0].second.rule(step).uniform);
}

TEST_CASE("hat_policy action marginals past the cutoff are uniform") {
    const ZSpace zs(2, 2, 1);
    const int H = 4, L = 1, h = 4;  // cutoff = max(4-1-1,0)+1 = 3
    const GeneralPolicy base = GeneralPolicy::atom(constant_policy(zs, H, 1));
    const GeneralPolicy hat = hat_policy(base, h, L);
    const PomdpModel m = testutil::random_model(2, 2, 2, H, 33);

    const int n = 100000;
    std::vector<int> counts(2, 0);
    const auto batch = rollout_batch(m, hat, n, 17, "hatmarg");
    for (const auto& tr : batch) {
        CHECK(tr.observed.actions[0] == 1);  // base region
        CHECK(tr.observed.actions[1] == 1);
        ++counts[tr.observed.actions[2]];  // uniform region
    }
    CHECK(std::abs(counts[0] / double(n) - 0.5) < 0.01);
}

TEST_CASE("tail_average and running_average build uniform mixtures") {
    const ZSpace zs(2, 2, 1);
    const GeneralPolicy p1 = GeneralPolicy::atom(constant_policy(zs, 3, 0));
    const GeneralPolicy p2 = GeneralPolicy::atom(constant_policy(zs, 3, 1));

    const GeneralPolicy single = tail_average({p1});
    REQUIRE(single.kind() == GeneralPolicy::Kind::Mixture);
    CHECK(single.node()->components.size() == 1);
    CHECK(single.node()->components[0].weight == 1.0);
    CHECK(single.node()->components[0].node == p1.node());  // shared subtree

    const GeneralPolicy pair = running_average({p1, p2});
    REQUIRE(pair.node()->components.size() == 2);
    CHECK(pair.node()->components[0].weight == doctest::Approx(0.5));
    CHECK(pair.node()->components[1].weight == doctest::Approx(0.5));

    CHECK_THROWS_AS(tail_average({}), ConfigError);
    CHECK_THROWS_AS(running_average({}), ConfigError);

    // Monte Carlo component frequencies
    const int n = 100000;
    int c0 = 0;
    for (int ep = 0; ep < n; ++ep) {
        PolicyExecution e = begin_episode(pair, 3, 2, Stream(SeedSpec{5, "avg", (std::uint64_t)ep}, 1));
        if (e.act(1) == 0) ++c0;
    }
    CHECK(std::abs(c0 / double(n) - 0.5) < 0.01);
}

TEST_CASE("mixture flattening preserves the trajectory distribution") {
    const ZSpace zs(2, 2, 1);
    const int H = 3;
    const PomdpModel m = testutil::random_model(2, 2, 2, H, 44);
    const GeneralPolicy a = GeneralPolicy::atom(testutil::random_zpolicy(zs, H, 1));
    const GeneralPolicy b = GeneralPolicy::atom(testutil::random_zpolicy(zs, H, 2));
    const GeneralPolicy c = GeneralPolicy::atom(testutil::random_zpolicy(zs, H, 3));

    const GeneralPolicy nested =
        GeneralPolicy::mixture({{0.5, GeneralPolicy::mixture({{0.4, a}, {0.6, b}})}, {0.5, c}});
    const GeneralPolicy flat = GeneralPolicy::mixture({{0.2, a}, {0.3, b}, {0.5, c}});

    CHECK(exact_policy_value(m, nested) ==
          doctest::Approx(exact_policy_value(m, flat)).epsilon(1e-9));

    const auto dn = oracle::observable_distribution(m, nested);
    const auto df = oracle::observable_distribution(m, flat);
    for (const auto& [key, p] : dn) CHECK(df.at(key) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("window policies act only on the canonical suffix") {
    const ZSpace zs(2, 2, 1);
    const int H = 3;
    const ZPolicy table = testutil::random_zpolicy(zs, H, 9);
    const GeneralPolicy atom = GeneralPolicy::atom(table);

    // exhaustive: all pairs of length-2 histories sharing the final pair
    for (int a1 = 0; a1 < 2; ++a1)
        for (int o1 = 0; o1 < 2; ++o1)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int o2 = 0; o2 < 2; ++o2)
                    for (int b1 = 0; b1 < 2; ++b1)
                        for (int q1 = 0; q1 < 2; ++q1) {
                            PolicyExecution e1 = begin_episode(atom, H, 2, Stream(1));
                            e1.observe(a1, o1);
                            e1.observe(a2, o2);
                            PolicyExecution e2 = begin_episode(atom, H, 2, Stream(2));
                            e2.observe(b1, q1);
                            e2.observe(a2, o2);
                            CHECK(e1.act(3) == e2.act(3));
                        }

    // short history reads the padded canonical window
    PolicyExecution e = begin_episode(atom, H, 2, Stream(3));
    CHECK(e.act(1) == table.act(1, zs.all_pad()));
}

TEST_CASE("episode determinism under a fixed seed") {
    const ZSpace zs(2, 2, 1);
    const GeneralPolicy mix = GeneralPolicy::mixture(
        {{0.3, GeneralPolicy::atom(testutil::random_zpolicy(zs, 4, 7))},
         {0.7, GeneralPolicy::prefix_then_uniform(
                   GeneralPolicy::atom(testutil::random_zpolicy(zs, 4, 8)), 2)}});
    for (std::uint64_t ep = 0; ep < 20; ++ep) {
        PolicyExecution e1 = begin_episode(mix, 4, 2, Stream(SeedSpec{9, "det", ep}, 2));
        PolicyExecution e2 = begin_episode(mix, 4, 2, Stream(SeedSpec{9, "det", ep}, 2));
        std::vector<int> trace1, trace2;
        for (int h = 1; h <= 3; ++h) {
            const int x1 = e1.act(h), x2 = e2.act(h);
            trace1.push_back(x1);
            trace2.push_back(x2);
            e1.observe(x1, h % 2);
            e2.observe(x2, h % 2);
        }
        CHECK(trace1 == trace2);
    }
}

TEST_CASE("mixture expansion limit directs to Monte Carlo") {
    // 2^13 > 4096 components
    GeneralPolicy p = GeneralPolicy::mixture(
        {{0.5, GeneralPolicy::uniform()}, {0.5, GeneralPolicy::uniform()}});
    for (int i = 0; i < 12; ++i) p = GeneralPolicy::mixture({{0.5, p}, {0.5, p}});
    CHECK_THROWS_AS(resolve_all(p, 3), DeskScaleError);
}
