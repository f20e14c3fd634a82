#include "pomdplab/generator.hpp"

#include <cmath>

#include "pomdplab/rng.hpp"

namespace pomdplab {

namespace {

Vec random_distribution(Stream& stream, int n) {
    Vec v(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = -std::log(1.0 - stream.uniform01());
        sum += v[i];
    }
    return v / sum;
}

PomdpModel skeleton(int S, int A, int O, int H, Stream& stream) {
    PomdpModel m;
    m.horizon = H;
    for (int s = 0; s < S; ++s) m.state_labels.push_back("s" + std::to_string(s + 1));
    for (int a = 0; a < A; ++a) m.action_labels.push_back("a" + std::to_string(a + 1));
    for (int o = 0; o < O; ++o) m.obs_labels.push_back("o" + std::to_string(o + 1));
    m.b1 = random_distribution(stream, S);
    m.T.resize(H - 1);
    for (int hi = 0; hi < H - 1; ++hi) {
        m.T[hi].resize(A);
        for (int a = 0; a < A; ++a) {
            Mat t(S, S);
            for (int sc = 0; sc < S; ++sc) t.col(sc) = random_distribution(stream, S);
            m.T[hi][a] = std::move(t);
        }
    }
    m.Ob.resize(H - 1);
    m.R.resize(H - 1);
    for (int hi = 0; hi < H - 1; ++hi) {
        Vec r(O);
        for (int o = 0; o < O; ++o) r[o] = stream.uniform01();
        m.R[hi] = std::move(r);
    }
    return m;
}

}  // namespace

PomdpModel generate_model(int S, int A, int O, int H, double gamma_target,
                          GenStructure structure, std::uint64_t seed, int rejection_budget) {
    if (!(gamma_target > 0.0 && gamma_target <= 1.0))
        throw ConfigError("generate_model: gamma_target must lie in (0,1]");
    if (S < 2 || A < 1 || O < 1 || H < 2) throw ConfigError("generate_model: bad shape");

    Stream stream(seed);
    if (structure == GenStructure::NoisyPermutation) {
        if (O < S) throw ConfigError("generate_model: noisy-permutation needs O >= S");
        PomdpModel m = skeleton(S, A, O, H, stream);
        const double eta = 1.0 - gamma_target;
        for (int hi = 0; hi < H - 1; ++hi) {
            Mat ob = Mat::Constant(O, S, eta / O);
            for (int s = 0; s < S; ++s) ob(s, s) += 1.0 - eta;
            m.Ob[hi] = std::move(ob);
        }
        return m;
    }

    // random structure: rejection-sample the observation tables until the
    // margin clears the target at every step.
    for (int attempt = 0; attempt < rejection_budget; ++attempt) {
        PomdpModel m = skeleton(S, A, O, H, stream);
        for (int hi = 0; hi < H - 1; ++hi) {
            Mat ob(O, S);
            for (int s = 0; s < S; ++s) ob.col(s) = random_distribution(stream, O);
            m.Ob[hi] = std::move(ob);
        }
        const PomdpModel ext = extend_with_sinks(m);
        bool ok = true;
        for (int h = 2; h <= H && ok; ++h)
            ok = observability_margin(ext, h).gamma >= gamma_target;
        if (ok) return m;
    }
    throw ConfigError("generate_model: rejection budget exhausted; lower gamma_target");
}

}  // namespace pomdplab
