#include "pomdplab/estimator.hpp"

#include <algorithm>

#include "pomdplab/io.hpp"

namespace pomdplab {

namespace {

void count_batch(CountTable& counts, const std::vector<ObservedTrajectory>& batch, int h,
                 int horizon, int num_real_obs) {
    const ZSpace& zs = counts.zspace;
    for (const auto& tr : batch) {
        if (static_cast<int>(tr.actions.size()) != horizon - 1 ||
            static_cast<int>(tr.observations.size()) != horizon - 1 ||
            static_cast<int>(tr.rewards.size()) != horizon - 1)
            throw ConfigError("trajectory record has the wrong episode length");
        for (int a : tr.actions)
            if (a < 0 || a >= zs.num_actions()) throw ConfigError("trajectory action out of range");
        for (int o : tr.observations)
            if (o < 0 || o >= num_real_obs) throw ConfigError("trajectory observation out of range");
        // Window at step h from a_{1:h-1}, o_{2:h}.
        std::uint64_t z = zs.all_pad();
        const int from = std::max(0, (h - 1) - zs.window());
        for (int i = from; i < h - 1; ++i) z = zs.advance(z, tr.actions[i], tr.observations[i]);

        if (h >= 2) {
            auto& rmap = counts.reward_samples[h - 2];
            rmap.emplace(z, tr.rewards[h - 2]);
        }
        if (h <= horizon - 1) {
            const int a = tr.actions[h - 1];
            const int o_next = tr.observations[h - 1];
            auto& row = counts.trans_counts[h - 1]
                            .try_emplace(counts.key(z, a), num_real_obs, 0)
                            .first->second;
            row[o_next] += 1;
        }
    }
}

ApproxMdpResult build_from_counts(CountTable counts, int horizon, std::int64_t N1) {
    const ZSpace zs = counts.zspace;
    ApproxMdpResult res{TabularZMDP(zs, horizon), std::move(counts)};
    const int O = zs.num_real_obs();

    for (int h = 1; h <= horizon - 1; ++h) {
        // Sorted key order keeps the construction reproducible.
        std::vector<std::uint64_t> keys;
        keys.reserve(res.counts.trans_counts[h - 1].size());
        for (const auto& [k, v] : res.counts.trans_counts[h - 1]) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t k : keys) {
            const auto& phi = res.counts.trans_counts[h - 1].at(k);
            std::int64_t total = 0;
            for (std::int64_t c : phi) total += c;
            if (total < N1) continue;  // divert (row stays absent)
            std::vector<double> row(zs.num_ext_obs(), 0.0);
            for (int o = 0; o < O; ++o) row[o] = static_cast<double>(phi[o]) / total;
            res.mdp.set_row(h, k / zs.num_actions(), static_cast<int>(k % zs.num_actions()),
                            std::move(row));
        }
    }
    for (int h = 2; h <= horizon; ++h) {
        std::vector<std::uint64_t> keys;
        keys.reserve(res.counts.reward_samples[h - 2].size());
        for (const auto& [z, r] : res.counts.reward_samples[h - 2]) keys.push_back(z);
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t z : keys) res.mdp.set_reward(h, z, res.counts.reward_samples[h - 2].at(z));
    }
    return res;
}

CountTable make_counts(const ZSpace& zs, int horizon) {
    CountTable counts;
    counts.zspace = zs;
    counts.trans_counts.resize(horizon - 1);
    counts.reward_samples.resize(horizon - 1);
    return counts;
}

}  // namespace

ApproxMdpResult approx_mdp(RolloutEnv& env, int L, std::int64_t N0, std::int64_t N1,
                           const std::vector<GeneralPolicy>& pis, const std::string& tag) {
    const int H = env.horizon();
    if (N1 > N0) throw ConfigError("approx_mdp: requires N1 <= N0");
    if (N1 < 1 || N0 < 1) throw ConfigError("approx_mdp: requires N0, N1 >= 1");
    if (N0 > (1ll << 31) - 1) throw DeskScaleError("approx_mdp: N0 exceeds the runnable range");
    if (L < 1 || L >= H) throw ConfigError("approx_mdp: requires 1 <= L < H");
    if (static_cast<int>(pis.size()) != H) throw ConfigError("approx_mdp: need one policy per step");

    const ZSpace zs(env.num_actions(), env.num_core_obs(), L);
    CountTable counts = make_counts(zs, H);
    for (int h = 1; h <= H; ++h) {
        const GeneralPolicy hat = hat_policy(pis[h - 1], h, L);
        const auto batch = env.sample_batch(hat, static_cast<int>(N0), tag + "/h" + std::to_string(h));
        count_batch(counts, batch, h, H, zs.num_real_obs());
    }
    return build_from_counts(std::move(counts), H, N1);
}

ApproxMdpResult approx_mdp_from_batches(const std::vector<std::vector<ObservedTrajectory>>& batches,
                                        int horizon, int num_actions, int num_core_obs, int L,
                                        std::int64_t N1) {
    if (static_cast<int>(batches.size()) != horizon)
        throw ConfigError("approx_mdp_from_batches: need one batch per step");
    const ZSpace zs(num_actions, num_core_obs, L);
    CountTable counts = make_counts(zs, horizon);
    for (int h = 1; h <= horizon; ++h)
        count_batch(counts, batches[h - 1], h, horizon, zs.num_real_obs());
    return build_from_counts(std::move(counts), horizon, N1);
}

ApproxMdpResult approx_mdp_from_dump(const TrajectoryDump& dump, int L, std::int64_t N1) {
    std::vector<std::vector<ObservedTrajectory>> batches(dump.horizon);
    for (const auto& [phase, tr] : dump.records) {
        const auto pos = phase.rfind('h');
        if (pos == std::string::npos) throw ConfigError("dump phase tag lacks an h<step> suffix");
        int h = 0;
        try {
            h = std::stoi(phase.substr(pos + 1));
        } catch (const std::exception&) {
            throw ConfigError("dump phase tag lacks an h<step> suffix");
        }
        if (h < 1 || h > dump.horizon) throw ConfigError("dump phase step out of range");
        batches[h - 1].push_back(tr);
    }
    return approx_mdp_from_batches(batches, dump.horizon, dump.num_actions, dump.num_core_obs, L,
                                   N1);
}

}  // namespace pomdplab
