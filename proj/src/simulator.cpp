#include "pomdplab/simulator.hpp"

#include "pomdplab/parallel.hpp"

namespace pomdplab {

namespace {
constexpr std::uint64_t kEnvSalt = 0x656e76ULL;     // environment draws
constexpr std::uint64_t kPolicySalt = 0x706f6cULL;  // mixture + uniform-action draws
}  // namespace

Trajectory rollout(const PomdpModel& model, const GeneralPolicy& policy, const SeedSpec& seed) {
    const int H = model.horizon;
    const int S = model.num_states();
    const int O = model.num_obs();

    Stream env(seed, kEnvSalt);
    PolicyExecution exec =
        begin_episode(policy, H, model.num_actions(), Stream(seed, kPolicySalt));

    Trajectory tr;
    tr.seed = seed;
    tr.observed.episode_index = seed.index;
    tr.observed.actions.reserve(H - 1);
    tr.observed.observations.reserve(H - 1);
    tr.observed.rewards.reserve(H - 1);
    tr.latent_states.reserve(H);

    int s = env.categorical(model.b1.data(), S);
    tr.latent_states.push_back(s);
    for (int h = 1; h <= H - 1; ++h) {
        const int a = exec.act(h);
        const int s_next = env.categorical(model.trans(h, a).col(s).data(), S);
        const int o_next = env.categorical(model.obs(h + 1).col(s_next).data(), O);
        const double r = model.reward(h + 1, o_next);
        exec.observe(a, o_next);
        tr.observed.actions.push_back(a);
        tr.observed.observations.push_back(o_next);
        tr.observed.rewards.push_back(r);
        tr.latent_states.push_back(s_next);
        s = s_next;
    }
    return tr;
}

std::vector<Trajectory> rollout_batch(const PomdpModel& model, const GeneralPolicy& policy,
                                      int n, std::uint64_t master, const std::string& tag) {
    std::vector<Trajectory> out(n);
    parallel_for(n, [&](std::int64_t i) {
        out[i] = rollout(model, policy, SeedSpec{master, tag, static_cast<std::uint64_t>(i)});
    });
    return out;
}

std::vector<Trajectory> rollout_batch_serial(const PomdpModel& model, const GeneralPolicy& policy,
                                             int n, std::uint64_t master, const std::string& tag) {
    std::vector<Trajectory> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = rollout(model, policy, SeedSpec{master, tag, static_cast<std::uint64_t>(i)});
    return out;
}

double empirical_value(const PomdpModel& model, const GeneralPolicy& policy, int n,
                       std::uint64_t master, const std::string& tag) {
    if (n < 1) throw ConfigError("empirical_value: need n >= 1");
    std::vector<double> totals(n);
    parallel_for(n, [&](std::int64_t i) {
        totals[i] =
            rollout(model, policy, SeedSpec{master, tag, static_cast<std::uint64_t>(i)})
                .observed.total_reward();
    });
    // Fixed-order summation keeps the result independent of worker count.
    double sum = 0.0;
    for (double t : totals) sum += t;
    return sum / n;
}

std::vector<ObservedTrajectory> RolloutEnv::sample_batch(const GeneralPolicy& policy, int n,
                                                         const std::string& tag) {
    std::vector<ObservedTrajectory> out(n);
    parallel_for(n, [&](std::int64_t i) {
        out[i] = rollout(*model_, policy, SeedSpec{master_, tag, static_cast<std::uint64_t>(i)})
                     .observed;
    });
    episodes_ += static_cast<std::uint64_t>(n);
    return out;
}

double RolloutEnv::mean_return(const GeneralPolicy& policy, int n, const std::string& tag) {
    episodes_ += static_cast<std::uint64_t>(n);
    return empirical_value(*model_, policy, n, master_, tag);
}

}  // namespace pomdplab
