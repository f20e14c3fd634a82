#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pomdplab/model.hpp"
#include "pomdplab/policy.hpp"
#include "pomdplab/rng.hpp"

namespace pomdplab {

/// The learner-facing view of one episode: actions a_{1:H-1},
/// observations o_{2:H}, rewards r_{2:H}. Latent states are deliberately
/// absent from this type.
struct ObservedTrajectory {
    std::uint64_t episode_index = 0;
    std::vector<int> actions;
    std::vector<int> observations;
    std::vector<double> rewards;

    double total_reward() const {
        double t = 0.0;
        for (double r : rewards) t += r;
        return t;
    }
};

/// Full episode record; the latent state sequence s_{1:H} exists for
/// diagnostics only and never reaches learner code paths.
struct Trajectory {
    SeedSpec seed;
    ObservedTrajectory observed;
    std::vector<int> latent_states;
};

/// One episode under a general policy, deterministic given the seed spec.
Trajectory rollout(const PomdpModel& model, const GeneralPolicy& policy, const SeedSpec& seed);

/// n episodes with SeedSpec(master, tag, i) for i in [0, n). Episodes are
/// independent streams, so the result is identical for any worker count.
std::vector<Trajectory> rollout_batch(const PomdpModel& model, const GeneralPolicy& policy,
                                      int n, std::uint64_t master, const std::string& tag);
std::vector<Trajectory> rollout_batch_serial(const PomdpModel& model, const GeneralPolicy& policy,
                                             int n, std::uint64_t master, const std::string& tag);

/// Mean total reward over n rollouts.
double empirical_value(const PomdpModel& model, const GeneralPolicy& policy, int n,
                       std::uint64_t master, const std::string& tag);

/// Rollout-only access to a model, as handed to the learner. Counts every
/// episode it serves.
class RolloutEnv {
public:
    RolloutEnv(const PomdpModel& model, std::uint64_t master_seed)
        : model_(&model), master_(master_seed) {
        model.require_extended();
    }

    int horizon() const { return model_->horizon; }
    int num_actions() const { return model_->num_actions(); }
    int num_core_obs() const { return model_->num_core_obs(); }
    std::uint64_t master_seed() const { return master_; }

    std::vector<ObservedTrajectory> sample_batch(const GeneralPolicy& policy, int n,
                                                 const std::string& tag);
    double mean_return(const GeneralPolicy& policy, int n, const std::string& tag);

    std::uint64_t episodes_used() const { return episodes_; }

private:
    const PomdpModel* model_;
    std::uint64_t master_;
    std::uint64_t episodes_ = 0;
};

}  // namespace pomdplab
