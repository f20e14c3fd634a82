#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pomdplab/policy.hpp"
#include "pomdplab/simulator.hpp"
#include "pomdplab/zmdp.hpp"

namespace pomdplab {

/// Visit counts gathered by the estimator: per (h, z, a) the number of
/// times each next observation followed, plus one captured reward sample
/// per (h, z) key (rewards are deterministic functions of observations,
/// so the first sample is authoritative).
struct CountTable {
    ZSpace zspace;
    // trans_counts[h-1]: key(z, a) -> counts over real next observations, h = 1..H-1
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::int64_t>>> trans_counts;
    // reward_samples[h-2]: z -> first observed reward, h = 2..H
    std::vector<std::unordered_map<std::uint64_t, double>> reward_samples;

    std::uint64_t key(std::uint64_t z, int a) const { return z * zspace.num_actions() + a; }
};

struct ApproxMdpResult {
    TabularZMDP mdp;
    CountTable counts;
};

/// Algorithm: for each step h, draw N0 trajectories under the policy
/// that follows pi^h for max(h-L-1, 0) steps and plays uniformly random
/// actions afterwards; aggregate next-observation counts keyed by the
/// canonical window suffix; rows whose total count reaches N1 become
/// normalized-count transition rows, all others divert to the sink
/// observation. Deterministic given the env's master seed and the tag.
ApproxMdpResult approx_mdp(RolloutEnv& env, int L, std::int64_t N0, std::int64_t N1,
                           const std::vector<GeneralPolicy>& pis, const std::string& tag);

/// Replay path: same construction from recorded per-step batches
/// (batches[h-1] holds the trajectories drawn for step h).
ApproxMdpResult approx_mdp_from_batches(const std::vector<std::vector<ObservedTrajectory>>& batches,
                                        int horizon, int num_actions, int num_core_obs, int L,
                                        std::int64_t N1);

struct TrajectoryDump;  // io.hpp

/// Replay from a recorded dump whose phases end in "h<step>"; identical
/// output to the live run that produced it.
ApproxMdpResult approx_mdp_from_dump(const TrajectoryDump& dump, int L, std::int64_t N1);

}  // namespace pomdplab
