#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pomdplab/model.hpp"
#include "pomdplab/policy.hpp"
#include "pomdplab/zmdp.hpp"

namespace pomdplab {

/// Exact joint distribution over (latent state, canonical window) per
/// step, for a given model and general policy. All visitation marginals
/// (state, observation, window) fall out of it.
struct JointOccupancy {
    ZSpace zspace;
    int num_states = 0;
    std::vector<std::vector<double>> occ;  // [h-1][s * zspace.size() + z]

    double mass(int h, int s, std::uint64_t z) const {
        return occ[h - 1][static_cast<std::size_t>(s) * zspace.size() + z];
    }
};

/// `L` pins the window length; 0 infers it from the policy's atoms
/// (minimum 1).
JointOccupancy joint_occupancy(const PomdpModel& model, const GeneralPolicy& policy, int L = 0);

enum class VisitationKind { State, Observation, ZState };

/// d_{S,h}, d_{O,h} (h >= 2) or d_{Z,h} over canonical windows.
Vec visitation(const PomdpModel& model, const GeneralPolicy& policy, int h, VisitationKind kind,
               int L = 0);

/// Exact value of a general policy, by forward occupancy per resolved
/// mixture component.
double exact_policy_value(const PomdpModel& model, const GeneralPolicy& policy);

/// Exact optimum over all history-dependent policies, by backward
/// induction over the reachable history tree (beliefs as sufficient
/// statistics). Desk-scale only: throws past `max_histories` nodes.
struct OptimalValueResult {
    double value = 0.0;
    /// History encoded as alternating (a_1, o_2, a_2, o_3, ...) symbols;
    /// maps to the optimal action at that history.
    std::map<std::vector<int>, int> actions;
    std::int64_t histories = 0;
};
OptimalValueResult exact_optimal_value(const PomdpModel& model,
                                       std::int64_t max_histories = 1000000);

/// The analysis MDP whose transitions use approximate beliefs seeded by
/// the exploratory policies' true latent visitation distributions.
/// Reward-free by construction.
TabularZMDP tilde_mdp(const PomdpModel& model, const std::vector<GeneralPolicy>& pis, int L);

/// Truncation of the model: inductively over H'' = L+1..H', transition
/// mass entering states underexplored by pi^{H''} at step H''-L (in the
/// previous truncation) is rerouted into the sink state. The step-0 case
/// reroutes initial-distribution mass.
PomdpModel truncated_pomdp(const PomdpModel& model, const std::vector<GeneralPolicy>& pis,
                           double phi, int h_prime, int L);

/// Non-sink states s with d_{S,h}(s) < phi (strict).
std::vector<int> underexplored_set(const PomdpModel& model, const GeneralPolicy& policy,
                                   double phi, int h);

/// Canonical windows z with d_{Z,h}(z) <= zeta (note: non-strict).
std::vector<std::uint64_t> zlow_set(const PomdpModel& model, const GeneralPolicy& policy,
                                    double zeta, int h, int L);

/// Moore-Penrose pseudoinverse; singular values below 1e-10 x sigma_max
/// are treated as zero.
Mat pseudo_inverse(const Mat& m);

/// Formal latent-state distribution Ob_h^+ . d_{O,h} of the Z-MDP.
/// Entries may be negative.
Vec latent_estimate(const TabularZMDP& zmdp, const GeneralPolicy& policy, int h, const Mat& Ob_h);

/// Monte Carlo profile of E ||b_h - bhat_h(.; prior)||_1 at step h for
/// each window length in Ls, over n sampled trajectories.
struct ContractionPoint {
    int L = 0;
    double mean_error = 0.0;
    double std_error = 0.0;
};
std::vector<ContractionPoint> contraction_profile(const PomdpModel& model,
                                                  const GeneralPolicy& policy, const Vec& prior,
                                                  const std::vector<int>& Ls, int h, int n,
                                                  std::uint64_t seed);

/// CSV listings of the thresholded sets per step (header row included).
std::string underexplored_listing_csv(const PomdpModel& model, const GeneralPolicy& policy,
                                      double phi);
std::string zlow_listing_csv(const PomdpModel& model, const GeneralPolicy& policy, double zeta,
                             int L);

}  // namespace pomdplab
