#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pomdplab/model.hpp"
#include "pomdplab/policy.hpp"
#include "pomdplab/zspace.hpp"

namespace pomdplab {

/// Tabular MDP over the window state space. Transitions have Z-structure:
/// a row for (h, z, a) is a distribution over the next extended
/// observation o' (entries 0..O-1 real, entry O the sink observation),
/// and the successor state is advance(z, a, o').
///
/// Row storage is sparse per step; a missing row means the sink-diverting
/// point mass (all mass on o' = sink), which is also the mandatory
/// behavior for windows already containing the sink observation.
/// Rewards are per (h, z) with default 0.
class TabularZMDP {
public:
    TabularZMDP() = default;
    TabularZMDP(const ZSpace& zs, int horizon)
        : zspace_(zs), horizon_(horizon), rows_(horizon), rewards_(horizon) {}

    const ZSpace& zspace() const { return zspace_; }
    int horizon() const { return horizon_; }
    int window() const { return zspace_.window(); }
    int num_ext_obs() const { return zspace_.num_ext_obs(); }

    bool has_row(int h, std::uint64_t z, int a) const {
        return rows_[h - 1].count(key(z, a)) > 0;
    }
    bool diverts(int h, std::uint64_t z, int a) const { return !has_row(h, z, a); }

    /// Stored row, or the sink-diverting point mass when absent.
    std::vector<double> next_obs_distribution(int h, std::uint64_t z, int a) const {
        auto it = rows_[h - 1].find(key(z, a));
        if (it != rows_[h - 1].end()) return it->second;
        std::vector<double> divert(zspace_.num_ext_obs(), 0.0);
        divert[zspace_.sink_obs()] = 1.0;
        return divert;
    }
    const std::vector<double>* stored_row(int h, std::uint64_t z, int a) const {
        auto it = rows_[h - 1].find(key(z, a));
        return it == rows_[h - 1].end() ? nullptr : &it->second;
    }

    void set_row(int h, std::uint64_t z, int a, std::vector<double> dist);
    void set_reward(int h, std::uint64_t z, double r);
    double reward(int h, std::uint64_t z) const {
        auto it = rewards_[h - 1].find(z);
        return it == rewards_[h - 1].end() ? 0.0 : it->second;
    }

    std::size_t stored_row_count(int h) const { return rows_[h - 1].size(); }
    const std::unordered_map<std::uint64_t, std::vector<double>>& rows_at(int h) const {
        return rows_[h - 1];
    }
    const std::unordered_map<std::uint64_t, double>& rewards_at(int h) const {
        return rewards_[h - 1];
    }

    std::uint64_t key(std::uint64_t z, int a) const {
        return z * zspace_.num_actions() + a;
    }

private:
    ZSpace zspace_;
    int horizon_ = 0;
    std::vector<std::unordered_map<std::uint64_t, std::vector<double>>> rows_;
    std::vector<std::unordered_map<std::uint64_t, double>> rewards_;
};

struct DpResult {
    ZPolicy policy;
    std::vector<std::vector<double>> value;  // [h-1][z], canonical entries only
    double root_value = 0.0;
};

/// Backward induction with V_{H+1} = 0 and lowest-index argmax ties.
DpResult dp_optimal(const TabularZMDP& zmdp);
DpResult dp_optimal_serial(const TabularZMDP& zmdp);

/// Observation visitation d_{O,h} over the extended observations (last
/// window symbol at step h), h >= 2. Exact, via per-component occupancy.
Vec obs_visitation(const TabularZMDP& zmdp, const GeneralPolicy& policy, int h);

struct LinOptResult {
    ZPolicy policy;
    double value = 0.0;
};

/// argmax over window policies of <r, d_{O, h-L}>, by dynamic programming
/// on a reward pinned to step h-L. r has one entry per extended
/// observation. For target step h-L == 1 the achievable set is {0}.
LinOptResult linear_opt(const TabularZMDP& zmdp, const Vec& r, int h);

/// Exact expected total reward of a general policy.
double zmdp_policy_value(const TabularZMDP& zmdp, const GeneralPolicy& policy);

/// Per-step window occupancy of one resolved component (dense vectors
/// indexed by the ZSpace encoding, steps 1..upto).
std::vector<std::vector<double>> zmdp_occupancy(const TabularZMDP& zmdp,
                                                const ResolvedComponent& comp, int upto);

}  // namespace pomdplab
