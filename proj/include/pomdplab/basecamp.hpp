#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pomdplab/policy.hpp"
#include "pomdplab/simulator.hpp"
#include "pomdplab/zmdp.hpp"

namespace pomdplab {

enum class ParamsMode { Theoretical, Practical };

/// Learner hyperparameters. Theoretical mode carries every quantity of
/// the published parameter list evaluated literally (those sample counts
/// are astronomically large and useful for formula checks only);
/// practical mode carries the desk-scale overrides actually run.
struct HyperParams {
    ParamsMode mode = ParamsMode::Practical;
    double alpha = 0.1;
    double beta = 0.1;
    double gamma = 0.0;  // informational in practical mode
    double cstar = 1.0;

    // Theoretical-only derived quantities (NaN in practical mode).
    double eps = std::numeric_limits<double>::quiet_NaN();
    double phi = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    double zeta = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    double delta_prime = std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();

    std::int64_t L = 1;
    std::int64_t K = 1;
    double N0 = 0;  // doubles: theoretical values overflow any integer type
    double N1 = 0;
    std::int64_t eval_episodes = 0;  // 0 = use the 100 H^2 log(K/beta)/alpha^2 formula

    void validate() const;
    std::int64_t n0_int() const;
    std::int64_t n1_int() const;
};

/// Evaluates the published parameter formulas literally (natural logs,
/// ceilings on integer-valued outputs). N0/N1 may overflow to infinity
/// for small gamma; they are kept as doubles for exactness checks.
HyperParams theoretical_params(double alpha, double beta, double gamma, int S, int A, int O,
                               int H, double cstar = 1.0);

struct IterationRecord {
    int k = 0;
    std::vector<int> spanner_rank;         // per h (index h-1)
    std::vector<double> diverted_fraction; // per h, share of canonical (z,a) rows diverting
    double rhat = std::numeric_limits<double>::quiet_NaN();
};

struct LearnReport {
    HyperParams params;
    std::uint64_t master_seed = 0;
    std::vector<IterationRecord> iterations;
    std::vector<double> rhat;  // per k
    int k_star = -1;
    ZPolicy final_policy;
    std::uint64_t episodes_used = 0;
    std::int64_t eval_episodes = 0;
    double wall_seconds = 0.0;  // excluded from deterministic serialization
};

/// K iterations of estimate -> span -> mix, then candidate evaluation and
/// lowest-index argmax selection. Deterministic given the env seed.
LearnReport learn(RolloutEnv& env, const HyperParams& params);

/// Lowest-index argmax.
int select_best(const std::vector<double>& rhat);

}  // namespace pomdplab
