#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pomdplab/basecamp.hpp"
#include "pomdplab/model.hpp"
#include "pomdplab/policy.hpp"
#include "pomdplab/simulator.hpp"
#include "pomdplab/zmdp.hpp"

namespace pomdplab {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Model files carry the core (sink-free) tables; loading validates and
// sink-extends, saving strips the sink rows back off.
Json model_to_json(const PomdpModel& model);
PomdpModel model_from_json(const Json& j);
PomdpModel load_model(const std::string& path);
void save_model(const PomdpModel& model, const std::string& path);

Json policy_to_json(const GeneralPolicy& policy);
GeneralPolicy policy_from_json(const Json& j);
GeneralPolicy load_policy(const std::string& path);
void save_policy(const GeneralPolicy& policy, const std::string& path);

Json zpolicy_to_json(const ZPolicy& pi);
ZPolicy zpolicy_from_json(const Json& j);

Json zmdp_to_json(const TabularZMDP& mdp);
TabularZMDP zmdp_from_json(const Json& j);
std::string zmdp_dump(const TabularZMDP& mdp);  // canonical byte form, for golden tests
void save_zmdp(const TabularZMDP& mdp, const std::string& path);
TabularZMDP load_zmdp(const std::string& path);

/// Trajectory batch dump: a JSONL file, header line then one episode per
/// record with (phase, index, actions, observations, rewards).
struct TrajectoryDump {
    int horizon = 0;
    int num_actions = 0;
    int num_core_obs = 0;
    std::uint64_t master = 0;
    std::vector<std::pair<std::string, ObservedTrajectory>> records;
};
void save_trajectory_dump(const TrajectoryDump& dump, const std::string& path);
TrajectoryDump load_trajectory_dump(const std::string& path);

Json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const Json& j);

/// Deterministic serialization (timing excluded by design).
Json learn_report_to_json(const LearnReport& report);

std::string config_hash(const Json& config);
Json report_envelope(const std::string& command, std::uint64_t seed, const Json& config);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace pomdplab
