#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pomdplab/errors.hpp"

namespace pomdplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kValidationTol = 1e-12;
constexpr double kArithmeticTol = 1e-10;
constexpr double kBeliefFloor = 1e-300;  // normalizer below this counts as zero
constexpr int kMarginExactStateLimit = 12;

/// Tabular finite-horizon POMDP.
///
/// Steps are 1-based in all public signatures, matching the file format;
/// internal containers are 0-based with the offsets below. No observation
/// is emitted at step 1: the first observation is o_2.
///   T[h-1][a]   (S x S), entry (s', s) = P(s'|s,a),  h = 1..H-1
///   Ob[h-2]     (O x S), entry (o, s)  = P(o|s),     h = 2..H
///   R[h-2]      (O),     reward of observing o,      h = 2..H
///
/// When `extended` is set, the last state is the absorbing sink and the
/// last observation the sink observation; sink rows never appear in files.
struct PomdpModel {
    int horizon = 0;
    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;
    std::vector<std::string> obs_labels;
    bool extended = false;

    Vec b1;
    std::vector<std::vector<Mat>> T;
    std::vector<Mat> Ob;
    std::vector<Vec> R;

    int num_states() const { return static_cast<int>(state_labels.size()); }
    int num_actions() const { return static_cast<int>(action_labels.size()); }
    int num_obs() const { return static_cast<int>(obs_labels.size()); }
    /// Counts excluding the sink symbols.
    int num_core_states() const { return extended ? num_states() - 1 : num_states(); }
    int num_core_obs() const { return extended ? num_obs() - 1 : num_obs(); }
    int sink_state() const { return num_states() - 1; }
    int sink_obs() const { return num_obs() - 1; }

    const Mat& trans(int h, int a) const { return T[h - 1][a]; }
    Mat& trans(int h, int a) { return T[h - 1][a]; }
    const Mat& obs(int h) const { return Ob[h - 2]; }
    Mat& obs(int h) { return Ob[h - 2]; }
    double reward(int h, int o) const { return R[h - 2][o]; }

    void require_extended() const {
        if (!extended) throw ConfigError("operation requires a sink-extended model");
    }
};

struct Belief {
    Vec p;
    int step = 1;
};

enum class Severity { Error, Warning };

struct ValidationReport {
    struct Entry {
        Severity severity;
        std::string location;
        std::string message;
    };
    std::vector<Entry> entries;

    bool pass() const {
        for (const auto& e : entries)
            if (e.severity == Severity::Error) return false;
        return true;
    }
    void error(std::string loc, std::string msg) {
        entries.push_back({Severity::Error, std::move(loc), std::move(msg)});
    }
    void warning(std::string loc, std::string msg) {
        entries.push_back({Severity::Warning, std::move(loc), std::move(msg)});
    }
};

ValidationReport validate_model(const PomdpModel& model);

/// Adds an absorbing sink state and sink observation. Original dynamics
/// are untouched; R_h(sink) = 0. Idempotent.
PomdpModel extend_with_sinks(const PomdpModel& model);

/// One application of the belief update operator U_h(b; a, o) for a
/// belief at step h, 1 <= h <= H-1. A vanishing normalizer yields the
/// all-mass-on-sink belief (the model must be extended for that case).
Belief belief_update(const PomdpModel& model, const Belief& belief, int a, int o);

/// Belief at step h given the full history a_{1:h-1}, o_{2:h}.
Belief exact_belief(const PomdpModel& model, const std::vector<int>& actions,
                    const std::vector<int>& observations);

/// Approximate belief at step h: start from `prior` at step h-L when
/// h-L > 1 (from b1 at step 1 otherwise) and run belief updates along the
/// window. `actions`/`observations` hold the clipped window of length
/// min(L, h-1); for L = 0 they are empty.
Belief approx_belief(const PomdpModel& model, const Vec& prior,
                     const std::vector<int>& actions, const std::vector<int>& observations,
                     int h, int L);

/// Exact one-step observability margin
///   gamma_h = min_{b != b'} ||Ob_h (b - b')||_1 / ||b - b'||_1,
/// computed by enumerating support bipartitions of the non-sink states
/// and solving one l1-minimizing LP per bipartition. Exact only at desk
/// scale (S <= 12 non-sink states).
struct MarginResult {
    double gamma = 0.0;
    Vec minimizer;  // sum-zero direction with ||x||_1 = 1 attaining gamma
};
MarginResult observability_margin(const PomdpModel& model, int h);
MarginResult observability_margin_serial(const PomdpModel& model, int h);

/// Sampled estimate for S beyond the exact bound: minimum ratio over
/// random sum-zero directions. Upper-bounds the true margin.
double observability_margin_sampled(const PomdpModel& model, int h, int samples,
                                    std::uint64_t seed);

}  // namespace pomdplab
