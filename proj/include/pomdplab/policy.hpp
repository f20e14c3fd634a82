#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pomdplab/rng.hpp"
#include "pomdplab/zspace.hpp"

namespace pomdplab {

/// Deterministic window policy: one action table per step, indexed by the
/// dense ZSpace encoding. Entries for non-canonical indices are unused.
struct ZPolicy {
    ZSpace zspace;
    int horizon = 0;
    std::vector<std::vector<int>> actions;  // [h-1][z]

    ZPolicy() = default;
    ZPolicy(const ZSpace& zs, int H)
        : zspace(zs), horizon(H), actions(H, std::vector<int>(zs.size(), 0)) {}

    int act(int h, std::uint64_t z) const { return actions[h - 1][z]; }
    void set(int h, std::uint64_t z, int a) { actions[h - 1][z] = a; }
};

/// Algebraic general policy: a distribution over deterministic policies,
/// represented as a tree of mixtures over window policies, uniform play,
/// and prefix-then-uniform wrappers. Trees are immutable and share
/// subtrees; copying a GeneralPolicy is cheap.
class GeneralPolicy {
public:
    enum class Kind { Atom, Mixture, PrefixUniform, Uniform };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    struct Component {
        double weight;
        NodePtr node;
    };
    struct Node {
        Kind kind;
        std::shared_ptr<const ZPolicy> atom;    // Atom
        std::vector<Component> components;      // Mixture
        NodePtr base;                           // PrefixUniform
        int cutoff = 1;                         // PrefixUniform: uniform from this step on
    };

    GeneralPolicy() : node_(uniform_node()) {}
    explicit GeneralPolicy(NodePtr n) : node_(std::move(n)) {}

    static GeneralPolicy uniform();
    static GeneralPolicy atom(ZPolicy pi);
    static GeneralPolicy atom(std::shared_ptr<const ZPolicy> pi);
    static GeneralPolicy mixture(std::vector<std::pair<double, GeneralPolicy>> comps);
    static GeneralPolicy prefix_then_uniform(GeneralPolicy base, int cutoff);

    const NodePtr& node() const { return node_; }
    Kind kind() const { return node_->kind; }

private:
    static NodePtr uniform_node();
    NodePtr node_;
};

/// The policy which follows `pi` for the first max(h-L-1, 0) steps and
/// plays uniformly random actions from step max(h-L-1, 0) + 1 on.
GeneralPolicy hat_policy(const GeneralPolicy& pi, int h, int L);

/// Uniform mixture over policies pi^{h}, ..., pi^{H} (weights 1/(H-h+1)).
GeneralPolicy tail_average(const std::vector<GeneralPolicy>& pis);

/// Uniform mixture over the k policies gathered so far (weights 1/k).
GeneralPolicy running_average(const std::vector<GeneralPolicy>& pis);

/// One fully resolved deterministic component: a per-step action rule.
/// Uniform steps stay stochastic (they are Markov and need no expansion).
struct ResolvedComponent {
    struct StepRule {
        bool uniform = true;
        std::shared_ptr<const ZPolicy> table;  // when !uniform
    };
    std::vector<StepRule> steps;  // index h-1

    const StepRule& rule(int h) const { return steps[h - 1]; }
};

constexpr int kMixtureExpansionLimit = 4096;

/// All deterministic resolutions of the mixture tree with their weights.
/// Throws DeskScaleError past kMixtureExpansionLimit components.
std::vector<std::pair<double, ResolvedComponent>> resolve_all(const GeneralPolicy& policy,
                                                              int horizon);

/// Single-episode execution state: mixture nodes are resolved once per
/// episode ("a sample sigma ~ pi is first drawn and then followed"),
/// uniform actions are drawn lazily per step from the episode stream.
class PolicyExecution {
public:
    PolicyExecution(const GeneralPolicy& policy, int horizon, int num_actions, Stream stream);

    /// Action at step h. The caller feeds back each (a_h, o_{h+1}) pair
    /// via observe(), which keeps the canonical window current.
    int act(int h);
    void observe(int a, int o);

    const ResolvedComponent& component() const { return component_; }

private:
    ResolvedComponent component_;
    Stream stream_;
    int num_actions_ = 0;
    std::vector<int> actions_;
    std::vector<int> observations_;
};

/// Draws the per-episode deterministic component.
PolicyExecution begin_episode(const GeneralPolicy& policy, int horizon, int num_actions,
                              Stream stream);

}  // namespace pomdplab
