#include "pomdplab/policy.hpp"

#include <cmath>

#include "pomdplab/errors.hpp"

namespace pomdplab {

GeneralPolicy::NodePtr GeneralPolicy::uniform_node() {
    static const NodePtr node = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Uniform;
        return NodePtr(n);
    }();
    return node;
}

GeneralPolicy GeneralPolicy::uniform() { return GeneralPolicy(uniform_node()); }

GeneralPolicy GeneralPolicy::atom(ZPolicy pi) {
    return atom(std::make_shared<const ZPolicy>(std::move(pi)));
}

GeneralPolicy GeneralPolicy::atom(std::shared_ptr<const ZPolicy> pi) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->atom = std::move(pi);
    return GeneralPolicy(n);
}

GeneralPolicy GeneralPolicy::mixture(std::vector<std::pair<double, GeneralPolicy>> comps) {
    if (comps.empty()) throw ConfigError("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& [w, p] : comps) {
        if (!(w >= 0.0)) throw ConfigError("mixture weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Mixture;
    n->components.reserve(comps.size());
    for (auto& [w, p] : comps) n->components.push_back({w, p.node()});
    return GeneralPolicy(n);
}

GeneralPolicy GeneralPolicy::prefix_then_uniform(GeneralPolicy base, int cutoff) {
    if (cutoff < 1) throw ConfigError("prefix_then_uniform cutoff must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = Kind::PrefixUniform;
    n->base = base.node();
    n->cutoff = cutoff;
    return GeneralPolicy(n);
}

GeneralPolicy hat_policy(const GeneralPolicy& pi, int h, int L) {
    const int cutoff = std::max(h - L - 1, 0) + 1;
    return GeneralPolicy::prefix_then_uniform(pi, cutoff);
}

namespace {

GeneralPolicy uniform_average(const std::vector<GeneralPolicy>& pis, const char* what) {
    if (pis.empty()) throw ConfigError(std::string(what) + ": empty policy list");
    const double w = 1.0 / static_cast<double>(pis.size());
    std::vector<std::pair<double, GeneralPolicy>> comps;
    comps.reserve(pis.size());
    for (const auto& p : pis) comps.emplace_back(w, p);
    return GeneralPolicy::mixture(std::move(comps));
}

}  // namespace

GeneralPolicy tail_average(const std::vector<GeneralPolicy>& pis) {
    return uniform_average(pis, "tail_average");
}

GeneralPolicy running_average(const std::vector<GeneralPolicy>& pis) {
    return uniform_average(pis, "running_average");
}

namespace {

void resolve_rec(const GeneralPolicy::NodePtr& node, int horizon, double weight,
                 std::vector<std::pair<double, ResolvedComponent>>& out) {
    using Kind = GeneralPolicy::Kind;
    switch (node->kind) {
        case Kind::Uniform: {
            ResolvedComponent c;
            c.steps.assign(horizon, {true, nullptr});
            out.emplace_back(weight, std::move(c));
            break;
        }
        case Kind::Atom: {
            ResolvedComponent c;
            c.steps.assign(horizon, {false, node->atom});
            out.emplace_back(weight, std::move(c));
            break;
        }
        case Kind::Mixture: {
            for (const auto& comp : node->components) {
                if (comp.weight == 0.0) continue;
                resolve_rec(comp.node, horizon, weight * comp.weight, out);
                if (static_cast<int>(out.size()) > kMixtureExpansionLimit)
                    throw DeskScaleError(
                        "mixture expansion exceeds the exact-computation limit; "
                        "use Monte Carlo estimation instead");
            }
            break;
        }
        case Kind::PrefixUniform: {
            std::vector<std::pair<double, ResolvedComponent>> sub;
            resolve_rec(node->base, horizon, weight, sub);
            for (auto& [w, c] : sub) {
                for (int h = node->cutoff; h <= horizon; ++h) c.steps[h - 1] = {true, nullptr};
                out.emplace_back(w, std::move(c));
                if (static_cast<int>(out.size()) > kMixtureExpansionLimit)
                    throw DeskScaleError(
                        "mixture expansion exceeds the exact-computation limit; "
                        "use Monte Carlo estimation instead");
            }
            break;
        }
    }
}

ResolvedComponent sample_component(const GeneralPolicy::NodePtr& node, int horizon,
                                   Stream& stream) {
    using Kind = GeneralPolicy::Kind;
    switch (node->kind) {
        case Kind::Uniform: {
            ResolvedComponent c;
            c.steps.assign(horizon, {true, nullptr});
            return c;
        }
        case Kind::Atom: {
            ResolvedComponent c;
            c.steps.assign(horizon, {false, node->atom});
            return c;
        }
        case Kind::Mixture: {
            std::vector<double> w;
            w.reserve(node->components.size());
            for (const auto& comp : node->components) w.push_back(comp.weight);
            const int pick = stream.categorical(w);
            return sample_component(node->components[pick].node, horizon, stream);
        }
        case Kind::PrefixUniform: {
            ResolvedComponent c = sample_component(node->base, horizon, stream);
            for (int h = node->cutoff; h <= horizon; ++h) c.steps[h - 1] = {true, nullptr};
            return c;
        }
    }
    throw InternalError("unreachable policy node kind");
}

}  // namespace

std::vector<std::pair<double, ResolvedComponent>> resolve_all(const GeneralPolicy& policy,
                                                              int horizon) {
    std::vector<std::pair<double, ResolvedComponent>> out;
    resolve_rec(policy.node(), horizon, 1.0, out);
    return out;
}

PolicyExecution::PolicyExecution(const GeneralPolicy& policy, int horizon, int num_actions,
                                 Stream stream)
    : stream_(stream), num_actions_(num_actions) {
    component_ = sample_component(policy.node(), horizon, stream_);
}

int PolicyExecution::act(int h) {
    const auto& rule = component_.rule(h);
    if (rule.uniform) return stream_.uniform_int(num_actions_);
    const std::uint64_t z = rule.table->zspace.canonical(actions_, observations_);
    return rule.table->act(h, z);
}

void PolicyExecution::observe(int a, int o) {
    actions_.push_back(a);
    observations_.push_back(o);
}

PolicyExecution begin_episode(const GeneralPolicy& policy, int horizon, int num_actions,
                              Stream stream) {
    return PolicyExecution(policy, horizon, num_actions, stream);
}

}  // namespace pomdplab
