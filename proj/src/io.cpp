#include "pomdplab/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pomdplab/rng.hpp"

namespace pomdplab {

namespace {

void expect_kind(const Json& j, const char* kind) {
    if (!j.is_object() || j.value("kind", "") != kind)
        throw ConfigError(std::string("expected a \"") + kind + "\" document");
    if (j.value("format_version", -1) != kFormatVersion)
        throw ConfigError("unsupported format_version");
}

}  // namespace

Json model_to_json(const PomdpModel& model) {
    // Serialize the sink-free core.
    const int S = model.num_core_states();
    const int O = model.num_core_obs();
    const int A = model.num_actions();
    const int H = model.horizon;

    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "pomdp_model";
    j["horizon"] = H;
    j["states"] = std::vector<std::string>(model.state_labels.begin(),
                                           model.state_labels.begin() + S);
    j["actions"] = model.action_labels;
    j["observations"] = std::vector<std::string>(model.obs_labels.begin(),
                                                 model.obs_labels.begin() + O);
    std::vector<double> b1(S);
    for (int s = 0; s < S; ++s) b1[s] = model.b1[s];
    j["b1"] = b1;

    Json T = Json::array();
    for (int h = 1; h <= H - 1; ++h) {
        Json per_a = Json::array();
        for (int a = 0; a < A; ++a) {
            Json rows = Json::array();
            for (int sn = 0; sn < S; ++sn) {
                std::vector<double> row(S);
                for (int sc = 0; sc < S; ++sc) row[sc] = model.trans(h, a)(sn, sc);
                rows.push_back(row);
            }
            per_a.push_back(std::move(rows));
        }
        T.push_back(std::move(per_a));
    }
    j["T"] = std::move(T);

    Json Ob = Json::array(), R = Json::array();
    for (int h = 2; h <= H; ++h) {
        Json rows = Json::array();
        for (int o = 0; o < O; ++o) {
            std::vector<double> row(S);
            for (int s = 0; s < S; ++s) row[s] = model.obs(h)(o, s);
            rows.push_back(row);
        }
        Ob.push_back(std::move(rows));
        std::vector<double> r(O);
        for (int o = 0; o < O; ++o) r[o] = model.reward(h, o);
        R.push_back(r);
    }
    j["Ob"] = std::move(Ob);
    j["R"] = std::move(R);
    return j;
}

PomdpModel model_from_json(const Json& j) {
    expect_kind(j, "pomdp_model");
    PomdpModel m;
    m.horizon = j.at("horizon").get<int>();
    m.state_labels = j.at("states").get<std::vector<std::string>>();
    m.action_labels = j.at("actions").get<std::vector<std::string>>();
    m.obs_labels = j.at("observations").get<std::vector<std::string>>();
    const int S = m.num_states(), A = m.num_actions(), O = m.num_obs(), H = m.horizon;

    const auto b1 = j.at("b1").get<std::vector<double>>();
    if (static_cast<int>(b1.size()) != S) throw ConfigError("model file: b1 has wrong length");
    m.b1 = Eigen::Map<const Vec>(b1.data(), S);

    const Json& T = j.at("T");
    if (static_cast<int>(T.size()) != H - 1) throw ConfigError("model file: T has wrong length");
    m.T.resize(H - 1);
    for (int hi = 0; hi < H - 1; ++hi) {
        if (static_cast<int>(T[hi].size()) != A) throw ConfigError("model file: T[h] needs A tables");
        m.T[hi].resize(A);
        for (int a = 0; a < A; ++a) {
            Mat t(S, S);
            const Json& rows = T[hi][a];
            if (static_cast<int>(rows.size()) != S) throw ConfigError("model file: T table wrong shape");
            for (int sn = 0; sn < S; ++sn) {
                const auto row = rows[sn].get<std::vector<double>>();
                if (static_cast<int>(row.size()) != S)
                    throw ConfigError("model file: T table wrong shape");
                for (int sc = 0; sc < S; ++sc) t(sn, sc) = row[sc];
            }
            m.T[hi][a] = std::move(t);
        }
    }

    const Json& Ob = j.at("Ob");
    const Json& R = j.at("R");
    if (static_cast<int>(Ob.size()) != H - 1 || static_cast<int>(R.size()) != H - 1)
        throw ConfigError("model file: Ob/R have wrong length");
    m.Ob.resize(H - 1);
    m.R.resize(H - 1);
    for (int hi = 0; hi < H - 1; ++hi) {
        Mat ob(O, S);
        if (static_cast<int>(Ob[hi].size()) != O) throw ConfigError("model file: Ob wrong shape");
        for (int o = 0; o < O; ++o) {
            const auto row = Ob[hi][o].get<std::vector<double>>();
            if (static_cast<int>(row.size()) != S) throw ConfigError("model file: Ob wrong shape");
            for (int s = 0; s < S; ++s) ob(o, s) = row[s];
        }
        m.Ob[hi] = std::move(ob);
        const auto r = R[hi].get<std::vector<double>>();
        if (static_cast<int>(r.size()) != O) throw ConfigError("model file: R wrong shape");
        m.R[hi] = Eigen::Map<const Vec>(r.data(), O);
    }
    return m;
}

PomdpModel load_model(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError("model file " + path + ": " + e.what());
    }
    PomdpModel core = model_from_json(j);
    ValidationReport rep = validate_model(core);
    if (!rep.pass()) {
        std::string msg = "model file " + path + " failed validation:";
        for (const auto& e : rep.entries)
            if (e.severity == Severity::Error) msg += " [" + e.location + "] " + e.message + ";";
        throw ModelValidationError(msg);
    }
    return extend_with_sinks(core);
}

void save_model(const PomdpModel& model, const std::string& path) {
    write_text_file(path, model_to_json(model).dump(2) + "\n");
}

Json zpolicy_to_json(const ZPolicy& pi) {
    const ZSpace& zs = pi.zspace;
    Json j;
    j["A"] = zs.num_actions();
    j["O"] = zs.num_real_obs();
    j["L"] = zs.window();
    j["H"] = pi.horizon;
    Json steps = Json::array();
    for (int h = 1; h <= pi.horizon; ++h) {
        std::vector<int> acts;
        for (std::uint64_t z : zs.canonical_states_at_step(h)) acts.push_back(pi.act(h, z));
        steps.push_back(acts);
    }
    j["steps"] = std::move(steps);
    return j;
}

ZPolicy zpolicy_from_json(const Json& j) {
    const ZSpace zs(j.at("A").get<int>(), j.at("O").get<int>(), j.at("L").get<int>());
    ZPolicy pi(zs, j.at("H").get<int>());
    const Json& steps = j.at("steps");
    if (static_cast<int>(steps.size()) != pi.horizon)
        throw ConfigError("policy file: steps list has wrong length");
    for (int h = 1; h <= pi.horizon; ++h) {
        const auto acts = steps[h - 1].get<std::vector<int>>();
        const auto states = zs.canonical_states_at_step(h);
        if (acts.size() != states.size()) throw ConfigError("policy file: step table has wrong size");
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (acts[i] < 0 || acts[i] >= zs.num_actions())
                throw ConfigError("policy file: action out of range");
            pi.set(h, states[i], acts[i]);
        }
    }
    return pi;
}

namespace {

Json node_to_json(const GeneralPolicy::NodePtr& node) {
    using Kind = GeneralPolicy::Kind;
    Json j;
    switch (node->kind) {
        case Kind::Uniform:
            j["type"] = "uniform";
            break;
        case Kind::Atom:
            j["type"] = "atom";
            j["table"] = zpolicy_to_json(*node->atom);
            break;
        case Kind::Mixture: {
            j["type"] = "mixture";
            Json comps = Json::array();
            for (const auto& c : node->components)
                comps.push_back(Json{{"weight", c.weight}, {"node", node_to_json(c.node)}});
            j["components"] = std::move(comps);
            break;
        }
        case Kind::PrefixUniform:
            j["type"] = "prefix_uniform";
            j["cutoff"] = node->cutoff;
            j["base"] = node_to_json(node->base);
            break;
    }
    return j;
}

GeneralPolicy node_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") return GeneralPolicy::uniform();
    if (type == "atom") return GeneralPolicy::atom(zpolicy_from_json(j.at("table")));
    if (type == "mixture") {
        std::vector<std::pair<double, GeneralPolicy>> comps;
        for (const Json& c : j.at("components"))
            comps.emplace_back(c.at("weight").get<double>(), node_from_json(c.at("node")));
        return GeneralPolicy::mixture(std::move(comps));
    }
    if (type == "prefix_uniform")
        return GeneralPolicy::prefix_then_uniform(node_from_json(j.at("base")),
                                                  j.at("cutoff").get<int>());
    throw ConfigError("policy file: unknown node type " + type);
}

}  // namespace

Json policy_to_json(const GeneralPolicy& policy) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "policy";
    j["root"] = node_to_json(policy.node());
    return j;
}

GeneralPolicy policy_from_json(const Json& j) {
    expect_kind(j, "policy");
    return node_from_json(j.at("root"));
}

GeneralPolicy load_policy(const std::string& path) {
    try {
        return policy_from_json(Json::parse(read_text_file(path)));
    } catch (const Json::parse_error& e) {
        throw ConfigError("policy file " + path + ": " + e.what());
    }
}

void save_policy(const GeneralPolicy& policy, const std::string& path) {
    write_text_file(path, policy_to_json(policy).dump(2) + "\n");
}

Json zmdp_to_json(const TabularZMDP& mdp) {
    const ZSpace& zs = mdp.zspace();
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "zmdp";
    j["A"] = zs.num_actions();
    j["O"] = zs.num_real_obs();
    j["L"] = zs.window();
    j["H"] = mdp.horizon();
    Json steps = Json::array();
    for (int h = 1; h <= mdp.horizon(); ++h) {
        Json step;
        step["h"] = h;
        Json rows = Json::array();
        if (h <= mdp.horizon() - 1) {
            std::vector<std::uint64_t> keys;
            for (const auto& [k, v] : mdp.rows_at(h)) keys.push_back(k);
            std::sort(keys.begin(), keys.end());
            for (std::uint64_t k : keys) {
                const auto& dist = mdp.rows_at(h).at(k);
                rows.push_back(Json{{"z", k / zs.num_actions()},
                                    {"a", k % zs.num_actions()},
                                    {"p", dist}});
            }
        }
        step["rows"] = std::move(rows);
        Json rewards = Json::array();
        std::vector<std::uint64_t> rkeys;
        for (const auto& [z, r] : mdp.rewards_at(h)) rkeys.push_back(z);
        std::sort(rkeys.begin(), rkeys.end());
        for (std::uint64_t z : rkeys) rewards.push_back(Json::array({z, mdp.rewards_at(h).at(z)}));
        step["rewards"] = std::move(rewards);
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    return j;
}

TabularZMDP zmdp_from_json(const Json& j) {
    expect_kind(j, "zmdp");
    const ZSpace zs(j.at("A").get<int>(), j.at("O").get<int>(), j.at("L").get<int>());
    TabularZMDP mdp(zs, j.at("H").get<int>());
    for (const Json& step : j.at("steps")) {
        const int h = step.at("h").get<int>();
        for (const Json& row : step.at("rows"))
            mdp.set_row(h, row.at("z").get<std::uint64_t>(), row.at("a").get<int>(),
                        row.at("p").get<std::vector<double>>());
        for (const Json& rw : step.at("rewards"))
            mdp.set_reward(h, rw[0].get<std::uint64_t>(), rw[1].get<double>());
    }
    return mdp;
}

std::string zmdp_dump(const TabularZMDP& mdp) { return zmdp_to_json(mdp).dump(2) + "\n"; }

void save_zmdp(const TabularZMDP& mdp, const std::string& path) {
    write_text_file(path, zmdp_dump(mdp));
}

TabularZMDP load_zmdp(const std::string& path) {
    try {
        return zmdp_from_json(Json::parse(read_text_file(path)));
    } catch (const Json::parse_error& e) {
        throw ConfigError("zmdp file " + path + ": " + e.what());
    }
}

void save_trajectory_dump(const TrajectoryDump& dump, const std::string& path) {
    std::ostringstream os;
    Json header;
    header["format_version"] = kFormatVersion;
    header["kind"] = "trajectory_dump";
    header["horizon"] = dump.horizon;
    header["A"] = dump.num_actions;
    header["O"] = dump.num_core_obs;
    header["master"] = dump.master;
    os << header.dump() << "\n";
    for (const auto& [phase, tr] : dump.records) {
        Json rec;
        rec["phase"] = phase;
        rec["index"] = tr.episode_index;
        rec["actions"] = tr.actions;
        rec["observations"] = tr.observations;
        rec["rewards"] = tr.rewards;
        os << rec.dump() << "\n";
    }
    write_text_file(path, os.str());
}

TrajectoryDump load_trajectory_dump(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trajectory dump " + path + " is empty");
    Json header;
    try {
        header = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw ConfigError("trajectory dump " + path + ": " + e.what());
    }
    expect_kind(header, "trajectory_dump");
    TrajectoryDump dump;
    dump.horizon = header.at("horizon").get<int>();
    dump.num_actions = header.at("A").get<int>();
    dump.num_core_obs = header.at("O").get<int>();
    dump.master = header.at("master").get<std::uint64_t>();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Json rec = Json::parse(line);
        ObservedTrajectory tr;
        tr.episode_index = rec.at("index").get<std::uint64_t>();
        tr.actions = rec.at("actions").get<std::vector<int>>();
        tr.observations = rec.at("observations").get<std::vector<int>>();
        tr.rewards = rec.at("rewards").get<std::vector<double>>();
        dump.records.emplace_back(rec.at("phase").get<std::string>(), std::move(tr));
    }
    return dump;
}

Json hyperparams_to_json(const HyperParams& hp) {
    Json j;
    j["mode"] = hp.mode == ParamsMode::Theoretical ? "theoretical" : "practical";
    j["alpha"] = hp.alpha;
    j["beta"] = hp.beta;
    j["gamma"] = hp.gamma;
    j["cstar"] = hp.cstar;
    j["L"] = hp.L;
    j["K"] = hp.K;
    j["N0"] = hp.N0;
    j["N1"] = hp.N1;
    j["eval_episodes"] = hp.eval_episodes;
    auto put_finite = [&](const char* key, double v) {
        if (std::isfinite(v)) j[key] = v;
    };
    put_finite("eps", hp.eps);
    put_finite("phi", hp.phi);
    put_finite("theta", hp.theta);
    put_finite("zeta", hp.zeta);
    put_finite("delta", hp.delta);
    put_finite("delta_prime", hp.delta_prime);
    put_finite("p", hp.p);
    return j;
}

HyperParams hyperparams_from_json(const Json& j) {
    HyperParams hp;
    hp.mode = j.value("mode", "practical") == "theoretical" ? ParamsMode::Theoretical
                                                            : ParamsMode::Practical;
    hp.alpha = j.value("alpha", hp.alpha);
    hp.beta = j.value("beta", hp.beta);
    hp.gamma = j.value("gamma", hp.gamma);
    hp.cstar = j.value("cstar", hp.cstar);
    hp.L = j.value("L", hp.L);
    hp.K = j.value("K", hp.K);
    hp.N0 = j.value("N0", hp.N0);
    hp.N1 = j.value("N1", hp.N1);
    hp.eval_episodes = j.value("eval_episodes", hp.eval_episodes);
    hp.eps = j.value("eps", hp.eps);
    hp.phi = j.value("phi", hp.phi);
    hp.theta = j.value("theta", hp.theta);
    hp.zeta = j.value("zeta", hp.zeta);
    hp.delta = j.value("delta", hp.delta);
    hp.delta_prime = j.value("delta_prime", hp.delta_prime);
    hp.p = j.value("p", hp.p);
    return hp;
}

Json learn_report_to_json(const LearnReport& report) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "learn_report";
    j["params"] = hyperparams_to_json(report.params);
    j["master_seed"] = report.master_seed;
    Json iters = Json::array();
    for (const auto& it : report.iterations) {
        Json rec;
        rec["k"] = it.k;
        rec["spanner_rank"] = it.spanner_rank;
        rec["diverted_fraction"] = it.diverted_fraction;
        rec["rhat"] = it.rhat;
        iters.push_back(std::move(rec));
    }
    j["iterations"] = std::move(iters);
    j["rhat"] = report.rhat;
    j["k_star"] = report.k_star;
    j["final_policy"] = zpolicy_to_json(report.final_policy);
    j["episodes_used"] = report.episodes_used;
    j["eval_episodes"] = report.eval_episodes;
    return j;
}

std::string config_hash(const Json& config) {
    const std::uint64_t h = fnv1a64(config.dump());
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

Json report_envelope(const std::string& command, std::uint64_t seed, const Json& config) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "report";
    j["command"] = command;
    j["version"] = kToolVersion;
    j["seed"] = seed;
    j["config"] = config;
    j["config_hash"] = config_hash(config);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ConfigError("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace pomdplab
