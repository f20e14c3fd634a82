// Command-line front end: model generation and validation, exact
// planning, learning runs, evaluation, and diagnostic reports.
//
// Exit codes: 0 success, 2 config error, 3 validation failure,
// 4 desk-scale bound exceeded, 5 internal invariant violation.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "pomdplab/basecamp.hpp"
#include "pomdplab/diagnostics.hpp"
#include "pomdplab/estimator.hpp"
#include "pomdplab/generator.hpp"
#include "pomdplab/io.hpp"
#include "pomdplab/spanner.hpp"

namespace fs = std::filesystem;
using namespace pomdplab;

namespace {

struct CommonOpts {
    std::string model_path;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir);
}

void write_report(const CommonOpts& opts, const std::string& command, const Json& config,
                  const Json& results, const std::string& metrics_csv) {
    ensure_out_dir(opts.out_dir);
    Json report = report_envelope(command, opts.seed, config);
    report["results"] = results;
    write_text_file(opts.out_dir + "/report.json", report.dump(2) + "\n");
    write_text_file(opts.out_dir + "/metrics.csv", metrics_csv);
}

// Values from --config (a config JSON or a previous report.json) provide
// defaults; explicitly passed flags override them.
Json load_config_defaults(const std::string& path) {
    if (path.empty()) return Json::object();
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    if (j.is_object() && j.contains("config")) return j.at("config");
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
}

std::string csv_header_line(const std::vector<std::string>& cols) {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    return s + "\n";
}

int run_gen(int S, int A, int O, int H, double gamma, const std::string& structure,
            std::uint64_t seed, const std::string& out_path) {
    if (structure != "random" && structure != "noisy-permutation")
        throw ConfigError("structure must be noisy-permutation or random");
    const GenStructure st = structure == "random" ? GenStructure::Random
                                                  : GenStructure::NoisyPermutation;
    const PomdpModel m = generate_model(S, A, O, H, gamma, st, seed);
    const ValidationReport rep = validate_model(m);
    if (!rep.pass()) throw InternalError("generated model failed validation");
    save_model(m, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_validate(const CommonOpts& opts) {
    Json core;
    try {
        core = Json::parse(read_text_file(opts.model_path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
    const PomdpModel m = model_from_json(core);
    const ValidationReport rep = validate_model(m);

    Json entries = Json::array();
    for (const auto& e : rep.entries)
        entries.push_back(Json{{"severity", e.severity == Severity::Error ? "error" : "warning"},
                               {"location", e.location},
                               {"message", e.message}});
    const Json config = {{"model", opts.model_path}};
    const Json results = {{"pass", rep.pass()}, {"entries", entries}};
    std::string csv = csv_header_line({"severity", "location", "message"});
    for (const auto& e : rep.entries)
        csv += std::string(e.severity == Severity::Error ? "error" : "warning") + "," +
               e.location + "," + e.message + "\n";
    write_report(opts, "validate", config, results, csv);
    if (!rep.pass()) throw ModelValidationError("model failed validation (see report)");
    return 0;
}

int run_plan(const CommonOpts& opts, std::int64_t max_histories) {
    const PomdpModel m = load_model(opts.model_path);
    const OptimalValueResult res = exact_optimal_value(m, max_histories);
    const Json config = {{"model", opts.model_path}, {"max_histories", max_histories}};
    const Json results = {{"optimal_value", res.value}, {"histories", res.histories}};
    std::string csv = csv_header_line({"metric", "value"});
    csv += "optimal_value," + Json(res.value).dump() + "\n";
    csv += "histories," + std::to_string(res.histories) + "\n";
    write_report(opts, "plan", config, results, csv);
    std::cout << "optimal value " << res.value << "\n";
    return 0;
}

HyperParams params_from_config(const Json& cfg, const PomdpModel& m) {
    const std::string mode = cfg.value("params_mode", "practical");
    if (mode == "theoretical") {
        const double gamma = cfg.value("gamma", 0.0);
        if (gamma <= 0.0)
            throw ConfigError("theoretical mode needs --gamma (the observability margin)");
        HyperParams hp = theoretical_params(cfg.value("alpha", 0.1), cfg.value("beta", 0.1), gamma,
                                            m.num_core_states(), m.num_actions(),
                                            m.num_core_obs(), m.horizon, cfg.value("cstar", 1.0));
        if (cfg.contains("eval_episodes"))
            hp.eval_episodes = cfg.at("eval_episodes").get<std::int64_t>();
        return hp;
    }
    if (mode != "practical") throw ConfigError("params_mode must be theoretical or practical");
    HyperParams hp;
    hp.mode = ParamsMode::Practical;
    hp.alpha = cfg.value("alpha", 0.1);
    hp.beta = cfg.value("beta", 0.1);
    hp.gamma = cfg.value("gamma", 0.0);
    hp.L = cfg.value("L", 1);
    hp.K = cfg.value("K", 2);
    hp.N0 = cfg.value("N0", 10000.0);
    hp.N1 = cfg.value("N1", 100.0);
    hp.eval_episodes = cfg.value("eval_episodes", 0);
    return hp;
}

int run_learn(const CommonOpts& opts, const Json& config) {
    const PomdpModel m = load_model(opts.model_path);
    const HyperParams hp = params_from_config(config, m);
    hp.validate();

    RolloutEnv env(m, opts.seed);
    const LearnReport rep = learn(env, hp);

    Json results = learn_report_to_json(rep);

    // Exact suboptimality whenever the desk-scale planner can afford it.
    const std::int64_t plan_budget = config.value("plan_budget", std::int64_t(200000));
    double hist_estimate = 1.0;
    for (int h = 1; h < m.horizon; ++h) {
        hist_estimate *= m.num_actions() * m.num_obs();
        if (hist_estimate > static_cast<double>(plan_budget)) break;
    }
    if (hist_estimate <= static_cast<double>(plan_budget)) {
        const double vstar = exact_optimal_value(m, plan_budget).value;
        const double learned = exact_policy_value(m, GeneralPolicy::atom(rep.final_policy));
        results["exact_optimal_value"] = vstar;
        results["exact_policy_value"] = learned;
        results["suboptimality"] = vstar - learned;
    }

    std::string csv =
        csv_header_line({"iteration", "h", "spanner_rank", "diverted_fraction", "rhat"});
    for (const auto& it : rep.iterations)
        for (int h = 1; h <= m.horizon; ++h) {
            std::ostringstream row;
            row << it.k << "," << h << "," << it.spanner_rank[h - 1] << ","
                << Json(it.diverted_fraction[h - 1]).dump() << "," << Json(it.rhat).dump();
            csv += row.str() + "\n";
        }
    write_report(opts, "learn", config, results, csv);
    save_policy(GeneralPolicy::atom(rep.final_policy), opts.out_dir + "/policy.json");
    std::cout << "learned policy written; rhat[k*] = " << rep.rhat[rep.k_star] << "\n";
    return 0;
}

int run_eval(const CommonOpts& opts, const std::string& policy_path, int episodes) {
    const PomdpModel m = load_model(opts.model_path);
    const GeneralPolicy pol = load_policy(policy_path);
    const double value = empirical_value(m, pol, episodes, opts.seed, "eval");
    const Json config = {{"model", opts.model_path},
                         {"policy", policy_path},
                         {"episodes", episodes},
                         {"seed", opts.seed}};
    const Json results = {{"mean_return", value}, {"episodes", episodes}};
    std::string csv = csv_header_line({"metric", "value"});
    csv += "mean_return," + Json(value).dump() + "\n";
    write_report(opts, "eval", config, results, csv);
    std::cout << "mean return " << value << "\n";
    return 0;
}

int run_contract(const CommonOpts& opts, std::vector<int> Ls, int h, int episodes, double phi,
                 double zeta) {
    const PomdpModel m = load_model(opts.model_path);
    if (Ls.empty()) Ls = {1, 2, 4, 6};
    const Vec prior = Vec::Constant(m.num_states(), 1.0 / m.num_states());
    const auto profile =
        contraction_profile(m, GeneralPolicy::uniform(), prior, Ls, h, episodes, opts.seed);

    const Json config = {{"model", opts.model_path},
                         {"h", h},
                         {"episodes", episodes},
                         {"L_grid", Ls},
                         {"phi", phi},
                         {"zeta", zeta},
                         {"seed", opts.seed}};
    Json rows = Json::array();
    std::string csv = csv_header_line({"L", "mean_l1_error", "std_error"});
    for (const auto& pt : profile) {
        rows.push_back(Json{{"L", pt.L}, {"mean", pt.mean_error}, {"se", pt.std_error}});
        csv += std::to_string(pt.L) + "," + Json(pt.mean_error).dump() + "," +
               Json(pt.std_error).dump() + "\n";
    }
    write_report(opts, "contract", config, {{"profile", rows}}, csv);
    // Threshold-set listings under the uniform policy, when requested.
    if (phi >= 0.0)
        write_text_file(opts.out_dir + "/underexplored_sets.csv",
                        underexplored_listing_csv(m, GeneralPolicy::uniform(), phi));
    if (zeta >= 0.0)
        write_text_file(opts.out_dir + "/zlow_sets.csv",
                        zlow_listing_csv(m, GeneralPolicy::uniform(), zeta, Ls.front()));
    return 0;
}

int run_spanner_check(const CommonOpts& opts, const std::string& zmdp_path, int h, double bound) {
    const TabularZMDP mdp = load_zmdp(zmdp_path);
    const int t = h - mdp.window();
    if (t < 1) throw ConfigError("spanner-check: h must exceed the window length L");

    const int dim = mdp.num_ext_obs();
    LinearOracle oracle = [&](const Vec& r) -> OraclePoint {
        LinOptResult lo = linear_opt(mdp, r, h);
        OraclePoint pt;
        pt.value = lo.value;
        pt.point =
            t == 1 ? Vec::Zero(dim) : obs_visitation(mdp, GeneralPolicy::atom(lo.policy), t);
        pt.policy = std::move(lo.policy);
        return pt;
    };
    SpannerTrace trace;
    const SpannerResult sp = barycentric_spanner(oracle, dim, 2.0, &trace);

    const Json config = {{"zmdp", zmdp_path}, {"h", h}, {"bound", bound}};
    if (sp.rank() == 0) {
        std::string csv = csv_header_line({"metric", "value"});
        csv += "rank,0\n";
        write_report(opts, "spanner-check", config,
                     {{"rank", 0}, {"oracle_calls", trace.oracle_calls}, {"degenerate", true}},
                     csv);
        return 0;
    }

    // Enumerate the achievable vertex set (desk scale only) and verify
    // the coefficient bound against it.
    std::vector<std::pair<int, std::uint64_t>> slot_keys;
    for (int step = 1; step <= t - 1; ++step)
        for (std::uint64_t z : mdp.zspace().canonical_states_at_step(step))
            slot_keys.emplace_back(step, z);
    if (slot_keys.size() > 22)
        throw DeskScaleError("spanner-check: vertex enumeration needs <= 22 policy slots");

    const int A = mdp.zspace().num_actions();
    std::vector<int> assign(slot_keys.size(), 0);
    std::vector<Vec> vertices;
    for (;;) {
        ZPolicy pi(mdp.zspace(), mdp.horizon());
        for (std::size_t i = 0; i < slot_keys.size(); ++i)
            pi.set(slot_keys[i].first, slot_keys[i].second, assign[i]);
        vertices.push_back(t == 1 ? Vec::Zero(dim)
                                  : obs_visitation(mdp, GeneralPolicy::atom(pi), t));
        std::size_t i = 0;
        for (; i < assign.size(); ++i) {
            if (++assign[i] < A) break;
            assign[i] = 0;
        }
        if (i == assign.size()) break;
    }

    const CoefficientReport rep = verify_spanner(vertices, sp, bound);
    const Json results = {{"rank", sp.rank()},
                          {"oracle_calls", trace.oracle_calls},
                          {"max_abs_coefficient", rep.max_abs_coefficient},
                          {"within_bound", rep.within_bound},
                          {"span_violations", rep.span_violations},
                          {"vertices", static_cast<std::int64_t>(vertices.size())}};
    std::string csv = csv_header_line({"metric", "value"});
    csv += "rank," + std::to_string(sp.rank()) + "\n";
    csv += "max_abs_coefficient," + Json(rep.max_abs_coefficient).dump() + "\n";
    csv += "oracle_calls," + std::to_string(trace.oracle_calls) + "\n";
    write_report(opts, "spanner-check", config, results, csv);
    if (!rep.within_bound) throw InternalError("spanner coefficient bound violated");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale laboratory for learning near-optimal policies in observable POMDPs"};
    app.require_subcommand(1);

    CommonOpts opts;
    int S = 2, A = 2, O = 2, H = 3;
    double gamma = 0.5, bound = 2.0;
    std::string structure = "noisy-permutation";
    std::string gen_out = "model.json";
    std::string policy_path;
    std::string zmdp_path;
    std::string L_grid;
    int episodes = 10000, step_h = 4;
    std::int64_t max_histories = 1000000;

    auto* gen = app.add_subcommand("gen", "generate a model file");
    gen->add_option("--S", S, "number of states");
    gen->add_option("--A", A, "number of actions");
    gen->add_option("--O", O, "number of observations");
    gen->add_option("--H", H, "horizon");
    gen->add_option("--gamma", gamma, "target observability margin");
    gen->add_option("--structure", structure, "noisy-permutation | random");
    gen->add_option("--seed", opts.seed, "generator seed");
    gen->add_option("--out", gen_out, "output model path");

    auto add_common = [&](CLI::App* cmd, bool needs_model = true) {
        if (needs_model) cmd->add_option("--model", opts.model_path, "model file")->required();
        cmd->add_option("--seed", opts.seed, "master seed");
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--config", opts.config_path, "config JSON (or a previous report.json)");
    };

    auto* validate = app.add_subcommand("validate", "validate a model file");
    add_common(validate);

    auto* plan = app.add_subcommand("plan", "exact optimal value by full-history planning");
    add_common(plan);
    plan->add_option("--max-histories", max_histories, "desk-scale bound on history nodes");

    auto* learn_cmd = app.add_subcommand("learn", "run the learner");
    learn_cmd->add_option("--model", opts.model_path, "model file");
    learn_cmd->add_option("--seed", opts.seed, "master seed");
    learn_cmd->add_option("--out", opts.out_dir, "output directory");
    learn_cmd->add_option("--config", opts.config_path, "config JSON (or a previous report.json)");
    std::string params_mode;
    double alpha = 0, beta = 0, n0 = 0, n1 = 0, cstar = 0, gamma_learn = 0;
    std::int64_t L = 0, K = 0, eval_episodes = -1;
    learn_cmd->add_option("--params-mode", params_mode, "theoretical | practical");
    learn_cmd->add_option("--alpha", alpha, "accuracy target");
    learn_cmd->add_option("--beta", beta, "failure probability");
    learn_cmd->add_option("--gamma", gamma_learn, "observability margin (theoretical mode)");
    learn_cmd->add_option("--L", L, "window length");
    learn_cmd->add_option("--K", K, "iterations");
    learn_cmd->add_option("--N0", n0, "trajectories per estimation phase");
    learn_cmd->add_option("--N1", n1, "visit-count threshold");
    learn_cmd->add_option("--cstar", cstar, "constant C* (theoretical mode)");
    learn_cmd->add_option("--episodes", eval_episodes, "evaluation episodes per candidate");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved policy");
    add_common(eval_cmd);
    eval_cmd->add_option("--policy", policy_path, "policy file")->required();
    eval_cmd->add_option("--episodes", episodes, "number of episodes");

    auto* contract = app.add_subcommand("contract", "belief contraction profile");
    add_common(contract);
    contract->add_option("--step", step_h, "step at which beliefs are compared");
    contract->add_option("--L-grid", L_grid, "comma-separated window lengths");
    contract->add_option("--episodes", episodes, "Monte Carlo trajectories");
    double phi_list = -1.0, zeta_list = -1.0;
    contract->add_option("--phi", phi_list, "also list the phi-underexplored states per step");
    contract->add_option("--zeta", zeta_list, "also list the low-visitation windows per step");

    auto* spanner_check = app.add_subcommand("spanner-check", "verify a spanner on a Z-MDP dump");
    add_common(spanner_check, false);
    spanner_check->add_option("--zmdp", zmdp_path, "Z-MDP dump file")->required();
    spanner_check->add_option("--step", step_h, "spanner step");
    spanner_check->add_option("--bound", bound, "coefficient bound");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(S, A, O, H, gamma, structure, opts.seed, gen_out);
        if (validate->parsed()) return run_validate(opts);
        if (plan->parsed()) return run_plan(opts, max_histories);
        if (learn_cmd->parsed()) {
            Json config = load_config_defaults(opts.config_path);
            if (learn_cmd->count("--model")) config["model"] = opts.model_path;
            if (learn_cmd->count("--seed")) config["seed"] = opts.seed;
            if (learn_cmd->count("--params-mode")) config["params_mode"] = params_mode;
            if (learn_cmd->count("--alpha")) config["alpha"] = alpha;
            if (learn_cmd->count("--beta")) config["beta"] = beta;
            if (learn_cmd->count("--gamma")) config["gamma"] = gamma_learn;
            if (learn_cmd->count("--L")) config["L"] = L;
            if (learn_cmd->count("--K")) config["K"] = K;
            if (learn_cmd->count("--N0")) config["N0"] = n0;
            if (learn_cmd->count("--N1")) config["N1"] = n1;
            if (learn_cmd->count("--cstar")) config["cstar"] = cstar;
            if (eval_episodes >= 0) config["eval_episodes"] = eval_episodes;
            if (!config.contains("model")) throw ConfigError("learn: --model is required");
            opts.model_path = config.at("model").get<std::string>();
            opts.seed = config.value("seed", std::uint64_t(0));
            config["seed"] = opts.seed;
            return run_learn(opts, config);
        }
        if (eval_cmd->parsed()) return run_eval(opts, policy_path, episodes);
        if (contract->parsed()) {
            std::vector<int> Ls;
            std::stringstream ss(L_grid);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) Ls.push_back(std::stoi(item));
            return run_contract(opts, Ls, step_h, episodes, phi_list, zeta_list);
        }
        if (spanner_check->parsed()) return run_spanner_check(opts, zmdp_path, step_h, bound);
    } catch (const ConfigError& e) {
        std::cout << Json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const ModelValidationError& e) {
        std::cout << Json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    } catch (const DeskScaleError& e) {
        std::cout << Json{{"error", "desk_scale"}, {"message", e.what()}}.dump() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cout << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 5;
    }
    return 2;
}
