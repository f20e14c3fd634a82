#include "pomdplab/basecamp.hpp"

#include <chrono>
#include <cmath>

#include "pomdplab/estimator.hpp"
#include "pomdplab/spanner.hpp"

namespace pomdplab {

void HyperParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
        throw ConfigError("HyperParams: alpha and beta must lie in (0,1)");
    if (L < 1) throw ConfigError("HyperParams: L must be >= 1");
    if (K < 1 || K > 1000000) throw ConfigError("HyperParams: K must lie in [1, 1e6]");
    if (L > 64) throw ConfigError("HyperParams: window lengths beyond 64 are not desk-scale");
    if (!(N1 >= 1.0) || !(N0 >= 1.0)) throw ConfigError("HyperParams: N0, N1 must be >= 1");
    if (N1 > N0) throw ConfigError("HyperParams: N1 must not exceed N0");
    if (eval_episodes < 0) throw ConfigError("HyperParams: eval_episodes must be >= 0");
}

namespace {

std::int64_t to_count(double v, const char* what) {
    if (!std::isfinite(v) || v > 9.0e15)
        throw ConfigError(std::string(what) +
                          " is too large to run; theoretical sample counts are not desk-scale");
    return static_cast<std::int64_t>(v);
}

}  // namespace

std::int64_t HyperParams::n0_int() const { return to_count(N0, "N0"); }
std::int64_t HyperParams::n1_int() const { return to_count(N1, "N1"); }

HyperParams theoretical_params(double alpha, double beta, double gamma, int S, int A, int O,
                               int H, double cstar) {
    if (alpha <= 0 || alpha >= 1 || beta <= 0 || beta >= 1 || gamma <= 0 || gamma > 1)
        throw ConfigError("theoretical_params: need alpha, beta in (0,1) and gamma in (0,1]");
    if (S < 1 || A < 1 || O < 1 || H < 2) throw ConfigError("theoretical_params: bad shape");

    HyperParams hp;
    hp.mode = ParamsMode::Theoretical;
    hp.alpha = alpha;
    hp.beta = beta;
    hp.gamma = gamma;
    hp.cstar = cstar;

    const double g2 = gamma * gamma;
    hp.eps = alpha * gamma /
             (std::pow(double(O), 2) * std::pow(double(H), 5) * std::pow(double(S), 1.5) *
              cstar * cstar);
    hp.phi = (1.0 / cstar) * gamma /
             (std::pow(double(H), 5) * std::pow(double(S), 3.5) * std::pow(double(O), 2)) * hp.eps;
    const double log_inv_epsphi = std::log(1.0 / (hp.eps * hp.phi));
    const double L_a = log_inv_epsphi * std::log(std::log(1.0 / hp.phi) / hp.eps) / g2;
    const double L_b = log_inv_epsphi / (g2 * g2);
    hp.L = static_cast<std::int64_t>(std::ceil(cstar * std::min(L_a, L_b)));
    hp.theta = hp.eps;
    // zeta = eps*phi / (A^{2L} O^L), evaluated through logs to survive large L.
    const double log_zeta = std::log(hp.eps * hp.phi) -
                            (2.0 * hp.L * std::log(double(A)) + hp.L * std::log(double(O)));
    hp.zeta = std::exp(log_zeta);
    hp.delta = cstar * std::pow(double(O), 2) * std::pow(double(H), 3) * std::sqrt(double(S)) /
               gamma * hp.eps;
    hp.delta_prime = hp.delta / 2.0;
    hp.K = 2ll * H * S;
    hp.p = beta / (2.0 * static_cast<double>(hp.K));

    const double log_n1 = std::log(cstar) + std::log(double(hp.L)) +
                          (hp.L + 1.0) * std::log(double(A)) + hp.L * std::log(double(O)) +
                          std::log(std::log(double(A) * O / hp.p)) - 2.0 * std::log(hp.theta);
    hp.N1 = std::ceil(std::exp(log_n1));
    hp.N0 = std::ceil(cstar * hp.N1 * A * hp.L * std::log(double(O) * A / hp.p) / hp.zeta);
    return hp;
}

int select_best(const std::vector<double>& rhat) {
    if (rhat.empty()) throw ConfigError("select_best: empty candidate list");
    int best = 0;
    for (int i = 1; i < static_cast<int>(rhat.size()); ++i)
        if (rhat[i] > rhat[best]) best = i;
    return best;
}

namespace {

double diverted_fraction(const TabularZMDP& mdp, int h) {
    if (h > mdp.horizon() - 1) return 0.0;
    const auto states = mdp.zspace().canonical_states_at_step(h);
    const std::int64_t total = static_cast<std::int64_t>(states.size()) * mdp.zspace().num_actions();
    if (total == 0) return 0.0;
    std::int64_t diverted = 0;
    for (std::uint64_t z : states)
        for (int a = 0; a < mdp.zspace().num_actions(); ++a)
            if (mdp.diverts(h, z, a)) ++diverted;
    return static_cast<double>(diverted) / static_cast<double>(total);
}

}  // namespace

LearnReport learn(RolloutEnv& env, const HyperParams& params) {
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int H = env.horizon();
    const int K = static_cast<int>(params.K);
    const int L = static_cast<int>(params.L);
    if (H <= L) throw ConfigError("learn: requires H > L");
    const std::int64_t N0 = params.n0_int();
    const std::int64_t N1 = params.n1_int();

    LearnReport report;
    report.params = params;
    report.master_seed = env.master_seed();

    // pis_by_step[h-1] accumulates pi^{1,h}, pi^{2,h}, ... across iterations.
    std::vector<std::vector<GeneralPolicy>> pis_by_step(H);
    for (int h = 1; h <= H; ++h) pis_by_step[h - 1].push_back(GeneralPolicy::uniform());

    std::vector<ZPolicy> candidates;
    candidates.reserve(K);

    for (int k = 1; k <= K; ++k) {
        std::vector<GeneralPolicy> bar;
        bar.reserve(H);
        for (int h = 1; h <= H; ++h) bar.push_back(running_average(pis_by_step[h - 1]));

        ApproxMdpResult amdp = approx_mdp(env, L, N0, N1, bar, "amdp/k" + std::to_string(k));

        IterationRecord rec;
        rec.k = k;
        rec.spanner_rank.resize(H, 0);
        rec.diverted_fraction.resize(H, 0.0);
        for (int h = 1; h <= H; ++h) rec.diverted_fraction[h - 1] = diverted_fraction(amdp.mdp, h);

        candidates.push_back(dp_optimal(amdp.mdp).policy);

        std::vector<GeneralPolicy> spanner_pis(H);
        for (int h = 1; h <= H; ++h) {
            BarySpannerOutcome out = bary_spanner_policy(amdp.mdp, h);
            rec.spanner_rank[h - 1] = out.rank;
            spanner_pis[h - 1] = std::move(out.policy);
        }
        for (int h = 1; h <= H; ++h) {
            const std::vector<GeneralPolicy> tail(spanner_pis.begin() + (h - 1), spanner_pis.end());
            pis_by_step[h - 1].push_back(tail_average(tail));
        }
        report.iterations.push_back(std::move(rec));
    }

    std::int64_t n_eval = params.eval_episodes;
    if (n_eval == 0) {
        n_eval = static_cast<std::int64_t>(
            std::ceil(100.0 * H * H * std::log(static_cast<double>(K) / params.beta) /
                      (params.alpha * params.alpha)));
    }
    report.eval_episodes = n_eval;

    report.rhat.resize(K);
    for (int k = 1; k <= K; ++k) {
        report.rhat[k - 1] = env.mean_return(GeneralPolicy::atom(candidates[k - 1]),
                                             static_cast<int>(n_eval), "eval/k" + std::to_string(k));
        report.iterations[k - 1].rhat = report.rhat[k - 1];
    }
    report.k_star = select_best(report.rhat);
    report.final_policy = candidates[report.k_star];
    report.episodes_used = env.episodes_used();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace pomdplab
