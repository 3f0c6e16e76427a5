#include "bayrn/trainer.hpp"

#include "bayrn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bayrn {

namespace {

constexpr std::uint64_t kStreamEpisode = 0x65706973;
constexpr std::uint64_t kStreamUniformPhi = 0x756e6966;
constexpr std::uint64_t kStreamBandPhi = 0x62616e64;
constexpr std::uint64_t kStreamGeneration = 0x67656e73;
constexpr std::uint64_t kStreamInit = 0x696e6974;

void check_config(const EsConfig& cfg) {
    if (cfg.population < 2)
        throw std::invalid_argument("es: population must be at least 2");
    if (cfg.antithetic && cfg.population % 2 != 0)
        throw std::invalid_argument("es: antithetic population must be even");
    if (!(cfg.noise_std > 0.0))
        throw std::invalid_argument("es: noise-std must be positive");
    if (!(cfg.step_size > 0.0))
        throw std::invalid_argument("es: step-size must be positive");
}

// Centered ranks in [-0.5, 0.5]; ties broken by member index.
Eigen::VectorXd rank_weights(const Eigen::VectorXd& fitness) {
    const int n = int(fitness.size());
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return fitness[a] < fitness[b]; });
    Eigen::VectorXd w(n);
    for (int rank = 0; rank < n; ++rank)
        w[idx[std::size_t(rank)]] = double(rank) / double(n - 1) - 0.5;
    return w;
}

Eigen::VectorXd zscore_weights(const Eigen::VectorXd& fitness) {
    const double mean = fitness.mean();
    const double var = (fitness.array() - mean).square().mean();
    const double std = std::sqrt(var);
    if (std < 1e-12) return Eigen::VectorXd::Zero(fitness.size());
    return (fitness.array() - mean) / std;
}

}  // namespace

EsGeneration es_generation(const Eigen::VectorXd& theta,
                           const EsEvaluator& evaluate, const EsConfig& cfg,
                           std::mt19937_64& gen) {
    check_config(cfg);
    const int pop = cfg.population;
    const auto dim = theta.size();

    // signed perturbation directions, one per member
    Eigen::MatrixXd eps(dim, pop);
    if (cfg.antithetic) {
        for (int j = 0; j < pop / 2; ++j) {
            for (Eigen::Index k = 0; k < dim; ++k)
                eps(k, 2 * j) = rng::gaussian(gen);
            eps.col(2 * j + 1) = -eps.col(2 * j);
        }
    } else {
        for (int m = 0; m < pop; ++m)
            for (Eigen::Index k = 0; k < dim; ++k) eps(k, m) = rng::gaussian(gen);
    }

    EsGeneration out;
    Eigen::VectorXd fitness(pop);
    for (int m = 0; m < pop; ++m) {
        const int pair = cfg.antithetic ? m / 2 : m;
        const Eigen::VectorXd cand = theta + cfg.noise_std * eps.col(m);
        const auto [f, steps] = evaluate(cand, pair, m);
        if (!std::isfinite(f))
            throw std::runtime_error("es: non-finite fitness for member " +
                                     std::to_string(m));
        fitness[m] = f;
        out.steps += steps;
    }

    const Eigen::VectorXd w =
        cfg.rank_shaping ? rank_weights(fitness) : zscore_weights(fitness);
    out.direction = eps * w;
    out.theta = theta + (cfg.step_size * cfg.noise_std / pop) * out.direction;
    out.mean_fitness = fitness.mean();
    return out;
}

TrainResult pol_opt(const PolicyParams& theta_init, const EnvSpec& spec,
                    const ParamVec& phi, TrainBudget budget, const EsConfig& cfg,
                    std::uint64_t seed, PhiSampling sampling,
                    const ParamVec& band_std_abs) {
    check_config(cfg);
    if (!theta_init.theta.allFinite())
        throw std::invalid_argument("pol_opt: non-finite initial policy");
    if (theta_init.theta.size() != theta_init.arch.param_count())
        throw std::invalid_argument("pol_opt: theta length mismatch");
    if (!spec.dr_space.contains(phi))
        throw std::invalid_argument("pol_opt: phi outside dr-space");
    if (sampling == PhiSampling::TruncBand &&
        (band_std_abs.size() != spec.dr_space.size() ||
         (band_std_abs.array() < 0.0).any()))
        throw std::invalid_argument("pol_opt: band stds must be >= 0 per dimension");
    const std::int64_t generation_cap =
        std::int64_t(cfg.population) * spec.horizon;
    if (budget.steps < generation_cap)
        throw std::invalid_argument("pol_opt: budget below one ES generation");

    EnvSpec at_point = spec;
    at_point.dr_mode.kind = DrMode::Point;

    TrainResult res;
    res.policy = theta_init;
    std::int64_t gen_index = 0;
    while (res.consumed < budget.steps) {
        const EsEvaluator evaluate = [&](const Eigen::VectorXd& th, int pair,
                                         int member) {
            (void)member;
            const PolicyParams cand{theta_init.arch, th};
            const std::uint64_t ep_seed = rng::derive(
                seed, kStreamEpisode, std::uint64_t(gen_index), std::uint64_t(pair));
            if (sampling == PhiSampling::UniformBox) {
                const ParamVec phi_e =
                    vanilla_phi_draw(spec.dr_space, seed, gen_index, pair);
                const RolloutResult r = rollout(at_point, cand, phi_e, ep_seed);
                return std::pair<double, std::int64_t>(r.ret, r.steps);
            }
            if (sampling == PhiSampling::TruncBand) {
                auto pg = rng::engine(seed, kStreamBandPhi,
                                      std::uint64_t(gen_index), std::uint64_t(pair));
                const ParamVec phi_e =
                    sample_phi_trunc(spec.dr_space, phi, band_std_abs, pg);
                const RolloutResult r = rollout(at_point, cand, phi_e, ep_seed);
                return std::pair<double, std::int64_t>(r.ret, r.steps);
            }
            const RolloutResult r = rollout(spec, cand, phi, ep_seed);
            return std::pair<double, std::int64_t>(r.ret, r.steps);
        };
        auto gen_rng = rng::engine(seed, kStreamGeneration, std::uint64_t(gen_index));
        const EsGeneration g =
            es_generation(res.policy.theta, evaluate, cfg, gen_rng);
        res.policy.theta = g.theta;
        res.consumed += g.steps;
        res.curve.push_back({res.consumed, g.mean_fitness});
        ++gen_index;
    }
    return res;
}

TrainResult bootstrap_train(const EnvSpec& spec, const EsConfig& cfg,
                            std::int64_t t_bootstrap, std::uint64_t seed,
                            bool full_range) {
    const PolicyArch arch{env_obs_dim(spec.id), kPolicyHidden, kEnvActDim};
    const PolicyParams theta_rand =
        policy_init(arch, rng::derive(seed, kStreamInit));
    return pol_opt(theta_rand, spec, spec.dr_space.center(), {t_bootstrap}, cfg,
                   seed,
                   full_range ? PhiSampling::UniformBox : PhiSampling::PerDrMode);
}

ParamVec vanilla_phi_draw(const DomainParamSpace& space, std::uint64_t seed,
                          std::int64_t generation, int pair) {
    auto pg = rng::engine(seed, kStreamUniformPhi, std::uint64_t(generation),
                          std::uint64_t(pair));
    return uniform_sample(space, pg);
}

}  // namespace bayrn
