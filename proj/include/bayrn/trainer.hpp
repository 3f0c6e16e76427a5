#ifndef BAYRN_TRAINER_HPP
#define BAYRN_TRAINER_HPP

#include "bayrn/envs.hpp"
#include "bayrn/param_space.hpp"
#include "bayrn/policy.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace bayrn {

struct EsConfig {
    int population = 16;
    double noise_std = 0.05;
    double step_size = 0.02;
    bool antithetic = true;
    bool rank_shaping = true;
};

struct TrainBudget {
    std::int64_t steps = 0;  // environment timesteps
};

struct TrainCurvePoint {
    std::int64_t cumulative_steps = 0;
    double mean_return = 0.0;  // population mean for that generation
};

struct TrainResult {
    PolicyParams policy;
    std::vector<TrainCurvePoint> curve;  // one point per generation
    std::int64_t consumed = 0;           // exact simulated steps
};

// How training episodes draw their phi: the env's dr-mode around the given
// phi, uniform over the whole space (vanilla DR), or a truncated-normal band
// with explicit absolute stds (oracle training on the real distribution).
enum class PhiSampling { PerDrMode, UniformBox, TruncBand };

// Fitness and simulated-step count of one candidate. Antithetic mates share
// pair_index, so common random numbers fall out of seeding by pair.
using EsEvaluator = std::function<std::pair<double, std::int64_t>(
    const Eigen::VectorXd& theta, int pair_index, int member_index)>;

struct EsGeneration {
    Eigen::VectorXd theta;      // updated parameters
    Eigen::VectorXd direction;  // sum_m w_m eps_m, before step scaling
    double mean_fitness = 0.0;
    std::int64_t steps = 0;
};

// One ES update: antithetic Gaussian perturbations, rank-shaped (or z-scored)
// fitness weights w, then theta += (step_size * noise_std / population) *
// sum_m w_m eps_m. The update magnitude vanishes with noise_std.
EsGeneration es_generation(const Eigen::VectorXd& theta,
                           const EsEvaluator& evaluate, const EsConfig& cfg,
                           std::mt19937_64& gen);

// PolOpt: repeated ES generations until the timestep budget is exhausted.
// Deterministic given seed. Errors if the budget cannot cover one generation.
// TruncBand requires band_std_abs (one nonnegative std per dimension).
TrainResult pol_opt(const PolicyParams& theta_init, const EnvSpec& spec,
                    const ParamVec& phi, TrainBudget budget, const EsConfig& cfg,
                    std::uint64_t seed,
                    PhiSampling sampling = PhiSampling::PerDrMode,
                    const ParamVec& band_std_abs = ParamVec());

// Initial training from a random policy at phi_0 = center of the space
// (or across the whole space when full_range is set).
TrainResult bootstrap_train(const EnvSpec& spec, const EsConfig& cfg,
                            std::int64_t t_bootstrap, std::uint64_t seed,
                            bool full_range = false);

// The per-episode phi draw used by UniformBox training (one draw per
// antithetic pair per generation).
ParamVec vanilla_phi_draw(const DomainParamSpace& space, std::uint64_t seed,
                          std::int64_t generation, int pair);

}  // namespace bayrn

#endif  // BAYRN_TRAINER_HPP
