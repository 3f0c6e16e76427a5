#ifndef BAYRN_ENVS_HPP
#define BAYRN_ENVS_HPP

#include "bayrn/param_space.hpp"
#include "bayrn/policy.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bayrn {

enum class EnvId { PuckSlide1D, CartpoleDr, PendulumDr };

std::string env_id_name(EnvId id);
EnvId env_id_from_name(const std::string& name);

// How a proposed phi turns into the episode's actual coefficients.
struct DrMode {
    enum Kind { Point, GaussianBand };
    Kind kind = GaussianBand;
    // GaussianBand: per-episode phi ~ trunc normal around the proposal,
    // std = relative_std * dim width.
    double relative_std = 0.05;
};

struct EnvSpec {
    EnvId id = EnvId::PuckSlide1D;
    int horizon = 200;
    double dt = 0.02;
    DomainParamSpace dr_space;
    DrMode dr_mode;
};

// Hidden "real world": episodes draw phi ~ trunc normal around phi_star.
struct GroundTruth {
    ParamVec phi_star;
    ParamVec episode_noise;  // absolute std per dimension
};

struct EnvState {
    Eigen::VectorXd q;              // physical coordinates, layout per env
    std::vector<double> delay_buf;  // pending actions, oldest first
    double perturb_force = 0.0;     // piecewise-constant random push
    ParamVec phi_episode;           // coefficients fixed at reset
    std::uint64_t noise_key = 0;    // drives the perturbation schedule
    int t = 0;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
};

int env_obs_dim(EnvId id);
inline constexpr int kEnvActDim = 1;
// Perturbation force is redrawn every this many env steps.
inline constexpr int kForceResamplePeriod = 10;

EnvSpec make_env_spec(EnvId id);
std::vector<EnvSpec> make_env_suite();
GroundTruth default_ground_truth(const EnvSpec& spec);

// Truncated-normal episode draw around `center`, clamped into `space`.
ParamVec sample_phi_trunc(const DomainParamSpace& space, const ParamVec& center,
                          const ParamVec& std_abs, std::mt19937_64& gen);
// Applies spec.dr_mode to a proposed phi.
ParamVec sample_episode_phi(const EnvSpec& spec, const ParamVec& phi,
                            std::mt19937_64& gen);

EnvState env_reset(const EnvSpec& spec, const ParamVec& phi, std::uint64_t seed);
// Advances one control step (internally substepped); reads the episode's
// coefficients from state.phi_episode.
StepResult env_step(const EnvSpec& spec, EnvState& state,
                    const Eigen::VectorXd& action);
Eigen::VectorXd env_observe(const EnvSpec& spec, const EnvState& state);

struct RolloutResult {
    double ret = 0.0;          // undiscounted return
    std::int64_t steps = 0;    // simulated env steps (early done permitted)
};

RolloutResult rollout(const EnvSpec& spec, const PolicyParams& policy,
                      const ParamVec& phi, std::uint64_t seed);
double episodic_return(const EnvSpec& spec, const PolicyParams& policy,
                       const ParamVec& phi, std::uint64_t seed);
double real_eval(const EnvSpec& spec, const GroundTruth& gt,
                 const PolicyParams& policy, int n_episodes, std::uint64_t seed);

}  // namespace bayrn

#endif  // BAYRN_ENVS_HPP
