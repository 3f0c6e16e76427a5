#include "bayrn/envs.hpp"

#include "bayrn/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bayrn {

namespace {

constexpr double kGravity = 9.81;

// puck-slide-1d: block of base mass 1 kg pushed along a line toward a target
// at +2 m under Coulomb friction. q = [x, v]. Force = 20 N * action.
constexpr double kPuckForceMax = 20.0;
constexpr double kPuckTarget = 2.0;
constexpr double kPuckRewardScale = 4.0;
constexpr double kPuckRewardWidth = 0.25;

// cartpole-dr: classic cart-pole with viscous damping on cart and pivot,
// both scaled by the friction multiplier. q = [x, xd, th, thd], th = 0 upright.
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kPoleHalfLen = 0.5;
constexpr double kCartForceMax = 10.0;
constexpr double kCartDamping = 0.1;
constexpr double kPivotDamping = 0.002;
constexpr double kThetaLimit = 0.21;
constexpr double kXLimit = 2.4;

// pendulum-dr: torque-limited pendulum, th = 0 upright, starts hanging.
// q = [th, thd]. Base mass 1 kg, length 1 m, torque = 6 N*m * action.
constexpr double kPendTorqueMax = 6.0;
constexpr double kPendLen = 1.0;

// Substep counts chosen so semi-implicit Euler keeps energy drift small at
// dt = 0.02; the puck integrates in a single step so its one-step update is
// exactly the documented rule.
int substeps(EnvId id) {
    switch (id) {
        case EnvId::PuckSlide1D: return 1;
        case EnvId::CartpoleDr: return 4;
        case EnvId::PendulumDr: return 8;
    }
    throw std::logic_error("unknown env id");
}

constexpr std::uint64_t kStreamReset = 0x72657374;
constexpr std::uint64_t kStreamNoise = 0x6e6f6973;
constexpr std::uint64_t kStreamPerturb = 0x70727462;
constexpr std::uint64_t kStreamRealEval = 0x7265'616c;

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double wrap_pi(double a) {
    a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return a - std::numbers::pi;
}

int delay_steps(const ParamVec& phi_episode) {
    return int(std::llround(phi_episode[1]));
}

}  // namespace

std::string env_id_name(EnvId id) {
    switch (id) {
        case EnvId::PuckSlide1D: return "puck-slide-1d";
        case EnvId::CartpoleDr: return "cartpole-dr";
        case EnvId::PendulumDr: return "pendulum-dr";
    }
    throw std::logic_error("unknown env id");
}

EnvId env_id_from_name(const std::string& name) {
    if (name == "puck-slide-1d") return EnvId::PuckSlide1D;
    if (name == "cartpole-dr") return EnvId::CartpoleDr;
    if (name == "pendulum-dr") return EnvId::PendulumDr;
    throw std::invalid_argument("unknown env id: " + name);
}

int env_obs_dim(EnvId id) {
    switch (id) {
        case EnvId::PuckSlide1D: return 3;  // [x, v, target - x]
        case EnvId::CartpoleDr: return 4;   // [x, xd, th, thd]
        case EnvId::PendulumDr: return 3;   // [cos th, sin th, thd]
    }
    throw std::logic_error("unknown env id");
}

EnvSpec make_env_spec(EnvId id) {
    EnvSpec spec;
    spec.id = id;
    switch (id) {
        case EnvId::PuckSlide1D:
            spec.dr_space = DomainParamSpace({
                {"friction", 0.5, 1.25, DimKind::Continuous},
                {"mass_mult", 0.25, 2.0, DimKind::Continuous},
            });
            break;
        case EnvId::CartpoleDr:
            spec.dr_space = DomainParamSpace({
                {"friction_mult", 0.8, 2.0, DimKind::Continuous},
                {"control_delay", 0.0, 8.0, DimKind::Integer},
                {"force_max", 0.0, 1.25, DimKind::Continuous},
            });
            break;
        case EnvId::PendulumDr:
            spec.dr_space = DomainParamSpace({
                {"mass_mult", 0.25, 2.0, DimKind::Continuous},
                {"damping", 0.0, 0.3, DimKind::Continuous},
                {"force_max", 0.0, 1.0, DimKind::Continuous},
            });
            break;
    }
    return spec;
}

std::vector<EnvSpec> make_env_suite() {
    return {make_env_spec(EnvId::PuckSlide1D), make_env_spec(EnvId::CartpoleDr),
            make_env_spec(EnvId::PendulumDr)};
}

GroundTruth default_ground_truth(const EnvSpec& spec) {
    GroundTruth gt;
    switch (spec.id) {
        case EnvId::PuckSlide1D:
            gt.phi_star = Eigen::Vector2d(0.75, 1.0);
            break;
        case EnvId::CartpoleDr:
            gt.phi_star = Eigen::Vector3d(1.2, 3.0, 0.5);
            break;
        case EnvId::PendulumDr:
            gt.phi_star = Eigen::Vector3d(1.0, 0.1, 0.3);
            break;
    }
    gt.episode_noise = ParamVec::Constant(gt.phi_star.size(), 0.01);
    return gt;
}

ParamVec sample_phi_trunc(const DomainParamSpace& space, const ParamVec& center,
                          const ParamVec& std_abs, std::mt19937_64& gen) {
    if (center.size() != space.size() || std_abs.size() != space.size())
        throw std::invalid_argument("sample_phi_trunc: dimension mismatch");
    ParamVec out(space.size());
    for (int k = 0; k < space.size(); ++k) {
        const auto& d = space.dim(k);
        out[k] = rng::trunc_gaussian(gen, center[k], std_abs[k], d.lo, d.hi);
    }
    return clamp_to_space(out, space);
}

ParamVec sample_episode_phi(const EnvSpec& spec, const ParamVec& phi,
                            std::mt19937_64& gen) {
    if (spec.dr_mode.kind == DrMode::Point) return clamp_to_space(phi, spec.dr_space);
    ParamVec std_abs = spec.dr_mode.relative_std * spec.dr_space.width();
    return sample_phi_trunc(spec.dr_space, phi, std_abs, gen);
}

EnvState env_reset(const EnvSpec& spec, const ParamVec& phi, std::uint64_t seed) {
    if (!spec.dr_space.contains(phi))
        throw std::invalid_argument("env_reset: phi outside dr-space");
    auto gen = rng::engine(seed, kStreamReset, std::uint64_t(spec.id));
    EnvState s;
    s.phi_episode = sample_episode_phi(spec, phi, gen);
    s.noise_key = rng::derive(seed, kStreamNoise, std::uint64_t(spec.id));
    s.t = 0;
    switch (spec.id) {
        case EnvId::PuckSlide1D:
            s.q = Eigen::Vector2d(0.0, 0.0);
            break;
        case EnvId::CartpoleDr:
            s.q = Eigen::Vector4d(0.0, 0.0, rng::uniform_in(gen, -0.05, 0.05), 0.0);
            s.delay_buf.assign(std::size_t(delay_steps(s.phi_episode)), 0.0);
            break;
        case EnvId::PendulumDr:
            s.q = Eigen::Vector2d(std::numbers::pi, rng::uniform_in(gen, -0.1, 0.1));
            break;
    }
    return s;
}

Eigen::VectorXd env_observe(const EnvSpec& spec, const EnvState& state) {
    switch (spec.id) {
        case EnvId::PuckSlide1D:
            return Eigen::Vector3d(state.q[0], state.q[1], kPuckTarget - state.q[0]);
        case EnvId::CartpoleDr:
            return state.q;
        case EnvId::PendulumDr:
            return Eigen::Vector3d(std::cos(state.q[0]), std::sin(state.q[0]),
                                   state.q[1]);
    }
    throw std::logic_error("unknown env id");
}

namespace {

// Perturbation force for the block of steps containing step t: magnitude
// uniform in [0, fmax], random sign, redrawn every kForceResamplePeriod steps.
double perturb_at(std::uint64_t noise_key, int t, double fmax) {
    if (fmax <= 0.0) return 0.0;
    auto gen = rng::engine(noise_key, kStreamPerturb,
                           std::uint64_t(t / kForceResamplePeriod));
    const double mag = rng::uniform_in(gen, 0.0, fmax);
    const double sgn = rng::uniform01(gen) < 0.5 ? -1.0 : 1.0;
    return sgn * mag;
}

// One control step of the puck. Coulomb rule, resolved once per step:
//   moving: a = F/m - mu*g*sign(v); if the velocity update crosses zero and
//           |F| <= mu*m*g the puck sticks (v' = 0)
//   at rest: stays at rest unless |F| > mu*m*g, then a = (F - mu*m*g*sign(F))/m
// Position integrates with the updated velocity (semi-implicit).
double step_puck(EnvState& s, double dt, double a) {
    const double mu = s.phi_episode[0];
    const double m = s.phi_episode[1];
    const double F = kPuckForceMax * a;
    double x = s.q[0], v = s.q[1];
    const double hold = mu * m * kGravity;
    double v2;
    if (v != 0.0) {
        v2 = v + dt * (F / m - mu * kGravity * sign(v));
        if (v2 * v < 0.0 && std::abs(F) <= hold) v2 = 0.0;
    } else {
        v2 = std::abs(F) > hold ? dt * (F - hold * sign(F)) / m : 0.0;
    }
    x += dt * v2;
    s.q[0] = x;
    s.q[1] = v2;
    return kPuckRewardScale * std::exp(-std::abs(x - kPuckTarget) / kPuckRewardWidth);
}

void substep_cartpole(Eigen::Vector4d& q, double h, double force, double fric) {
    const double total_m = kCartMass + kPoleMass;
    const double x = q[0], xd = q[1], th = q[2], thd = q[3];
    const double st = std::sin(th), ct = std::cos(th);
    const double F = force - kCartDamping * fric * xd;
    const double temp = (F + kPoleMass * kPoleHalfLen * thd * thd * st) / total_m;
    const double th_acc =
        (kGravity * st - ct * temp -
         kPivotDamping * fric * thd / (kPoleMass * kPoleHalfLen)) /
        (kPoleHalfLen * (4.0 / 3.0 - kPoleMass * ct * ct / total_m));
    const double x_acc = temp - kPoleMass * kPoleHalfLen * th_acc * ct / total_m;
    q[1] = xd + h * x_acc;
    q[3] = thd + h * th_acc;
    q[0] = x + h * q[1];
    q[2] = th + h * q[3];
}

void substep_pendulum(Eigen::Vector2d& q, double h, double torque, double m) {
    const double th_acc = (kGravity / kPendLen) * std::sin(q[0]) +
                          torque / (m * kPendLen * kPendLen);
    q[1] += h * th_acc;
    q[0] += h * q[1];
}

}  // namespace

StepResult env_step(const EnvSpec& spec, EnvState& state,
                    const Eigen::VectorXd& action) {
    if (state.t >= spec.horizon) throw std::invalid_argument("env_step: past horizon");
    if (action.size() != kEnvActDim || !action.allFinite())
        throw std::invalid_argument("env_step: bad action");
    const double a = action[0];

    // Delayed control: the buffer holds the next |delay| commands, oldest first.
    double a_eff = a;
    if (!state.delay_buf.empty()) {
        a_eff = state.delay_buf.front();
        state.delay_buf.erase(state.delay_buf.begin());
        state.delay_buf.push_back(a);
    }

    StepResult out;
    const int n_sub = substeps(spec.id);
    const double h = spec.dt / n_sub;
    switch (spec.id) {
        case EnvId::PuckSlide1D: {
            out.reward = step_puck(state, spec.dt, a_eff);
            break;
        }
        case EnvId::CartpoleDr: {
            state.perturb_force =
                perturb_at(state.noise_key, state.t, state.phi_episode[2]);
            Eigen::Vector4d q = state.q;
            const double force = kCartForceMax * a_eff + state.perturb_force;
            for (int i = 0; i < n_sub; ++i)
                substep_cartpole(q, h, force, state.phi_episode[0]);
            state.q = q;
            out.reward = 1.0;
            out.done = std::abs(q[2]) > kThetaLimit || std::abs(q[0]) > kXLimit;
            break;
        }
        case EnvId::PendulumDr: {
            state.perturb_force =
                perturb_at(state.noise_key, state.t, state.phi_episode[2]);
            Eigen::Vector2d q = state.q;
            const double damping = state.phi_episode[1];
            for (int i = 0; i < n_sub; ++i) {
                const double torque = kPendTorqueMax * a_eff + state.perturb_force -
                                      damping * q[1];
                substep_pendulum(q, h, torque, state.phi_episode[0]);
            }
            state.q = q;
            const double th = wrap_pi(q[0]);
            out.reward = -(th * th + 0.1 * q[1] * q[1] + 0.001 * a_eff * a_eff);
            break;
        }
    }
    state.t += 1;
    if (state.t >= spec.horizon) out.done = true;
    if (!state.q.allFinite()) throw std::runtime_error("env_step: state diverged");
    return out;
}

RolloutResult rollout(const EnvSpec& spec, const PolicyParams& policy,
                      const ParamVec& phi, std::uint64_t seed) {
    if (policy.arch.obs_dim != env_obs_dim(spec.id) ||
        policy.arch.act_dim != kEnvActDim)
        throw std::invalid_argument("rollout: policy arch does not fit env");
    EnvState s = env_reset(spec, phi, seed);
    RolloutResult out;
    while (s.t < spec.horizon) {
        const Eigen::VectorXd act = policy_act(policy, env_observe(spec, s));
        const StepResult r = env_step(spec, s, act);
        out.ret += r.reward;
        out.steps += 1;
        if (r.done) break;
    }
    return out;
}

double episodic_return(const EnvSpec& spec, const PolicyParams& policy,
                       const ParamVec& phi, std::uint64_t seed) {
    return rollout(spec, policy, phi, seed).ret;
}

double real_eval(const EnvSpec& spec, const GroundTruth& gt,
                 const PolicyParams& policy, int n_episodes, std::uint64_t seed) {
    if (n_episodes < 1) throw std::invalid_argument("real_eval: n_episodes < 1");
    if (!spec.dr_space.contains(gt.phi_star))
        throw std::invalid_argument("real_eval: phi_star outside dr-space");
    EnvSpec at_point = spec;
    at_point.dr_mode.kind = DrMode::Point;
    double total = 0.0;
    for (int e = 0; e < n_episodes; ++e) {
        auto gen = rng::engine(seed, kStreamRealEval, std::uint64_t(e));
        const ParamVec phi_e =
            sample_phi_trunc(spec.dr_space, gt.phi_star, gt.episode_noise, gen);
        total += episodic_return(at_point, policy, phi_e,
                                 rng::derive(seed, kStreamRealEval, std::uint64_t(e), 1));
    }
    return total / n_episodes;
}

}  // namespace bayrn
