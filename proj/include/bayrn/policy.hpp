#ifndef BAYRN_POLICY_HPP
#define BAYRN_POLICY_HPP

#include "bayrn/param_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bayrn {

inline constexpr int kPolicyHidden = 16;

// Single-hidden-layer tanh network: obs -> tanh(W1*obs + b1) -> tanh(W2*h + b2).
struct PolicyArch {
    int obs_dim = 0;
    int hidden = kPolicyHidden;
    int act_dim = 1;

    int param_count() const {
        return hidden * obs_dim + hidden + act_dim * hidden + act_dim;
    }
    bool operator==(const PolicyArch&) const = default;
};

// Flat parameter vector theta, laid out as [W1 row-major, b1, W2 row-major, b2].
struct PolicyParams {
    PolicyArch arch;
    Eigen::VectorXd theta;
};

// Scaled-uniform init, each layer in +-1/sqrt(fan_in). Deterministic per seed.
PolicyParams policy_init(const PolicyArch& arch, std::uint64_t seed);

// Forward pass; every action component lies in (-1, 1).
Eigen::VectorXd policy_act(const PolicyParams& policy, const Eigen::VectorXd& obs);

// -- checkpoint files -------------------------------------------------------
//
// Binary format (little-endian), version 1:
//   magic "BRNCKPT1" | u32 version | u32 obs_dim | u32 hidden | u32 act_dim
//   | i64 iteration | i64 parent_iteration | f64 reward
//   | u32 phi_dim | f64 phi[phi_dim] | u64 theta_len | f64 theta[theta_len]
// Round-trips are bit-exact.

struct CheckpointMeta {
    std::int64_t iteration = 0;
    std::int64_t parent_iteration = -1;  // -1 = fresh init
    double reward = 0.0;
    ParamVec phi;
};

struct Checkpoint {
    PolicyParams policy;
    CheckpointMeta meta;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckpointCorruptError : CheckpointError {
    using CheckpointError::CheckpointError;
};
struct CheckpointVersionError : CheckpointError {
    using CheckpointError::CheckpointError;
};
struct CheckpointArchError : CheckpointError {
    using CheckpointError::CheckpointError;
};

void save_checkpoint(const std::string& path, const PolicyParams& policy,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);
// As above but additionally rejects files whose architecture differs.
Checkpoint load_checkpoint(const std::string& path, const PolicyArch& expect);

}  // namespace bayrn

#endif  // BAYRN_POLICY_HPP
