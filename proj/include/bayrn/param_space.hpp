#ifndef BAYRN_PARAM_SPACE_HPP
#define BAYRN_PARAM_SPACE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bayrn {

// A point in domain-randomization parameter space.
using ParamVec = Eigen::VectorXd;

enum class DimKind { Continuous, Integer };

struct ParamDim {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    DimKind kind = DimKind::Continuous;
};

// Box of randomized dynamics parameters. Dimensions carry a unique name,
// bounds with lo < hi, and whether values are continuous or integer-valued.
class DomainParamSpace {
public:
    DomainParamSpace() = default;
    explicit DomainParamSpace(std::vector<ParamDim> dims);

    int size() const { return static_cast<int>(dims_.size()); }
    const ParamDim& dim(int k) const { return dims_.at(static_cast<std::size_t>(k)); }
    const std::vector<ParamDim>& dims() const { return dims_; }

    ParamVec lower() const;
    ParamVec upper() const;
    ParamVec center() const;
    ParamVec width() const;
    bool contains(const ParamVec& phi, double tol = 0.0) const;

private:
    std::vector<ParamDim> dims_;
};

// Per-dimension running mean and population standard deviation (Welford).
class RunningStats {
public:
    RunningStats() = default;
    explicit RunningStats(int dim)
        : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

    // Builds stats with the given moments, as if `count` samples with exactly
    // this mean and population std had been observed.
    static RunningStats from_moments(const Eigen::VectorXd& mean,
                                     const Eigen::VectorXd& stddev,
                                     std::int64_t count);

    std::int64_t count() const { return count_; }
    int size() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    Eigen::VectorXd stddev() const;  // population std, zero for constant data

    friend RunningStats update_stats(const RunningStats& stats, const ParamVec& phi);

private:
    std::int64_t count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

// Floor applied to per-dimension std when normalizing, so repeated proposals
// (std exactly 0) do not divide by zero.
inline constexpr double kStdFloor = 1e-8;

// Clamps every component into its dimension's [lo, hi]; integer-valued
// dimensions are rounded to the nearest integer first.
ParamVec clamp_to_space(const ParamVec& phi, const DomainParamSpace& space);

// Value-returning Welford update; mean/std match a two-pass recomputation.
RunningStats update_stats(const RunningStats& stats, const ParamVec& phi);

// Componentwise (phi - mean) / max(std, eps).
ParamVec normalize(const ParamVec& phi, const RunningStats& stats, double eps = kStdFloor);

// 2-norm between the normalized vectors.
double normalized_distance(const ParamVec& a, const ParamVec& b, const RunningStats& stats);

// One uniform draw from the box, deterministic given the engine state.
ParamVec uniform_sample(const DomainParamSpace& space, std::mt19937_64& gen);

}  // namespace bayrn

#endif  // BAYRN_PARAM_SPACE_HPP
