#include "bayrn/param_space.hpp"

#include "bayrn/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace bayrn {

namespace {

void require_same_dim(const ParamVec& phi, int expect, const char* what) {
    if (phi.size() != expect) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                    std::to_string(phi.size()) + ", expected " +
                                    std::to_string(expect) + ")");
    }
}

}  // namespace

DomainParamSpace::DomainParamSpace(std::vector<ParamDim> dims) : dims_(std::move(dims)) {
    std::unordered_set<std::string> names;
    for (const ParamDim& d : dims_) {
        if (!(d.lo < d.hi)) {
            throw std::invalid_argument("DomainParamSpace: dimension '" + d.name +
                                        "' requires lo < hi");
        }
        if (!names.insert(d.name).second) {
            throw std::invalid_argument("DomainParamSpace: duplicate dimension name '" +
                                        d.name + "'");
        }
    }
}

ParamVec DomainParamSpace::lower() const {
    ParamVec v(size());
    for (int k = 0; k < size(); ++k) v[k] = dims_[static_cast<std::size_t>(k)].lo;
    return v;
}

ParamVec DomainParamSpace::upper() const {
    ParamVec v(size());
    for (int k = 0; k < size(); ++k) v[k] = dims_[static_cast<std::size_t>(k)].hi;
    return v;
}

ParamVec DomainParamSpace::center() const { return 0.5 * (lower() + upper()); }

ParamVec DomainParamSpace::width() const { return upper() - lower(); }

bool DomainParamSpace::contains(const ParamVec& phi, double tol) const {
    if (phi.size() != size()) return false;
    for (int k = 0; k < size(); ++k) {
        const ParamDim& d = dims_[static_cast<std::size_t>(k)];
        if (phi[k] < d.lo - tol || phi[k] > d.hi + tol) return false;
    }
    return true;
}

RunningStats RunningStats::from_moments(const Eigen::VectorXd& mean,
                                        const Eigen::VectorXd& stddev,
                                        std::int64_t count) {
    if (count < 1) throw std::invalid_argument("RunningStats::from_moments: count < 1");
    RunningStats s(static_cast<int>(mean.size()));
    s.count_ = count;
    s.mean_ = mean;
    s.m2_ = static_cast<double>(count) * stddev.array().square().matrix();
    return s;
}

Eigen::VectorXd RunningStats::stddev() const {
    if (count_ < 1) throw std::logic_error("RunningStats::stddev: no samples");
    return (m2_ / static_cast<double>(count_)).array().max(0.0).sqrt().matrix();
}

ParamVec clamp_to_space(const ParamVec& phi, const DomainParamSpace& space) {
    require_same_dim(phi, space.size(), "clamp_to_space");
    ParamVec out(phi.size());
    for (int k = 0; k < space.size(); ++k) {
        const ParamDim& d = space.dim(k);
        double v = phi[k];
        if (d.kind == DimKind::Integer) v = std::round(v);
        out[k] = std::min(std::max(v, d.lo), d.hi);
    }
    return out;
}

RunningStats update_stats(const RunningStats& stats, const ParamVec& phi) {
    RunningStats next = stats;
    if (next.count_ == 0) {
        next.mean_ = Eigen::VectorXd::Zero(phi.size());
        next.m2_ = Eigen::VectorXd::Zero(phi.size());
    }
    require_same_dim(phi, next.size(), "update_stats");
    next.count_ += 1;
    const Eigen::VectorXd delta = phi - next.mean_;
    next.mean_ += delta / static_cast<double>(next.count_);
    next.m2_ += delta.cwiseProduct(phi - next.mean_);
    return next;
}

ParamVec normalize(const ParamVec& phi, const RunningStats& stats, double eps) {
    require_same_dim(phi, stats.size(), "normalize");
    if (stats.count() < 1) throw std::invalid_argument("normalize: empty stats");
    const Eigen::VectorXd sigma = stats.stddev().array().max(eps).matrix();
    return (phi - stats.mean()).cwiseQuotient(sigma);
}

double normalized_distance(const ParamVec& a, const ParamVec& b, const RunningStats& stats) {
    require_same_dim(a, stats.size(), "normalized_distance");
    require_same_dim(b, stats.size(), "normalized_distance");
    return (normalize(a, stats) - normalize(b, stats)).norm();
}

ParamVec uniform_sample(const DomainParamSpace& space, std::mt19937_64& gen) {
    ParamVec v(space.size());
    for (int k = 0; k < space.size(); ++k) {
        const ParamDim& d = space.dim(k);
        v[k] = rng::uniform_in(gen, d.lo, d.hi);
    }
    return clamp_to_space(v, space);
}

}  // namespace bayrn
