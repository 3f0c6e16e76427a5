#include "bayrn/gp.hpp"

#include "bayrn/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bayrn {

namespace {

Eigen::VectorXd to_unit_box(const ParamVec& phi, const DomainParamSpace& space) {
    Eigen::VectorXd u(space.size());
    for (int k = 0; k < space.size(); ++k) {
        const auto& d = space.dim(k);
        u[k] = (phi[k] - d.lo) / (d.hi - d.lo);
    }
    return u;
}

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
              const GpHypers& h) {
    const double q =
        ((a - b).array() / h.lengthscales.array()).square().sum();
    return h.signal_var * std::exp(-0.5 * q);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const GpHypers& h) {
    const auto n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = h.signal_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = kernel(x.row(i), x.row(j), h);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

// Cholesky of K + noise*I, escalating jitter 1e-10 -> 1e-4 on failure.
Eigen::MatrixXd chol_with_jitter(const Eigen::MatrixXd& k, double noise_var) {
    Eigen::MatrixXd m = k;
    m.diagonal().array() += noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    for (double jitter = 1e-10; jitter <= 1e-4 * 1.0001; jitter *= 10.0) {
        Eigen::MatrixXd mj = m;
        mj.diagonal().array() += jitter;
        llt.compute(mj);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw std::runtime_error("gp: Gram matrix not positive definite after jitter");
}

void standardize(const std::vector<GpObservation>& obs, double& mean,
                 double& scale) {
    mean = 0.0;
    for (const auto& o : obs) mean += o.r;
    mean /= double(obs.size());
    double var = 0.0;
    for (const auto& o : obs) var += (o.r - mean) * (o.r - mean);
    var /= double(obs.size());
    scale = std::sqrt(var);
    if (scale < 1e-12) scale = 1.0;  // constant targets
}

void validate_obs(const std::vector<GpObservation>& obs,
                  const DomainParamSpace& space) {
    if (obs.empty()) throw std::invalid_argument("gp_fit: no observations");
    for (const auto& o : obs) {
        if (!space.contains(o.phi, 1e-12))
            throw std::invalid_argument("gp_fit: phi outside space");
        if (!std::isfinite(o.r))
            throw std::invalid_argument("gp_fit: non-finite target");
    }
}

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

const std::vector<double>& gp_lengthscale_grid() {
    static const std::vector<double> g = {0.05, 0.1, 0.2, 0.5, 1.0};
    return g;
}

const std::vector<double>& gp_signal_var_grid() {
    static const std::vector<double> g = {0.5, 1.0, 2.0};
    return g;
}

const std::vector<double>& gp_noise_var_grid() {
    static const std::vector<double> g = {1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
    return g;
}

double GpSurrogate::best_observed() const {
    if (obs_.empty()) throw std::logic_error("gp: no observations");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& o : obs_) best = std::max(best, o.r);
    return best;
}

GpSurrogate gp_fit_with(std::vector<GpObservation> obs,
                        const DomainParamSpace& space, const GpHypers& hypers) {
    validate_obs(obs, space);
    if (hypers.lengthscales.size() != space.size())
        throw std::invalid_argument("gp_fit_with: lengthscale dim mismatch");
    GpSurrogate gp;
    gp.obs_ = std::move(obs);
    gp.space_ = space;
    gp.hypers_ = hypers;
    const int n = gp.obs_count();
    gp.x_.resize(n, space.size());
    for (int i = 0; i < n; ++i)
        gp.x_.row(i) = to_unit_box(gp.obs_[std::size_t(i)].phi, space);
    standardize(gp.obs_, gp.y_mean_, gp.y_scale_);
    gp.y_.resize(n);
    for (int i = 0; i < n; ++i)
        gp.y_[i] = (gp.obs_[std::size_t(i)].r - gp.y_mean_) / gp.y_scale_;
    gp.chol_ = chol_with_jitter(gram(gp.x_, hypers), hypers.noise_var);
    auto l = gp.chol_.triangularView<Eigen::Lower>();
    gp.alpha_ = l.transpose().solve(l.solve(gp.y_));
    gp.lml_ = -0.5 * gp.y_.dot(gp.alpha_) -
              gp.chol_.diagonal().array().log().sum() -
              0.5 * n * std::log(2.0 * std::numbers::pi);
    gp.fitted_ = true;
    return gp;
}

double gp_log_marginal_likelihood(const std::vector<GpObservation>& obs,
                                  const DomainParamSpace& space,
                                  const GpHypers& hypers) {
    return gp_fit_with(obs, space, hypers).log_marginal();
}

GpSurrogate gp_fit(std::vector<GpObservation> obs, const DomainParamSpace& space) {
    validate_obs(obs, space);
    double best_lml = -std::numeric_limits<double>::infinity();
    GpSurrogate best;
    for (double ls : gp_lengthscale_grid()) {
        for (double sv : gp_signal_var_grid()) {
            for (double nv : gp_noise_var_grid()) {
                GpHypers h{Eigen::VectorXd::Constant(space.size(), ls), sv, nv};
                GpSurrogate gp;
                try {
                    gp = gp_fit_with(obs, space, h);
                } catch (const std::runtime_error&) {
                    continue;  // not positive definite even with jitter
                }
                if (gp.log_marginal() > best_lml) {
                    best_lml = gp.log_marginal();
                    best = std::move(gp);
                }
            }
        }
    }
    if (!best.fitted()) throw std::runtime_error("gp_fit: no hyperparameters fit");
    return best;
}

GpPrediction gp_predict(const GpSurrogate& gp, const ParamVec& phi) {
    if (!gp.fitted()) throw std::logic_error("gp_predict: surrogate not fitted");
    if (phi.size() != gp.space().size())
        throw std::invalid_argument("gp_predict: dim mismatch");
    const Eigen::VectorXd q = to_unit_box(phi, gp.space());
    const int n = gp.obs_count();
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i) ks[i] = kernel(gp.x_.row(i), q, gp.hypers());
    const double mean_std = ks.dot(gp.alpha_);
    const Eigen::VectorXd v =
        gp.chol_.triangularView<Eigen::Lower>().solve(ks);
    double var = gp.hypers().signal_var - v.squaredNorm();
    if (var < -1e-9) throw std::runtime_error("gp_predict: negative variance");
    var = std::max(var, 0.0);
    return {gp.y_mean() + gp.y_scale() * mean_std,
            gp.y_scale() * std::sqrt(var)};
}

double expected_improvement_value(double mu, double sigma, double best_r) {
    if (sigma < 1e-12) return std::max(mu - best_r, 0.0);
    const double z = (mu - best_r) / sigma;
    return std::max((mu - best_r) * norm_cdf(z) + sigma * norm_pdf(z), 0.0);
}

double expected_improvement(const GpSurrogate& gp, const ParamVec& phi,
                            double best_r) {
    const GpPrediction p = gp_predict(gp, phi);
    return expected_improvement_value(p.mean, p.std, best_r);
}

AcquisitionResult maximize_acquisition(const GpSurrogate& gp,
                                       const DomainParamSpace& space,
                                       double best_r, std::uint64_t seed) {
    constexpr int kCandidates = 1024;
    constexpr int kRefined = 8;
    constexpr int kDescentSteps = 50;

    auto gen = rng::engine(seed, 0x61637175);
    std::vector<AcquisitionResult> pool;
    pool.reserve(kCandidates);
    for (int i = 0; i < kCandidates; ++i) {
        ParamVec c = uniform_sample(space, gen);
        pool.push_back({c, expected_improvement(gp, c, best_r)});
    }
    std::partial_sort(pool.begin(), pool.begin() + kRefined, pool.end(),
                      [](const auto& a, const auto& b) {
                          return a.acquisition_value > b.acquisition_value;
                      });

    AcquisitionResult best = pool.front();
    for (int c = 0; c < kRefined; ++c) {
        ParamVec x = pool[std::size_t(c)].candidate;
        double fx = pool[std::size_t(c)].acquisition_value;
        Eigen::VectorXd step = space.width() / 32.0;
        for (int it = 0; it < kDescentSteps; ++it) {
            bool improved = false;
            for (int k = 0; k < space.size(); ++k) {
                for (double sgn : {1.0, -1.0}) {
                    ParamVec cand = x;
                    cand[k] += sgn * step[k];
                    cand = clamp_to_space(cand, space);
                    const double f = expected_improvement(gp, cand, best_r);
                    if (f > fx) {
                        x = cand;
                        fx = f;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (fx > best.acquisition_value) best = {x, fx};
    }
    best.candidate = clamp_to_space(best.candidate, space);
    return best;
}

ParamVec bo_query(const GpSurrogate& gp, const DomainParamSpace& space,
                  std::uint64_t seed) {
    const int n = gp.obs_count();
    if (n < kBoNInit) {
        // one stratified slice per init proposal, offset uniformly inside it
        auto gen = rng::engine(seed, 0x696e6974, std::uint64_t(n));
        ParamVec x(space.size());
        for (int k = 0; k < space.size(); ++k) {
            const auto& d = space.dim(k);
            const double u = (double(n) + rng::uniform01(gen)) / double(kBoNInit);
            x[k] = d.lo + u * (d.hi - d.lo);
        }
        return clamp_to_space(x, space);
    }
    return maximize_acquisition(gp, space, gp.best_observed(), seed).candidate;
}

GpSurrogate bo_update(const GpSurrogate& gp, const ParamVec& phi, double r) {
    if (!std::isfinite(r)) throw std::invalid_argument("bo_update: non-finite r");
    std::vector<GpObservation> obs = gp.observations();
    obs.push_back({phi, r});
    return gp_fit(obs, gp.space());
}

}  // namespace bayrn
