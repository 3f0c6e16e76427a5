#ifndef BAYRN_GP_HPP
#define BAYRN_GP_HPP

#include "bayrn/param_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace bayrn {

struct GpObservation {
    ParamVec phi;  // raw units, inside the space
    double r = 0.0;
};

// Squared-exponential ARD kernel hyperparameters, in unit-box input units
// and standardized output units.
struct GpHypers {
    Eigen::VectorXd lengthscales;
    double signal_var = 1.0;
    double noise_var = 1e-6;
};

struct GpPrediction {
    double mean = 0.0;  // reward units
    double std = 0.0;   // latent posterior std, reward units
};

struct AcquisitionResult {
    ParamVec candidate;
    double acquisition_value = 0.0;
};

// GP over real-world reward. Inputs are min-max scaled to [0,1]^d by the
// space bounds; outputs standardized to zero mean / unit variance (constant
// targets keep scale 1). Fitting caches the Cholesky factor of K + sigma_n^2 I.
class GpSurrogate {
public:
    GpSurrogate() = default;

    bool fitted() const { return fitted_; }
    int obs_count() const { return static_cast<int>(obs_.size()); }
    const std::vector<GpObservation>& observations() const { return obs_; }
    const DomainParamSpace& space() const { return space_; }
    const GpHypers& hypers() const { return hypers_; }
    double y_mean() const { return y_mean_; }
    double y_scale() const { return y_scale_; }
    double log_marginal() const { return lml_; }
    double best_observed() const;  // max r over observations

    friend GpSurrogate gp_fit_with(std::vector<GpObservation> obs,
                                   const DomainParamSpace& space,
                                   const GpHypers& hypers);

private:
    friend GpPrediction gp_predict(const GpSurrogate& gp, const ParamVec& phi);

    std::vector<GpObservation> obs_;
    DomainParamSpace space_;
    GpHypers hypers_;
    Eigen::MatrixXd x_;  // n x d, unit box
    Eigen::VectorXd y_;  // standardized targets
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    Eigen::MatrixXd chol_;   // lower factor of K + noise*I (+ jitter)
    Eigen::VectorXd alpha_;  // (K + noise*I)^-1 y
    double lml_ = 0.0;
    bool fitted_ = false;
};

inline constexpr int kBoNInit = 3;

// Hyperparameter grids for the log-marginal-likelihood search. The noise grid
// extends below 1e-6 so noiseless data can be interpolated tightly.
const std::vector<double>& gp_lengthscale_grid();
const std::vector<double>& gp_signal_var_grid();
const std::vector<double>& gp_noise_var_grid();

// Fit with hyperparameters chosen by maximizing log marginal likelihood over
// the fixed grids (shared lengthscale across dimensions).
GpSurrogate gp_fit(std::vector<GpObservation> obs, const DomainParamSpace& space);
// Fit with pinned hyperparameters.
GpSurrogate gp_fit_with(std::vector<GpObservation> obs,
                        const DomainParamSpace& space, const GpHypers& hypers);

double gp_log_marginal_likelihood(const std::vector<GpObservation>& obs,
                                  const DomainParamSpace& space,
                                  const GpHypers& hypers);

GpPrediction gp_predict(const GpSurrogate& gp, const ParamVec& phi);

// EI = (mu - best) Phi(z) + sigma phi(z), z = (mu - best)/sigma;
// max(mu - best, 0) once sigma < 1e-12.
double expected_improvement_value(double mu, double sigma, double best_r);
double expected_improvement(const GpSurrogate& gp, const ParamVec& phi,
                            double best_r);

// Multistart + coordinate-descent maximization of EI over the space.
AcquisitionResult maximize_acquisition(const GpSurrogate& gp,
                                       const DomainParamSpace& space,
                                       double best_r, std::uint64_t seed);

// Next proposal: stratified quasi-random until kBoNInit observations exist,
// then the EI argmax. Deterministic given (surrogate, seed).
ParamVec bo_query(const GpSurrogate& gp, const DomainParamSpace& space,
                  std::uint64_t seed);

// Refit including (phi, r).
GpSurrogate bo_update(const GpSurrogate& gp, const ParamVec& phi, double r);

}  // namespace bayrn

#endif  // BAYRN_GP_HPP
