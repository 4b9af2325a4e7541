#ifndef NRBO_SURROGATE_HPP
#define NRBO_SURROGATE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nrbo/space.hpp"

namespace nrbo {

struct KernelParams {
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscales;
    double noise_variance = 1e-6;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;

    double stddev() const;
};

/// Matérn-5/2 covariance with one lengthscale per dimension.
double matern52(const Point& a, const Point& b, const KernelParams& params);

/// Cross-covariance between the rows of a and the rows of b (no noise term).
Eigen::MatrixXd cross_covariance(const PointSet& a, const PointSet& b, const KernelParams& params);

/// Box constraints and effort for marginal-likelihood fitting. Log-space
/// bounds apply to targets standardized to unit variance.
struct FitOptions {
    std::size_t restarts = 4;
    int max_iterations = 150;
    double log_lengthscale_min = -4.605170185988091;  // log 0.01
    double log_lengthscale_max = 2.302585092994046;   // log 10
    double log_signal_min = -6.907755278982137;       // log 1e-3
    double log_signal_max = 6.907755278982137;        // log 1e3
    /// Noise is parameterized relative to the signal variance; the lower
    /// bound is the jitter floor.
    double noise_ratio_min = 1e-6;
    double noise_ratio_max = 1e-3;
};

/// Packing of kernel hyperparameters into the unconstrained vector the
/// optimizer works on: [log sf2, log l_1 .. log l_d, log(noise / sf2)].
Eigen::VectorXd pack_log_params(const KernelParams& params);
KernelParams unpack_log_params(const Eigen::VectorXd& theta);

struct NlmlEvaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;  // with respect to the packed log parameters
};

/// Negative log marginal likelihood of targets under a zero-mean GP and its
/// gradient in packed log-parameter space. Throws NumericalError when the
/// covariance cannot be factored.
NlmlEvaluation negative_log_marginal_likelihood(const PointSet& points, const Eigen::VectorXd& targets,
                                                const Eigen::VectorXd& theta);

/// Result of minimizing the NLML from one start.
struct NlmlTrace {
    Eigen::VectorXd theta;
    std::vector<double> values;  // accepted objective values, first entry is the start
};

NlmlTrace minimize_nlml(const PointSet& points, const Eigen::VectorXd& targets, Eigen::VectorXd theta,
                        const FitOptions& options);

/// Exact GP posterior over standardized targets.
class Surrogate {
public:
    /// Standardizes targets and minimizes the NLML from several seeded starts,
    /// keeping the lowest.
    static Surrogate fit(const PointSet& points, const Eigen::VectorXd& targets, const FitOptions& options,
                         std::uint64_t seed);

    /// Conditions on data with fixed kernel parameters (given for standardized targets).
    static Surrogate condition(const PointSet& points, const Eigen::VectorXd& targets, const KernelParams& params);

    Prediction predict(const Point& query) const;
    std::vector<Prediction> predict_batch(const PointSet& queries) const;

    const KernelParams& params() const { return params_; }
    const PointSet& training_points() const { return points_; }
    const Eigen::VectorXd& training_targets() const { return targets_; }
    double target_mean() const { return target_mean_; }
    double target_std() const { return target_std_; }
    /// Lower-triangular factor of K + noise * I as used for prediction.
    Eigen::MatrixXd chol_factor() const { return llt_.matrixL(); }
    /// Diagonal term actually factored (noise plus any escalated jitter).
    double effective_noise() const { return effective_noise_; }
    double nlml() const { return nlml_; }

private:
    Surrogate() = default;
    void factor();

    KernelParams params_;
    PointSet points_;
    Eigen::VectorXd targets_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double effective_noise_ = 0.0;
    double nlml_ = 0.0;
};

/// Target mean and population standard deviation; the deviation falls back
/// to 1 for constant targets.
std::pair<double, double> standardization(const Eigen::VectorXd& targets);

}  // namespace nrbo

#endif  // NRBO_SURROGATE_HPP
