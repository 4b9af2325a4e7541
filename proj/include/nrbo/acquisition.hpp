#ifndef NRBO_ACQUISITION_HPP
#define NRBO_ACQUISITION_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nrbo/dataset.hpp"
#include "nrbo/surrogate.hpp"

namespace nrbo {

// Standard normal density and distribution.
double normal_pdf(double z);
double normal_cdf(double z);

/// Closed-form expected improvement below incumbent (minimization).
double expected_improvement(const Prediction& pred, double incumbent);

/// Probability that the value falls strictly below incumbent.
double probability_improvement(const Prediction& pred, double incumbent);

/// mean - kappa * std.
double lower_confidence_bound(const Prediction& pred, double kappa);

/// Raw acquisition values per candidate with their population standard deviations.
struct AcqScores {
    Eigen::VectorXd ei;
    Eigen::VectorXd pi;
    Eigen::VectorXd ucb;
    double s_ei = 0.0;
    double s_pi = 0.0;
    double s_ucb = 0.0;
};

AcqScores acquisition_scores(const std::vector<Prediction>& preds, double kappa, double incumbent);

/// Per-candidate density reward exp(-neighbor_count).
struct DensityReward {
    Eigen::VectorXd g;
};

DensityReward density_rewards(const ObservationSet& obs, const PointSet& candidates, double sigma2);

/// All-ones reward, i.e. the plain ensemble without density adjustment.
DensityReward uniform_reward(Eigen::Index count);

/// Three minimized objectives per candidate, one column each:
///   -ei - g * s_ei,  -pi - g * s_pi,  ucb - g * s_ucb.
Eigen::MatrixXd ensemble_objectives(const AcqScores& scores, const DensityReward& reward);

Eigen::MatrixXd score_candidates(const Surrogate& s, const ObservationSet& obs, const PointSet& candidates,
                                 double sigma2, double kappa, double incumbent);

/// True when row a is no worse than row b everywhere and strictly better somewhere.
bool dominates(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b);

/// Indices of non-dominated rows (minimization), ascending.
std::vector<std::size_t> pareto_front(const Eigen::MatrixXd& objectives);

/// Successive non-dominated layers covering every row.
std::vector<std::vector<std::size_t>> non_dominated_layers(const Eigen::MatrixXd& objectives);

/// Uniformly random member of the Pareto front.
std::size_t select_next(const Eigen::MatrixXd& objectives, std::uint64_t seed);

/// count distinct rows drawn from the front without replacement, spilling
/// into later layers when the front is too small.
std::vector<std::size_t> select_batch(const Eigen::MatrixXd& objectives, std::size_t count, std::uint64_t seed);

}  // namespace nrbo

#endif  // NRBO_ACQUISITION_HPP
