#include "nrbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nrbo/errors.hpp"

namespace nrbo {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(const Prediction& pred, double incumbent) {
    const double sd = pred.stddev();
    const double gap = incumbent - pred.mean;
    if (sd <= 0.0) return std::max(gap, 0.0);
    const double z = gap / sd;
    return std::max(gap * normal_cdf(z) + sd * normal_pdf(z), 0.0);
}

double probability_improvement(const Prediction& pred, double incumbent) {
    const double sd = pred.stddev();
    if (sd <= 0.0) return pred.mean < incumbent ? 1.0 : 0.0;
    return normal_cdf((incumbent - pred.mean) / sd);
}

double lower_confidence_bound(const Prediction& pred, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("lower_confidence_bound: kappa must be > 0");
    return pred.mean - kappa * pred.stddev();
}

namespace {

double population_std(const Eigen::VectorXd& v) {
    if (v.size() == 0) return 0.0;
    return std::sqrt((v.array() - v.mean()).square().mean());
}

}  // namespace

AcqScores acquisition_scores(const std::vector<Prediction>& preds, double kappa, double incumbent) {
    const auto n = static_cast<Eigen::Index>(preds.size());
    AcqScores s{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = preds[static_cast<std::size_t>(i)];
        s.ei[i] = expected_improvement(p, incumbent);
        s.pi[i] = probability_improvement(p, incumbent);
        s.ucb[i] = lower_confidence_bound(p, kappa);
    }
    s.s_ei = population_std(s.ei);
    s.s_pi = population_std(s.pi);
    s.s_ucb = population_std(s.ucb);
    return s;
}

DensityReward density_rewards(const ObservationSet& obs, const PointSet& candidates, double sigma2) {
    if (sigma2 < 0.0) throw DomainError("density_rewards: sigma2 must be >= 0");
    DensityReward r{Eigen::VectorXd(candidates.rows())};
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
        const auto count = neighbor_count(obs, candidates.row(i).transpose(), sigma2);
        r.g[i] = std::exp(-static_cast<double>(count));
    }
    return r;
}

DensityReward uniform_reward(Eigen::Index count) { return {Eigen::VectorXd::Ones(count)}; }

Eigen::MatrixXd ensemble_objectives(const AcqScores& scores, const DensityReward& reward) {
    const Eigen::Index n = scores.ei.size();
    if (reward.g.size() != n) throw DomainError("ensemble_objectives: reward length mismatch");
    Eigen::MatrixXd obj(n, 3);
    obj.col(0) = -scores.ei - scores.s_ei * reward.g;
    obj.col(1) = -scores.pi - scores.s_pi * reward.g;
    obj.col(2) = scores.ucb - scores.s_ucb * reward.g;
    return obj;
}

Eigen::MatrixXd score_candidates(const Surrogate& s, const ObservationSet& obs, const PointSet& candidates,
                                 double sigma2, double kappa, double incumbent) {
    if (candidates.rows() == 0) throw DomainError("score_candidates: no candidates");
    const auto scores = acquisition_scores(s.predict_batch(candidates), kappa, incumbent);
    return ensemble_objectives(scores, density_rewards(obs, candidates, sigma2));
}

bool dominates(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    return (a.array() <= b.array()).all() && (a.array() < b.array()).any();
}

namespace {

// Front of the given subset. Sorting lexicographically guarantees every
// dominator of a row precedes it, so comparing against the front built so far
// suffices.
std::vector<std::size_t> front_of(const Eigen::MatrixXd& obj, std::vector<std::size_t> rows) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = obj.row(static_cast<Eigen::Index>(a));
        const auto rb = obj.row(static_cast<Eigen::Index>(b));
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    std::vector<std::size_t> front;
    for (auto r : rows) {
        const auto row = obj.row(static_cast<Eigen::Index>(r));
        const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
            return dominates(obj.row(static_cast<Eigen::Index>(f)), row);
        });
        if (!dominated) front.push_back(r);
    }
    std::sort(front.begin(), front.end());
    return front;
}

}  // namespace

std::vector<std::size_t> pareto_front(const Eigen::MatrixXd& objectives) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(objectives.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return front_of(objectives, std::move(rows));
}

std::vector<std::vector<std::size_t>> non_dominated_layers(const Eigen::MatrixXd& objectives) {
    std::vector<std::size_t> remaining(static_cast<std::size_t>(objectives.rows()));
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> layers;
    while (!remaining.empty()) {
        auto front = front_of(objectives, remaining);
        std::vector<std::size_t> rest;
        std::set_difference(remaining.begin(), remaining.end(), front.begin(), front.end(), std::back_inserter(rest));
        layers.push_back(std::move(front));
        remaining = std::move(rest);
    }
    return layers;
}

std::size_t select_next(const Eigen::MatrixXd& objectives, std::uint64_t seed) {
    return select_batch(objectives, 1, seed).front();
}

std::vector<std::size_t> select_batch(const Eigen::MatrixXd& objectives, std::size_t count, std::uint64_t seed) {
    if (objectives.rows() == 0) throw DomainError("select_batch: no candidates");
    if (count > static_cast<std::size_t>(objectives.rows()))
        throw DomainError("select_batch: batch larger than the candidate set");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> remaining(static_cast<std::size_t>(objectives.rows()));
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    std::vector<std::size_t> chosen;
    while (chosen.size() < count) {
        auto layer = front_of(objectives, remaining);
        std::vector<std::size_t> rest;
        std::set_difference(remaining.begin(), remaining.end(), layer.begin(), layer.end(), std::back_inserter(rest));
        remaining = std::move(rest);
        std::shuffle(layer.begin(), layer.end(), rng);
        const std::size_t take = std::min(count - chosen.size(), layer.size());
        chosen.insert(chosen.end(), layer.begin(), layer.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return chosen;
}

}  // namespace nrbo
