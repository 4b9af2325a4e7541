#include "nrbo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "nrbo/errors.hpp"

namespace nrbo {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;

// Matérn-5/2 as a function of the scaled distance r.
double matern52_r(double r) { return (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * std::exp(-kSqrt5 * r); }

Eigen::Index log_noise_index(const Eigen::VectorXd& theta) { return theta.size() - 1; }

struct Factored {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::MatrixXd kf;  // noise-free Gram matrix
    Eigen::VectorXd alpha;
    double value = 0.0;
};

// Factors K + noise I for packed parameters; returns false when the factor fails.
bool factor_and_value(const PointSet& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta, Factored& out) {
    const KernelParams p = unpack_log_params(theta);
    out.kf = cross_covariance(x, x, p);
    Eigen::MatrixXd k = out.kf;
    k.diagonal().array() += p.noise_variance;
    out.llt.compute(k);
    if (out.llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd l = out.llt.matrixL();
    if (!(l.diagonal().array() > 0.0).all()) return false;
    out.alpha = out.llt.solve(y);
    const double n = static_cast<double>(y.size());
    out.value = 0.5 * y.dot(out.alpha) + l.diagonal().array().log().sum() +
                0.5 * n * std::log(2.0 * std::numbers::pi);
    return std::isfinite(out.value);
}

Eigen::VectorXd gradient_from(const PointSet& x, const Eigen::VectorXd& theta, const Factored& f) {
    const KernelParams p = unpack_log_params(theta);
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));
    // W = K^{-1} - alpha alpha^T; dNLML/dtheta_j = 0.5 tr(W dK_j)
    const Eigen::MatrixXd w = kinv - f.alpha * f.alpha.transpose();

    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
    Eigen::MatrixXd k = f.kf;
    k.diagonal().array() += p.noise_variance;
    g[0] = 0.5 * (w.array() * k.array()).sum();
    g[log_noise_index(theta)] = 0.5 * p.noise_variance * w.trace();

    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Eigen::ArrayXd scaled = (x.row(a) - x.row(b)).transpose().array() / p.lengthscales.array();
            const double r = std::sqrt(scaled.square().sum());
            // dk/dlog l_j = sf2 * 5/3 * (1 + sqrt5 r) exp(-sqrt5 r) * (delta_j / l_j)^2
            const double common = p.signal_variance * 5.0 / 3.0 * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
            const double weight = w(a, b);  // 0.5 * (w_ab + w_ba)
            for (Eigen::Index j = 0; j < d; ++j) g[1 + j] += weight * common * scaled[j] * scaled[j];
        }
    }
    return g;
}

}  // namespace

double Prediction::stddev() const { return std::sqrt(std::max(variance, 0.0)); }

double matern52(const Point& a, const Point& b, const KernelParams& params) {
    if (a.size() != b.size() || a.size() != params.lengthscales.size())
        throw DomainError("matern52: dimension mismatch");
    const double r = ((a - b).array() / params.lengthscales.array()).matrix().norm();
    return params.signal_variance * matern52_r(r);
}

Eigen::MatrixXd cross_covariance(const PointSet& a, const PointSet& b, const KernelParams& params) {
    if (a.cols() != b.cols() || a.cols() != params.lengthscales.size())
        throw DomainError("cross_covariance: dimension mismatch");
    const Eigen::ArrayXd inv_l = params.lengthscales.array().inverse();
    const Eigen::MatrixXd as = a * inv_l.matrix().asDiagonal();
    const Eigen::MatrixXd bs = b * inv_l.matrix().asDiagonal();
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            out(i, j) = params.signal_variance * matern52_r((as.row(i) - bs.row(j)).norm());
    return out;
}

Eigen::VectorXd pack_log_params(const KernelParams& params) {
    const Eigen::Index d = params.lengthscales.size();
    Eigen::VectorXd theta(d + 2);
    theta[0] = std::log(params.signal_variance);
    theta.segment(1, d) = params.lengthscales.array().log().matrix();
    theta[d + 1] = std::log(params.noise_variance / params.signal_variance);
    return theta;
}

KernelParams unpack_log_params(const Eigen::VectorXd& theta) {
    if (theta.size() < 3) throw DomainError("packed kernel parameters need at least 3 entries");
    KernelParams p;
    const Eigen::Index d = theta.size() - 2;
    p.signal_variance = std::exp(theta[0]);
    p.lengthscales = theta.segment(1, d).array().exp().matrix();
    p.noise_variance = p.signal_variance * std::exp(theta[d + 1]);
    return p;
}

NlmlEvaluation negative_log_marginal_likelihood(const PointSet& points, const Eigen::VectorXd& targets,
                                                const Eigen::VectorXd& theta) {
    if (points.rows() != targets.size()) throw DomainError("NLML: point/target count mismatch");
    if (theta.size() != points.cols() + 2) throw DomainError("NLML: parameter vector has wrong length");
    Factored f;
    if (!factor_and_value(points, targets, theta, f)) throw NumericalError("NLML: covariance factorization failed");
    return {f.value, gradient_from(points, theta, f)};
}

NlmlTrace minimize_nlml(const PointSet& points, const Eigen::VectorXd& targets, Eigen::VectorXd theta,
                        const FitOptions& options) {
    const Eigen::Index d = points.cols();
    Eigen::VectorXd lo(d + 2), hi(d + 2);
    lo[0] = options.log_signal_min;
    hi[0] = options.log_signal_max;
    lo.segment(1, d).setConstant(options.log_lengthscale_min);
    hi.segment(1, d).setConstant(options.log_lengthscale_max);
    lo[d + 1] = std::log(options.noise_ratio_min);
    hi[d + 1] = std::log(std::max(options.noise_ratio_max, options.noise_ratio_min));
    theta = theta.cwiseMax(lo).cwiseMin(hi);

    NlmlTrace trace;
    Factored current;
    if (!factor_and_value(points, targets, theta, current))
        throw NumericalError("NLML: covariance factorization failed at the starting point");
    trace.values.push_back(current.value);

    double step = 0.5;
    constexpr double kMaxStep = 2.0;
    constexpr double kMinStep = 1e-7;
    Eigen::VectorXd grad = gradient_from(points, theta, current);
    for (int it = 0; it < options.max_iterations && step > kMinStep; ++it) {
        // project out components that push against an active bound
        Eigen::VectorXd dir = grad;
        for (Eigen::Index i = 0; i < dir.size(); ++i) {
            if ((theta[i] <= lo[i] && dir[i] > 0.0) || (theta[i] >= hi[i] && dir[i] < 0.0)) dir[i] = 0.0;
        }
        const double gnorm = dir.norm();
        if (!(gnorm > 1e-10)) break;
        dir /= gnorm;

        bool accepted = false;
        while (step > kMinStep) {
            const Eigen::VectorXd candidate = (theta - step * dir).cwiseMax(lo).cwiseMin(hi);
            Factored next;
            if (factor_and_value(points, targets, candidate, next) && next.value < current.value) {
                theta = candidate;
                current = std::move(next);
                trace.values.push_back(current.value);
                grad = gradient_from(points, theta, current);
                step = std::min(step * 1.5, kMaxStep);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    trace.theta = theta;
    return trace;
}

std::pair<double, double> standardization(const Eigen::VectorXd& targets) {
    const double mean = targets.mean();
    const double sd = std::sqrt((targets.array() - mean).square().mean());
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return {mean, 1.0};
    return {mean, sd};
}

Surrogate Surrogate::fit(const PointSet& points, const Eigen::VectorXd& targets, const FitOptions& options,
                         std::uint64_t seed) {
    if (points.rows() < 2) throw DomainError("Surrogate::fit needs at least 2 points");
    if (points.rows() != targets.size()) throw DomainError("Surrogate::fit: point/target count mismatch");
    if (!targets.allFinite()) throw ValueError("Surrogate::fit: targets must be finite");
    if (options.restarts < 1) throw DomainError("Surrogate::fit needs at least one restart");

    Surrogate s;
    s.points_ = points;
    std::tie(s.target_mean_, s.target_std_) = standardization(targets);
    s.targets_ = (targets.array() - s.target_mean_) / s.target_std_;

    const Eigen::Index d = points.cols();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto between = [&](double a, double b) { return a + (b - a) * unif(rng); };

    const double log_rho_lo = std::log(options.noise_ratio_min);
    const double log_rho_hi = std::log(std::max(options.noise_ratio_max, options.noise_ratio_min));

    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    std::string last_error;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        Eigen::VectorXd start(d + 2);
        if (r == 0) {
            start[0] = 0.0;
            start.segment(1, d).setConstant(std::log(0.2));
            start[d + 1] = std::clamp(std::log(1e-3), log_rho_lo, log_rho_hi);
        } else {
            start[0] = between(std::log(0.1), std::log(10.0));
            for (Eigen::Index j = 0; j < d; ++j) start[1 + j] = between(std::log(0.03), std::log(2.0));
            start[d + 1] = between(log_rho_lo, log_rho_hi);
        }
        try {
            auto trace = minimize_nlml(s.points_, s.targets_, start, options);
            if (trace.values.back() < best_value) {
                best_value = trace.values.back();
                best_theta = trace.theta;
            }
        } catch (const NumericalError& e) {
            last_error = e.what();
        }
    }
    if (best_theta.size() == 0)
        throw NumericalError("Surrogate::fit: every restart failed to factor the covariance (" + last_error + ")");

    s.params_ = unpack_log_params(best_theta);
    s.factor();
    return s;
}

Surrogate Surrogate::condition(const PointSet& points, const Eigen::VectorXd& targets, const KernelParams& params) {
    if (points.rows() < 1) throw DomainError("Surrogate::condition needs at least 1 point");
    if (points.rows() != targets.size()) throw DomainError("Surrogate::condition: point/target count mismatch");
    if (params.lengthscales.size() != points.cols()) throw DomainError("Surrogate::condition: lengthscale count");
    Surrogate s;
    s.points_ = points;
    std::tie(s.target_mean_, s.target_std_) = standardization(targets);
    s.targets_ = (targets.array() - s.target_mean_) / s.target_std_;
    s.params_ = params;
    s.factor();
    return s;
}

void Surrogate::factor() {
    const Eigen::Index n = points_.rows();
    Eigen::MatrixXd k = cross_covariance(points_, points_, params_);
    double noise = params_.noise_variance;
    const double ceiling = 1e-1 * params_.signal_variance;
    for (;;) {
        Eigen::MatrixXd kn = k;
        kn.diagonal().array() += noise;
        llt_.compute(kn);
        if (llt_.info() == Eigen::Success && (Eigen::MatrixXd(llt_.matrixL()).diagonal().array() > 0.0).all()) break;
        if (noise >= ceiling) {
            std::ostringstream msg;
            msg << "Cholesky failed for " << n << " points even with diagonal " << noise << " (signal variance "
                << params_.signal_variance << "); covariance is too ill-conditioned";
            throw NumericalError(msg.str());
        }
        noise = std::min(noise * 10.0, ceiling);
    }
    effective_noise_ = noise;
    alpha_ = llt_.solve(targets_);
    const Eigen::MatrixXd l = llt_.matrixL();
    nlml_ = 0.5 * targets_.dot(alpha_) + l.diagonal().array().log().sum() +
            0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Prediction Surrogate::predict(const Point& query) const {
    if (query.size() != points_.cols()) throw DomainError("Surrogate::predict: dimension mismatch");
    Eigen::VectorXd kstar(points_.rows());
    for (Eigen::Index i = 0; i < points_.rows(); ++i) kstar[i] = matern52(query, points_.row(i).transpose(), params_);
    const double mean_s = kstar.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(kstar);
    const double var_s = std::max(params_.signal_variance - v.squaredNorm(), 0.0);
    return {target_mean_ + target_std_ * mean_s, target_std_ * target_std_ * var_s};
}

std::vector<Prediction> Surrogate::predict_batch(const PointSet& queries) const {
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i) out.push_back(predict(queries.row(i).transpose()));
    return out;
}

}  // namespace nrbo
