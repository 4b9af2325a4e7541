#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nrbo/errors.hpp"
#include "nrbo/surrogate.hpp"

using namespace nrbo;

namespace {

KernelParams iso(double sf2, double ls, double noise, Eigen::Index d) {
    return {sf2, Eigen::VectorXd::Constant(d, ls), noise};
}

PointSet random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointSet x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
    return x;
}

// Matérn-5/2 written out from its textbook form.
double matern_closed_form(double r) { return (1.0 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r); }

}  // namespace

TEST(Kernel, ZeroDistanceAndSymmetry) {
    const auto p = KernelParams{2.5, Eigen::Vector2d(0.3, 0.7), 1e-6};
    const Point a = Eigen::Vector2d(0.1, 0.9);
    EXPECT_EQ(matern52(a, a, p), 2.5);
    std::mt19937_64 rng(2);
    const auto x = random_points(rng, 40, 2);
    for (Eigen::Index i = 0; i + 1 < x.rows(); i += 2)
        EXPECT_EQ(matern52(x.row(i).transpose(), x.row(i + 1).transpose(), p),
                  matern52(x.row(i + 1).transpose(), x.row(i).transpose(), p));
    EXPECT_THROW(matern52(a, Eigen::Vector3d(0, 0, 0), p), DomainError);
}

TEST(Kernel, UnitScaledDistance) {
    // r = 1: (1 + sqrt5 + 5/3) exp(-sqrt5)
    const auto p = iso(1.0, 0.25, 1e-6, 1);
    const double v = matern52(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 0.75), p);
    EXPECT_NEAR(v, 0.5239941088318203, 1e-12);
    EXPECT_NEAR(v, matern_closed_form(1.0), 1e-14);
}

TEST(Nlml, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index d = 1 + rep % 3;
        const auto x = random_points(rng, 12, d);
        Eigen::VectorXd y(12);
        for (Eigen::Index i = 0; i < 12; ++i) y[i] = std::sin(4.0 * x(i, 0)) + 0.1 * n01(rng);
        Eigen::VectorXd theta(d + 2);
        theta[0] = std::log(0.5 + u(rng));
        for (Eigen::Index j = 0; j < d; ++j) theta[1 + j] = std::log(0.1 + 0.5 * u(rng));
        theta[d + 1] = std::log(1e-3 + 0.05 * u(rng));

        const auto eval = negative_log_marginal_likelihood(x, y, theta);
        const double h = 1e-5;
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
            Eigen::VectorXd tp = theta, tm = theta;
            tp[k] += h;
            tm[k] -= h;
            const double fd = (negative_log_marginal_likelihood(x, y, tp).value -
                               negative_log_marginal_likelihood(x, y, tm).value) / (2.0 * h);
            const double rel = std::abs(eval.gradient[k] - fd) / std::max(std::abs(fd), 1e-3);
            EXPECT_LE(rel, 1e-4) << "rep " << rep << " component " << k << " analytic " << eval.gradient[k]
                                 << " fd " << fd;
        }
    }
}

TEST(Nlml, OptimizerIsMonotone) {
    std::mt19937_64 rng(3);
    const auto x = random_points(rng, 15, 2);
    Eigen::VectorXd y(15);
    for (Eigen::Index i = 0; i < 15; ++i) y[i] = std::cos(5.0 * x(i, 0)) * x(i, 1);
    y = (y.array() - y.mean()) / std::sqrt((y.array() - y.mean()).square().mean());
    FitOptions opt;
    opt.noise_ratio_max = 1e-2;
    const auto trace = minimize_nlml(x, y, pack_log_params(iso(3.0, 1.5, 3e-3, 2)), opt);
    ASSERT_GE(trace.values.size(), 2u);
    for (std::size_t i = 1; i < trace.values.size(); ++i) EXPECT_LT(trace.values[i], trace.values[i - 1]);
}

TEST(Fit, ConstantTargets) {
    std::mt19937_64 rng(5);
    const auto x = random_points(rng, 6, 2);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 4.25);
    const auto s = Surrogate::fit(x, y, FitOptions{}, 1);
    EXPECT_EQ(s.target_std(), 1.0);
    for (const Point& q : {Point(Eigen::Vector2d(0.3, 0.3)), Point(Eigen::Vector2d(0.99, 0.01))})
        EXPECT_NEAR(s.predict(q).mean, 4.25, 1e-6);
}

TEST(Fit, BeatsGeneratingParameters) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(100 + seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        const auto x = random_points(rng, 8, 2);
        const auto gen = iso(1.0, 0.3, 1e-6, 2);
        Eigen::MatrixXd k = cross_covariance(x, x, gen);
        k.diagonal().array() += gen.noise_variance;
        Eigen::VectorXd z(8);
        for (auto& v : z) v = n01(rng);
        const Eigen::VectorXd y = k.llt().matrixL() * z;

        const auto s = Surrogate::fit(x, y, FitOptions{}, seed);
        // generator expressed for standardized targets
        const double sd = s.target_std();
        KernelParams gen_std = gen;
        gen_std.signal_variance = gen.signal_variance / (sd * sd);
        gen_std.noise_variance = gen.noise_variance / (sd * sd);
        const double at_gen = negative_log_marginal_likelihood(x, s.training_targets(), pack_log_params(gen_std)).value;
        EXPECT_LE(s.nlml(), at_gen + 1e-6) << "seed " << seed;
    }
}

TEST(Fit, RejectsBadInput) {
    EXPECT_THROW(Surrogate::fit(PointSet::Zero(1, 2), Eigen::VectorXd::Zero(1), FitOptions{}, 0), DomainError);
    PointSet x(2, 1);
    x << 0.1, 0.2;
    EXPECT_THROW(Surrogate::fit(x, Eigen::Vector2d(1.0, std::nan("")), FitOptions{}, 0), ValueError);
}

TEST(Fit, DeterministicAndDuplicatesAllowed) {
    PointSet x(5, 1);
    x << 0.1, 0.1, 0.5, 0.5, 0.9;
    const Eigen::VectorXd y = (Eigen::VectorXd(5) << 1.0, 1.2, -0.3, -0.1, 0.8).finished();
    const auto a = Surrogate::fit(x, y, FitOptions{}, 9);
    const auto b = Surrogate::fit(x, y, FitOptions{}, 9);
    EXPECT_EQ(pack_log_params(a.params()), pack_log_params(b.params()));
    EXPECT_EQ(a.predict(Eigen::VectorXd::Constant(1, 0.3)).mean, b.predict(Eigen::VectorXd::Constant(1, 0.3)).mean);
}

TEST(Predict, InterpolatesTrainingPoints) {
    // well separated 3x3 grid so the floor noise is the only residual
    PointSet x(9, 2);
    for (Eigen::Index i = 0; i < 9; ++i) x.row(i) << 0.1 + 0.4 * (i / 3), 0.1 + 0.4 * (i % 3);
    Eigen::VectorXd y(9);
    for (Eigen::Index i = 0; i < 9; ++i) y[i] = 3.0 * x(i, 0) - x(i, 1) * x(i, 1);
    const auto s = Surrogate::condition(x, y, iso(1.0, 0.2, 1e-6, 2));
    for (Eigen::Index i = 0; i < 9; ++i) {
        const auto p = s.predict(x.row(i).transpose());
        // floor noise shrinks toward the mean by noise/(sf2+noise)
        EXPECT_NEAR(p.mean, y[i], 1.1e-6 * std::max(1.0, std::abs(y[i] - s.target_mean())));
        EXPECT_LE(p.variance / (s.target_std() * s.target_std()), 1e-6 * s.params().signal_variance);
    }
}

TEST(Predict, RevertsToPriorFarAway) {
    PointSet x(3, 2);
    x << 0.0, 0.0, 0.1, 0.05, 0.05, 0.1;
    const Eigen::VectorXd y = Eigen::Vector3d(2.0, -1.0, 0.5);
    const auto s = Surrogate::condition(x, y, iso(1.7, 0.02, 1e-6, 2));
    const auto p = s.predict(Eigen::Vector2d(1.0, 1.0));
    EXPECT_NEAR(p.mean, s.target_mean(), 0.01 * std::abs(s.target_mean()) + 1e-9);
    const double prior = 1.7 * s.target_std() * s.target_std();
    EXPECT_NEAR(p.variance, prior, 0.01 * prior);
}

TEST(Predict, TwoPointClosedForm) {
    PointSet x(2, 1);
    x << 0.2, 0.6;
    const Eigen::VectorXd y = Eigen::Vector2d(1.5, -0.5);
    const double sf2 = 1.3, ls = 0.35, noise = 1e-3;
    const auto s = Surrogate::condition(x, y, iso(sf2, ls, noise, 1));

    // hand-solved: standardized targets are (+1, -1) with mean 0.5, std 1
    const double mean = 0.5, sd = 1.0;
    const double ys1 = 1.0, ys2 = -1.0;
    const double a = sf2 + noise;
    const double b = sf2 * matern_closed_form(0.4 / ls);
    const double det = a * a - b * b;
    for (double q : {0.0, 0.2, 0.45, 0.6, 0.83, 1.0}) {
        const double k1 = sf2 * matern_closed_form(std::abs(q - 0.2) / ls);
        const double k2 = sf2 * matern_closed_form(std::abs(q - 0.6) / ls);
        // K^{-1} = [[a, -b], [-b, a]] / det
        const double w1 = (a * ys1 - b * ys2) / det;
        const double w2 = (-b * ys1 + a * ys2) / det;
        const double mu = mean + sd * (k1 * w1 + k2 * w2);
        const double quad = (a * k1 * k1 - 2.0 * b * k1 * k2 + a * k2 * k2) / det;
        const double var = sd * sd * (sf2 - quad);
        const auto p = s.predict(Eigen::VectorXd::Constant(1, q));
        EXPECT_NEAR(p.mean, mu, 1e-10) << "q=" << q;
        EXPECT_NEAR(p.variance, var, 1e-10) << "q=" << q;
    }
}

TEST(Predict, BatchMatchesLoop) {
    std::mt19937_64 rng(8);
    const auto x = random_points(rng, 20, 3);
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) y[i] = x.row(i).sum();
    const auto s = Surrogate::fit(x, y, FitOptions{}, 2);
    const auto q = random_points(rng, 50, 3);
    const auto batch = s.predict_batch(q);
    ASSERT_EQ(batch.size(), 50u);
    for (Eigen::Index i = 0; i < 50; ++i) {
        const auto p = s.predict(q.row(i).transpose());
        EXPECT_EQ(batch[static_cast<std::size_t>(i)].mean, p.mean);
        EXPECT_EQ(batch[static_cast<std::size_t>(i)].variance, p.variance);
    }
    EXPECT_TRUE(s.predict_batch(PointSet(0, 3)).empty());
    const auto one = s.predict_batch(q.topRows(1));
    EXPECT_EQ(one.front().mean, batch.front().mean);
}

TEST(Posterior, VarianceBoundedByPriorAndShrinksWithData) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_points(rng, 15, 2);
        Eigen::VectorXd y(15);
        for (Eigen::Index i = 0; i < 15; ++i) y[i] = std::sin(6.0 * x(i, 0)) + x(i, 1);
        const auto params = iso(1.0, 0.15 + 0.02 * rep, 1e-4, 2);
        const auto small = Surrogate::condition(x.topRows(10), y.head(10), params);
        const auto large = Surrogate::condition(x, y, params);
        const auto q = random_points(rng, 30, 2);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const auto ps = small.predict(q.row(i).transpose());
            const auto pl = large.predict(q.row(i).transpose());
            const double vs = ps.variance / (small.target_std() * small.target_std());
            const double vl = pl.variance / (large.target_std() * large.target_std());
            ASSERT_LE(vs, params.signal_variance + 1e-8);
            ASSERT_LE(vl, params.signal_variance + 1e-8);
            ASSERT_LE(vl, vs + 1e-8);
            ASSERT_GE(pl.variance, 0.0);
        }
    }
}

TEST(Posterior, FactorReconstructsCovariance) {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        auto x = random_points(rng, 25, 2);
        x.row(3) = x.row(7);  // duplicates must still factor
        const auto params = iso(0.8, 0.3, 0.8e-6, 2);
        const auto s = Surrogate::condition(x, Eigen::VectorXd::LinSpaced(25, -1.0, 1.0), params);
        Eigen::MatrixXd k = cross_covariance(x, x, params);
        k.diagonal().array() += s.effective_noise();
        const Eigen::MatrixXd l = s.chol_factor();
        EXPECT_LE((l * l.transpose() - k).norm() / k.norm(), 1e-8);
        EXPECT_TRUE(l.isLowerTriangular());
    }
}
