#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nrbo/bench.hpp"
#include "nrbo/errors.hpp"

using namespace nrbo;

namespace {

constexpr double kPi = std::numbers::pi;

// Branin on its native domain, written independently of the library.
double branin_native(double x1, double x2) {
    const double a = 1.0, b = 5.1 / (4.0 * kPi * kPi), c = 5.0 / kPi, r = 6.0, s = 10.0, t = 1.0 / (8.0 * kPi);
    return a * std::pow(x2 - b * x1 * x1 + c * x1 - r, 2) + s * (1.0 - t) * std::cos(x1) + s;
}

RunRecord fixture(double final_best) {
    RunRecord r;
    r.objective = "sincos2d";
    r.steps.push_back({0, Point::Zero(2), final_best + 1.0, final_best + 1.0, 0.0, 0.0});
    r.steps.push_back({1, Point::Zero(2), final_best, final_best, 0.0, 0.0});
    return r;
}

OptimizerConfig small_config() {
    OptimizerConfig c;
    c.space = unit_cube(2);
    c.init_count = 4;
    c.budget = 6;
    c.grid_points_per_dim = 12;
    c.gp_restarts = 2;
    c.fit.max_iterations = 50;
    return c;
}

bool same_record(const RunRecord& a, const RunRecord& b) {
    if (a.objective != b.objective || a.variant != b.variant || a.seed != b.seed || a.error != b.error ||
        a.steps.size() != b.steps.size())
        return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto& x = a.steps[i];
        const auto& y = b.steps[i];
        if (x.iteration != y.iteration || x.point != y.point || x.raw_value != y.raw_value ||
            x.best_so_far != y.best_so_far || x.sigma1 != y.sigma1 || x.sigma2 != y.sigma2)
            return false;
    }
    return true;
}

}  // namespace

TEST(Objectives, SincosExamples) {
    const auto o = make_objective("sincos2d", 0.0);
    EXPECT_EQ(eval_objective(o, Eigen::Vector2d(0.25, 0.5), 3), 0.0);
    EXPECT_EQ(eval_objective(o, Eigen::Vector2d(0.25, 0.0), 3), -2.0);
    EXPECT_EQ(o.true_optimum, -2.0);
}

TEST(Objectives, KnownOptima) {
    for (const auto& o : {make_objective("sincos2d", 0.0), make_objective("branin", 0.0),
                          make_objective("sphere", 0.0, 0, 2), make_objective("sphere", 0.0, 0, 5)})
        EXPECT_NEAR(o.noiseless(o.argmin), o.true_optimum, 1e-12) << o.name;
    EXPECT_NEAR(make_objective("branin", 0.0).true_optimum, 0.3978873577297384, 1e-12);
}

TEST(Objectives, BraninMatchesNativeFormula) {
    const auto o = make_objective("branin", 0.0);
    // the three global minimizers on the native domain
    for (const auto& [x1, x2] : {std::pair{-kPi, 12.275}, std::pair{kPi, 2.275}, std::pair{9.42478, 2.475}}) {
        const Point p = Eigen::Vector2d((x1 + 5.0) / 15.0, x2 / 15.0);
        EXPECT_NEAR(o.noiseless(p), 0.3978873577297384, 1e-5);
        EXPECT_NEAR(o.noiseless(p), branin_native(x1, x2), 1e-12);
    }
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_NEAR(o.noiseless(Eigen::Vector2d(a, b)), branin_native(15.0 * a - 5.0, 15.0 * b), 1e-9);
    }
}

TEST(Objectives, Errors) {
    EXPECT_THROW(make_objective("rosenbrock", 0.0), DomainError);
    EXPECT_THROW(make_objective("sphere", -0.1), DomainError);
    EXPECT_THROW(make_objective("sphere", 0.0, 0, 0), DomainError);
    EXPECT_THROW(make_objective("sincos2d", 0.0).noiseless(Eigen::Vector3d(0, 0, 0)), DomainError);
}

TEST(Noise, StandardDeviationAndDeterminism) {
    const auto o = make_objective("sincos2d", 0.4, 77);
    const Point p = Eigen::Vector2d(0.3, 0.6);
    const double clean = o.noiseless(p);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = eval_objective(o, p, static_cast<std::uint64_t>(i)) - clean;
        s += e;
        s2 += e * e;
    }
    const double mean = s / n;
    const double sd = std::sqrt((s2 - n * mean * mean) / (n - 1));
    EXPECT_NEAR(sd, 0.4, 0.01);
    EXPECT_EQ(eval_objective(o, p, 12), eval_objective(o, p, 12));
}

TEST(Noise, StreamsAreUncorrelated) {
    auto a = make_objective("sincos2d", 1.0, objective_stream_seed(1, "sincos2d"));
    auto b = make_objective("sincos2d", 1.0, objective_stream_seed(2, "sincos2d"));
    const Point p = Eigen::Vector2d(0.1, 0.1);
    const int n = 10000;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = eval_objective(a, p, static_cast<std::uint64_t>(i));
        y[i] = eval_objective(b, p, static_cast<std::uint64_t>(i));
    }
    auto corr = [](const double* u, const double* v, int m) {
        double mu = 0, mv = 0;
        for (int i = 0; i < m; ++i) mu += u[i], mv += v[i];
        mu /= m;
        mv /= m;
        double cuv = 0, cuu = 0, cvv = 0;
        for (int i = 0; i < m; ++i) {
            cuv += (u[i] - mu) * (v[i] - mv);
            cuu += (u[i] - mu) * (u[i] - mu);
            cvv += (v[i] - mv) * (v[i] - mv);
        }
        return cuv / std::sqrt(cuu * cvv);
    };
    // 4 standard errors at n = 1e4
    EXPECT_LT(std::abs(corr(x.data(), y.data(), n)), 0.04);
    EXPECT_LT(std::abs(corr(x.data(), x.data() + 1, n - 1)), 0.04);
    EXPECT_NE(objective_stream_seed(1, "sincos2d"), objective_stream_seed(1, "branin"));
}

TEST(Robustness, ZeroRadiusIsNoOp) {
    FitOptions fit;
    fit.restarts = 2;
    const auto r = surrogate_robustness(0.4, 30, 0.0, 5, fit);
    EXPECT_EQ(r.rmse_plain, r.rmse_regularized);
    EXPECT_GT(r.rmse_plain, 0.0);
    EXPECT_THROW(surrogate_robustness(0.4, 5, 0.1, 5, fit), DomainError);
    EXPECT_THROW(surrogate_robustness(0.4, 30, -0.1, 5, fit), DomainError);
}

TEST(Robustness, Deterministic) {
    FitOptions fit;
    fit.restarts = 2;
    const auto a = surrogate_robustness(0.8, 30, 0.1, 9, fit);
    const auto b = surrogate_robustness(0.8, 30, 0.1, 9, fit);
    EXPECT_EQ(a.rmse_plain, b.rmse_plain);
    EXPECT_EQ(a.rmse_regularized, b.rmse_regularized);
}

TEST(Runs, SingleMatrixCell) {
    const auto recs = run_matrix({make_objective("sincos2d", 0.4)}, {Variant::nrbo_full}, {3}, small_config());
    ASSERT_EQ(recs.size(), 1u);
    const auto& r = recs[0];
    ASSERT_TRUE(r.ok()) << r.error;
    EXPECT_EQ(r.steps.size(), 4u + 6u);
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        EXPECT_LE(r.steps[i].best_so_far, r.steps[i - 1].best_so_far);
        EXPECT_EQ(r.steps[i].best_so_far, std::min(r.steps[i - 1].best_so_far, r.steps[i].raw_value));
    }
    EXPECT_EQ(r.steps.back().iteration, 6);
}

TEST(Runs, MatrixOrderDeterminismAndParallelism) {
    const std::vector<SyntheticObjective> objs{make_objective("sincos2d", 0.4), make_objective("sphere", 0.1)};
    const std::vector<Variant> vars{Variant::random_search, Variant::nrbo_full};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto a = run_matrix(objs, vars, seeds, small_config(), 1);
    const auto b = run_matrix(objs, vars, seeds, small_config(), 3);
    ASSERT_EQ(a.size(), 8u);
    std::size_t k = 0;
    for (const auto& o : objs)
        for (auto v : vars)
            for (auto s : seeds) {
                EXPECT_EQ(a[k].objective, o.name);
                EXPECT_EQ(a[k].variant, v);
                EXPECT_EQ(a[k].seed, s);
                EXPECT_TRUE(same_record(a[k], b[k]));
                ++k;
            }
    // variants sharing a seed see the same noise on the shared initial design
    EXPECT_EQ(a[0].steps[0].raw_value, a[2].steps[0].raw_value);
}

TEST(Runs, FailuresAreRecordedAndMatrixContinues) {
    const auto recs = run_matrix({make_objective("sphere", 0.0, 0, 3), make_objective("sphere", 0.0, 0, 2)},
                                 {Variant::random_search}, {1}, small_config());
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_FALSE(recs[0].ok());
    EXPECT_TRUE(recs[0].steps.empty());
    EXPECT_TRUE(recs[1].ok());
    EXPECT_THROW(run_matrix({}, {Variant::random_search}, {1}, small_config()), DomainError);
}

TEST(Runs, SummaryStableAcrossInvocations) {
    auto cfg = small_config();
    cfg.budget = 4;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
    const std::vector<SyntheticObjective> objs{make_objective("sincos2d", 0.4)};
    const std::vector<Variant> vars{Variant::random_search, Variant::nrbo_full};
    const auto a = summarize(run_matrix(objs, vars, seeds, cfg), objs);
    const auto b = summarize(run_matrix(objs, vars, seeds, cfg), objs);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(a[i].mean_best, b[i].mean_best);
        EXPECT_EQ(a[i].std_best, b[i].std_best);
        EXPECT_EQ(a[i].normalized_mean_score, b[i].normalized_mean_score);
        EXPECT_EQ(a[i].runs, a[i].seeds.size());
        EXPECT_EQ(a[i].runs, 20u);
    }
    EXPECT_EQ(a[0].variant, "random_search");
    EXPECT_DOUBLE_EQ(a[0].normalized_mean_score, 1.0);
}

TEST(Score, Fixtures) {
    const std::vector<RunRecord> base{fixture(-1.7), fixture(-1.5)};
    EXPECT_EQ(normalized_mean_score(base, base, -2.0), 1.0);
    EXPECT_EQ(normalized_mean_score({fixture(-2.0), fixture(-2.0)}, base, -2.0), 0.0);
    EXPECT_EQ(normalized_mean_score({fixture(0.2), fixture(0.4)}, {fixture(0.4)}, 0.0), 0.75);
    EXPECT_DOUBLE_EQ(normalized_mean_score({fixture(-1.8), fixture(-1.6)}, base, -2.0), 0.75);
    EXPECT_THROW(normalized_mean_score(base, {fixture(-2.0)}, -2.0), UndefinedScoreError);
    EXPECT_THROW(normalized_mean_score({}, base, -2.0), UndefinedScoreError);
}

TEST(Trajectories, CsvHasOneRowPerTrial) {
    const auto recs = run_matrix({make_objective("sphere", 0.1)}, {Variant::random_search, Variant::plain_bo}, {1, 2},
                                 small_config());
    std::ostringstream out;
    write_trajectories_csv(out, recs);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "objective,variant,seed,iteration,best_so_far");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2 * 2 * (4 + 6));
}
