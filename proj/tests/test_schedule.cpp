#include <random>

#include <gtest/gtest.h>

#include "nrbo/acquisition.hpp"
#include "nrbo/errors.hpp"
#include "nrbo/schedule.hpp"
#include "oracles.hpp"

using namespace nrbo;

namespace {

ScheduleConfig config(int n) {
    ScheduleConfig c;
    c.total_iterations = n;
    return c;
}

}  // namespace

TEST(Schedule, Sigma1Endpoints) {
    const auto c = config(20);
    EXPECT_DOUBLE_EQ(sigma1_at(c, 0), 0.15);
    EXPECT_DOUBLE_EQ(sigma1_at(c, 20), 0.05);
    EXPECT_NEAR(sigma1_at(c, 10), 0.10, 1e-15);
}

TEST(Schedule, Sigma2Endpoints) {
    const auto c = config(20);
    EXPECT_DOUBLE_EQ(sigma2_at(c, 0), 0.05);
    EXPECT_DOUBLE_EQ(sigma2_at(c, 20), 0.20);
    EXPECT_NEAR(sigma2_at(c, 10), 0.125, 1e-15);
}

TEST(Schedule, OutOfRange) {
    const auto c = config(5);
    EXPECT_THROW(sigma1_at(c, -1), DomainError);
    EXPECT_THROW(sigma1_at(c, 6), DomainError);
    EXPECT_THROW(sigma2_at(c, 6), DomainError);
    EXPECT_THROW(schedule_at(c, -1), DomainError);
    EXPECT_THROW(config(0).validate(), DomainError);
    auto bad = config(3);
    bad.sigma2_span = -0.1;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Schedule, MonotoneAndBounded) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    std::uniform_int_distribution<int> n(1, 60);
    for (int rep = 0; rep < 200; ++rep) {
        ScheduleConfig c{u(rng), u(rng), u(rng), u(rng), n(rng)};
        for (int i = 0; i <= c.total_iterations; ++i) {
            const auto s = schedule_at(c, i);
            ASSERT_EQ(s.iteration, i);
            ASSERT_GE(s.sigma1_now, c.sigma1_base);
            ASSERT_LE(s.sigma1_now, c.sigma1_base + c.sigma1_span + 1e-15);
            ASSERT_GE(s.sigma2_now, c.sigma2_base);
            ASSERT_LE(s.sigma2_now, c.sigma2_base + c.sigma2_span + 1e-15);
            if (i > 0) {
                ASSERT_LE(s.sigma1_now, sigma1_at(c, i - 1));
                ASSERT_GE(s.sigma2_now, sigma2_at(c, i - 1));
            }
        }
    }
}

TEST(Schedule, ZeroSpansAreStatic) {
    ScheduleConfig c{0.07, 0.0, 0.09, 0.0, 12};
    for (int i = 0; i <= 12; ++i) {
        EXPECT_EQ(sigma1_at(c, i), 0.07);
        EXPECT_EQ(sigma2_at(c, i), 0.09);
    }
}

TEST(Schedule, GrowingDensityRadiusWeakensReward) {
    std::mt19937_64 rng(2);
    const auto pts = oracle::random_points(rng, 40, 2);
    const auto obs = oracle::make_obs(pts, oracle::Vec(40, 0.0));
    const auto q = oracle::random_points(rng, 25, 2);
    PointSet cands(25, 2);
    for (int i = 0; i < 25; ++i) cands.row(i) << q[i][0], q[i][1];
    const auto c = config(30);
    Eigen::VectorXd prev = density_rewards(obs, cands, sigma2_at(c, 0)).g;
    for (int i = 1; i <= 30; ++i) {
        const Eigen::VectorXd g = density_rewards(obs, cands, sigma2_at(c, i)).g;
        for (int k = 0; k < 25; ++k) ASSERT_LE(g[k], prev[k]);
        prev = g;
    }
}
