#include "nrbo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "nrbo/errors.hpp"
#include "nrbo/random.hpp"

namespace nrbo {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double branin_raw(double x1, double x2) {
    const double b = 5.1 / (4.0 * kPi * kPi);
    const double c = 5.0 / kPi;
    const double t = 1.0 / (8.0 * kPi);
    const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
    return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

}  // namespace

double SyntheticObjective::noiseless(const Point& p) const {
    if (p.size() != dimension)
        throw DomainError("objective '" + name + "' expects dimension " + std::to_string(dimension));
    switch (kind) {
        case ObjectiveKind::sincos2d:
            return -(std::sin(2.0 * kPi * p[0]) + std::cos(2.0 * kPi * p[1]));
        case ObjectiveKind::branin:
            return branin_raw(15.0 * p[0] - 5.0, 15.0 * p[1]);
        case ObjectiveKind::sphere:
            return (p.array() - 0.5).square().sum();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

SyntheticObjective make_objective(const std::string& name, double noise_level, std::uint64_t rng_seed, int dimension) {
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) throw DomainError("noise level must be finite and >= 0");
    SyntheticObjective o;
    o.name = name;
    o.noise_level = noise_level;
    o.rng_seed = rng_seed;
    if (name == "sincos2d") {
        o.kind = ObjectiveKind::sincos2d;
        o.dimension = 2;
        o.true_optimum = -2.0;
        o.argmin = Eigen::Vector2d(0.25, 0.0);
    } else if (name == "branin") {
        o.kind = ObjectiveKind::branin;
        o.dimension = 2;
        o.true_optimum = 10.0 / (8.0 * kPi);
        o.argmin = Eigen::Vector2d((kPi + 5.0) / 15.0, 2.275 / 15.0);
    } else if (name == "sphere") {
        if (dimension < 1) throw DomainError("sphere dimension must be >= 1");
        o.kind = ObjectiveKind::sphere;
        o.dimension = dimension;
        o.true_optimum = 0.0;
        o.argmin = Point::Constant(dimension, 0.5);
    } else {
        throw DomainError("unknown objective '" + name + "' (expected sincos2d, branin or sphere)");
    }
    return o;
}

std::uint64_t objective_stream_seed(std::uint64_t run_seed, const std::string& objective_name) {
    return derive_seed(run_seed, {fnv1a(objective_name)});
}

double eval_objective(const SyntheticObjective& obj, const Point& p, std::uint64_t draw_seed) {
    const double clean = obj.noiseless(p);
    if (obj.noise_level == 0.0) return clean;
    std::mt19937_64 rng(derive_seed(obj.rng_seed, {draw_seed}));
    std::normal_distribution<double> normal(0.0, 1.0);
    return clean + obj.noise_level * normal(rng);
}

RobustnessResult surrogate_robustness(double noise_level, int n_train, double radius, std::uint64_t seed,
                                      const FitOptions& fit) {
    if (n_train < 10) throw DomainError("surrogate_robustness: n_train must be >= 10");
    if (radius < 0.0) throw DomainError("surrogate_robustness: radius must be >= 0");
    const auto obj = make_objective("sincos2d", noise_level, derive_seed(seed, {0x4e01}));
    const SearchSpace space = unit_cube(2);

    const PointSet x = space.sample_uniform(static_cast<std::size_t>(n_train), derive_seed(seed, {0x4e02}));
    ObservationSet obs;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        obs.add({x.row(i).transpose(), eval_objective(obj, x.row(i).transpose(), static_cast<std::uint64_t>(i)), 0});

    const auto fit_seed = derive_seed(seed, {0x4e03});
    const Surrogate plain = Surrogate::fit(x, obs.values(), fit, fit_seed);
    const Surrogate regularized = Surrogate::fit(x, smooth(obs, radius).values, fit, fit_seed);

    const PointSet grid = space.meshgrid(50);
    double se_plain = 0.0;
    double se_reg = 0.0;
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        const Point q = grid.row(i).transpose();
        const double truth = obj.noiseless(q);
        se_plain += std::pow(plain.predict(q).mean - truth, 2);
        se_reg += std::pow(regularized.predict(q).mean - truth, 2);
    }
    const auto n = static_cast<double>(grid.rows());
    return {std::sqrt(se_plain / n), std::sqrt(se_reg / n)};
}

double RunRecord::final_best() const {
    if (steps.empty()) throw StateError("run record has no steps");
    return steps.back().best_so_far;
}

RunRecord run_single(const SyntheticObjective& objective, const OptimizerConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.objective = objective.name;
    rec.variant = cfg.variant;
    rec.seed = cfg.rng_seed;
    rec.init_count = cfg.init_count;
    rec.budget = cfg.budget;
    rec.batch_size = cfg.batch_size;

    Engine engine(cfg);
    std::uint64_t trial = 0;
    double best = std::numeric_limits<double>::infinity();
    while (engine.phase() != Phase::finished) {
        const auto points = engine.ask();
        const auto& sched = engine.last_schedule();
        std::vector<Observation> results;
        results.reserve(points.size());
        for (const auto& p : points) {
            const double y = eval_objective(objective, p, trial++);
            results.push_back({p, y});
        }
        engine.tell(results);
        const auto& trials = engine.observations().trials();
        for (std::size_t i = trials.size() - results.size(); i < trials.size(); ++i) {
            best = std::min(best, trials[i].raw_value);
            rec.steps.push_back({trials[i].iteration, trials[i].point, trials[i].raw_value, best, sched.sigma1_now,
                                 sched.sigma2_now});
        }
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<RunRecord> run_matrix(const std::vector<SyntheticObjective>& objectives,
                                  const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                                  const OptimizerConfig& cfg_template, std::size_t jobs) {
    if (objectives.empty() || variants.empty() || seeds.empty())
        throw DomainError("run_matrix: objectives, variants and seeds must be non-empty");

    struct Task {
        const SyntheticObjective* objective;
        Variant variant;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& o : objectives)
        for (auto v : variants)
            for (auto s : seeds) tasks.push_back({&o, v, s});

    std::vector<RunRecord> out(tasks.size());
    auto run_task = [&](std::size_t i) {
        const auto& t = tasks[i];
        OptimizerConfig cfg = cfg_template;
        cfg.variant = t.variant;
        cfg.rng_seed = t.seed;
        SyntheticObjective obj = *t.objective;
        obj.rng_seed = objective_stream_seed(t.seed, obj.name);
        try {
            out[i] = run_single(obj, cfg);
        } catch (const std::exception& e) {
            RunRecord failed;
            failed.objective = obj.name;
            failed.variant = t.variant;
            failed.seed = t.seed;
            failed.init_count = cfg.init_count;
            failed.budget = cfg.budget;
            failed.batch_size = cfg.batch_size;
            failed.error = e.what();
            out[i] = std::move(failed);
        }
    };

    jobs = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
        });
    }
    for (auto& w : workers) w.join();
    return out;
}

double normalized_mean_score(const std::vector<RunRecord>& records, const std::vector<RunRecord>& baseline,
                             double true_optimum) {
    if (records.empty() || baseline.empty()) throw UndefinedScoreError("normalized score needs runs and baseline runs");
    // extended precision keeps fixtures with exact ratios exact
    auto mean_gap = [&](const std::vector<RunRecord>& rs) {
        long double sum = 0.0L;
        for (const auto& r : rs) sum += static_cast<long double>(r.final_best()) - true_optimum;
        return sum / static_cast<long double>(rs.size());
    };
    const long double base = mean_gap(baseline);
    if (base == 0.0L) throw UndefinedScoreError("baseline gap to the optimum is zero; normalized score undefined");
    return static_cast<double>(mean_gap(records) / base);
}

std::vector<ScoreSummary> summarize(const std::vector<RunRecord>& records,
                                    const std::vector<SyntheticObjective>& objectives) {
    std::vector<ScoreSummary> out;
    for (const auto& obj : objectives) {
        std::vector<RunRecord> baseline;
        for (const auto& r : records)
            if (r.ok() && r.objective == obj.name && r.variant == Variant::random_search) baseline.push_back(r);

        std::vector<Variant> seen;
        for (const auto& r : records)
            if (r.objective == obj.name && std::find(seen.begin(), seen.end(), r.variant) == seen.end())
                seen.push_back(r.variant);

        for (auto v : seen) {
            std::vector<RunRecord> group;
            ScoreSummary s;
            s.objective = obj.name;
            s.variant = std::string(to_string(v));
            for (const auto& r : records) {
                if (r.objective != obj.name || r.variant != v || !r.ok()) continue;
                group.push_back(r);
                s.seeds.push_back(r.seed);
            }
            s.runs = group.size();
            if (group.empty()) {
                s.mean_best = s.std_best = s.normalized_mean_score = std::numeric_limits<double>::quiet_NaN();
                out.push_back(std::move(s));
                continue;
            }
            double sum = 0.0;
            for (const auto& r : group) sum += r.final_best();
            s.mean_best = sum / static_cast<double>(group.size());
            double ss = 0.0;
            for (const auto& r : group) ss += std::pow(r.final_best() - s.mean_best, 2);
            s.std_best = group.size() > 1 ? std::sqrt(ss / static_cast<double>(group.size() - 1)) : 0.0;
            s.normalized_mean_score = std::numeric_limits<double>::quiet_NaN();
            if (!baseline.empty()) {
                try {
                    s.normalized_mean_score = normalized_mean_score(group, baseline, obj.true_optimum);
                } catch (const UndefinedScoreError&) {
                }
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_trajectories_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    out << "objective,variant,seed,iteration,best_so_far\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : records)
        for (const auto& s : r.steps)
            out << r.objective << ',' << to_string(r.variant) << ',' << r.seed << ',' << s.iteration << ','
                << s.best_so_far << '\n';
    out.precision(old_precision);
}

}  // namespace nrbo
