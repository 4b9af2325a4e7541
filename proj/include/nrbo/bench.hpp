#ifndef NRBO_BENCH_HPP
#define NRBO_BENCH_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nrbo/engine.hpp"

namespace nrbo {

enum class ObjectiveKind { sincos2d, branin, sphere };

/// Synthetic black box on [0,1]^d, minimization convention, with additive
/// Gaussian noise of scale noise_level.
struct SyntheticObjective {
    std::string name;
    ObjectiveKind kind = ObjectiveKind::sincos2d;
    int dimension = 2;
    double noise_level = 0.0;
    double true_optimum = 0.0;
    Point argmin;
    std::uint64_t rng_seed = 0;

    double noiseless(const Point& p) const;
};

/// Builds a named objective: "sincos2d", "branin" or "sphere" (dimension only
/// used by sphere). Throws DomainError for unknown names.
SyntheticObjective make_objective(const std::string& name, double noise_level, std::uint64_t rng_seed = 0,
                                  int dimension = 2);

/// Seed of an objective's noise stream within a run; depends only on the
/// run seed and the objective name.
std::uint64_t objective_stream_seed(std::uint64_t run_seed, const std::string& objective_name);

/// Noiseless value plus noise_level times a standard normal draw keyed on
/// (rng_seed, draw_seed).
double eval_objective(const SyntheticObjective& obj, const Point& p, std::uint64_t draw_seed);

struct RobustnessResult {
    double rmse_plain = 0.0;
    double rmse_regularized = 0.0;
};

/// Fits one GP on noisy sincos2d samples and one on their neighbor-smoothed
/// version; reports each posterior mean's RMSE against the noiseless surface
/// on a 50x50 grid.
RobustnessResult surrogate_robustness(double noise_level, int n_train, double radius, std::uint64_t seed,
                                      const FitOptions& fit = {});

struct RunStep {
    int iteration = 0;
    Point point;
    double raw_value = 0.0;
    double best_so_far = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

struct RunRecord {
    std::string objective;
    Variant variant = Variant::random_search;
    std::uint64_t seed = 0;
    int init_count = 0;
    int budget = 0;
    int batch_size = 0;
    std::vector<RunStep> steps;
    double wall_seconds = 0.0;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
    double final_best() const;
};

/// One complete optimization run; the objective's noise stream is indexed by trial number.
RunRecord run_single(const SyntheticObjective& objective, const OptimizerConfig& cfg);

/// Every (objective, variant, seed) combination, in that nesting order. The
/// noise stream depends only on (objective, seed), so variants sharing a seed
/// see identical noise at each trial index. Failures are recorded per run.
std::vector<RunRecord> run_matrix(const std::vector<SyntheticObjective>& objectives,
                                  const std::vector<Variant>& variants, const std::vector<std::uint64_t>& seeds,
                                  const OptimizerConfig& cfg_template, std::size_t jobs = 1);

/// Mean final gap to the optimum divided by the baseline's mean final gap.
double normalized_mean_score(const std::vector<RunRecord>& records, const std::vector<RunRecord>& baseline,
                             double true_optimum);

struct ScoreSummary {
    std::string objective;
    std::string variant;
    double mean_best = 0.0;
    double std_best = 0.0;
    double normalized_mean_score = 0.0;  // NaN when no baseline is available
    std::size_t runs = 0;
    std::vector<std::uint64_t> seeds;
};

/// Per (objective, variant) summaries; normalized against random_search runs
/// when present.
std::vector<ScoreSummary> summarize(const std::vector<RunRecord>& records,
                                    const std::vector<SyntheticObjective>& objectives);

/// objective,variant,seed,iteration,best_so_far with one row per trial.
void write_trajectories_csv(std::ostream& out, const std::vector<RunRecord>& records);

}  // namespace nrbo

#endif  // NRBO_BENCH_HPP
