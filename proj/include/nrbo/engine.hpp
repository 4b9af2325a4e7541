#ifndef NRBO_ENGINE_HPP
#define NRBO_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nrbo/acquisition.hpp"
#include "nrbo/dataset.hpp"
#include "nrbo/schedule.hpp"
#include "nrbo/space.hpp"
#include "nrbo/surrogate.hpp"

namespace nrbo {

/// Suggestion policies. The BO variants form an ablation ladder:
///   plain_bo         GP on raw data, EI argmax
///   ensemble_bo      GP on raw data, EI/PI/LCB Pareto ensemble
///   nrbo_no_density  + neighbor-smoothed targets with the shrinking radius
///   nrbo_static      smoothed targets and density reward at fixed radii
///   nrbo_full        both radii follow the schedule
enum class Variant { random_search, plain_bo, ensemble_bo, nrbo_no_density, nrbo_static, nrbo_full };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();

struct OptimizerConfig {
    SearchSpace space;
    int init_count = 5;
    int budget = 20;
    int batch_size = 1;
    ScheduleConfig schedule;
    int grid_points_per_dim = 30;
    std::size_t grid_cap = kDefaultGridCap;
    /// Candidate count drawn uniformly when the grid would exceed grid_cap.
    std::size_t random_candidates = 4096;
    int gp_restarts = 4;
    double kappa = 2.0;
    std::uint64_t rng_seed = 0;
    Variant variant = Variant::nrbo_full;
    /// Turns the density reward off for the variants that would use it.
    bool density_reward = true;
    FitOptions fit;

    void validate() const;
};

enum class Phase { initializing, suggesting, awaiting_observation, finished };

std::string_view to_string(Phase p);

struct Observation {
    Point point;
    double value = 0.0;
};

/// Ask/tell optimizer. Each ask() must be followed by exactly one tell()
/// carrying a value for every pending point, in order.
class Engine {
public:
    explicit Engine(OptimizerConfig cfg);

    std::vector<Point> ask();
    void tell(const std::vector<Observation>& results);

    /// Best raw observation so far.
    const Trial& result() const;

    Phase phase() const { return phase_; }
    int iteration() const { return iteration_; }
    const ObservationSet& observations() const { return obs_; }
    const std::vector<Point>& pending() const { return pending_; }
    /// Iteration tag the pending points will carry once told (0 for the initial design).
    int pending_iteration() const { return phase_before_ask_ == Phase::initializing ? 0 : iteration_ + 1; }
    const OptimizerConfig& config() const { return cfg_; }

    /// Effective radii used by the most recent ask (zero where a variant does not use them).
    const ScheduleState& last_schedule() const { return last_schedule_; }

private:
    std::vector<Point> suggest();
    PointSet candidates(int round) const;

    OptimizerConfig cfg_;
    Phase phase_ = Phase::initializing;
    Phase phase_before_ask_ = Phase::initializing;
    ObservationSet obs_;
    std::vector<Point> pending_;
    int iteration_ = 0;
    ScheduleState last_schedule_;
};

}  // namespace nrbo

#endif  // NRBO_ENGINE_HPP
