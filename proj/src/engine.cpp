#include "nrbo/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "nrbo/errors.hpp"
#include "nrbo/random.hpp"

namespace nrbo {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 6> kVariantNames{{
    {Variant::random_search, "random_search"},
    {Variant::plain_bo, "plain_bo"},
    {Variant::ensemble_bo, "ensemble_bo"},
    {Variant::nrbo_no_density, "nrbo_no_density"},
    {Variant::nrbo_static, "nrbo_static"},
    {Variant::nrbo_full, "nrbo_full"},
}};

// Stream keys for derive_seed.
enum Stream : std::uint64_t { kInit = 1, kRandom = 2, kCandidates = 3, kFit = 4, kSelect = 5 };

std::vector<Point> rows_to_points(const PointSet& rows) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose());
    return out;
}

}  // namespace

std::string_view to_string(Variant v) {
    for (const auto& [var, name] : kVariantNames)
        if (var == v) return name;
    return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (const auto& [var, n] : kVariantNames)
        if (n == name) return var;
    return std::nullopt;
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> all = [] {
        std::vector<Variant> v;
        for (const auto& [var, name] : kVariantNames) v.push_back(var);
        return v;
    }();
    return all;
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::initializing: return "initializing";
        case Phase::suggesting: return "suggesting";
        case Phase::awaiting_observation: return "awaiting_observation";
        case Phase::finished: return "finished";
    }
    return "unknown";
}

void OptimizerConfig::validate() const {
    if (space.dim() == 0) throw DomainError("optimizer: search space has no dimensions");
    if (init_count < 1) throw DomainError("optimizer: init_count must be >= 1");
    if (budget < 1) throw DomainError("optimizer: budget must be >= 1");
    if (batch_size < 1 || batch_size > budget) throw DomainError("optimizer: batch_size must be in [1, budget]");
    if (grid_points_per_dim < 2) throw DomainError("optimizer: grid_points_per_dim must be >= 2");
    if (random_candidates < static_cast<std::size_t>(batch_size))
        throw DomainError("optimizer: random_candidates must cover the batch");
    if (gp_restarts < 1) throw DomainError("optimizer: gp_restarts must be >= 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("optimizer: kappa must be > 0");
    ScheduleConfig s = schedule;
    s.total_iterations = budget;
    s.validate();
}

Engine::Engine(OptimizerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cfg_.schedule.total_iterations = cfg_.budget;
    cfg_.fit.restarts = static_cast<std::size_t>(cfg_.gp_restarts);
}

std::vector<Point> Engine::ask() {
    if (phase_ == Phase::awaiting_observation) throw StateError("ask: previous suggestions have not been told");
    if (phase_ == Phase::finished) throw StateError("ask: budget exhausted");

    if (phase_ == Phase::initializing) {
        last_schedule_ = {0, 0.0, 0.0};
        pending_ = rows_to_points(cfg_.space.sample_uniform(static_cast<std::size_t>(cfg_.init_count),
                                                            derive_seed(cfg_.rng_seed, {kInit})));
    } else {
        pending_ = suggest();
    }
    phase_before_ask_ = phase_;
    phase_ = Phase::awaiting_observation;
    return pending_;
}

PointSet Engine::candidates(int round) const {
    const auto k = static_cast<std::size_t>(cfg_.grid_points_per_dim);
    if (cfg_.space.grid_size(k) <= cfg_.grid_cap) return cfg_.space.meshgrid(k, cfg_.grid_cap);
    return cfg_.space.sample_uniform(cfg_.random_candidates,
                                     derive_seed(cfg_.rng_seed, {kCandidates, static_cast<std::uint64_t>(round)}));
}

std::vector<Point> Engine::suggest() {
    const int round = iteration_;
    const auto uround = static_cast<std::uint64_t>(round);
    const auto batch = static_cast<std::size_t>(cfg_.batch_size);
    const auto& sched = cfg_.schedule;
    last_schedule_ = {round, 0.0, 0.0};

    if (cfg_.variant == Variant::random_search || obs_.size() < 2)
        return rows_to_points(cfg_.space.sample_uniform(batch, derive_seed(cfg_.rng_seed, {kRandom, uround})));

    const bool smoothed = cfg_.variant == Variant::nrbo_no_density || cfg_.variant == Variant::nrbo_static ||
                          cfg_.variant == Variant::nrbo_full;
    const bool rewarded =
        cfg_.density_reward && (cfg_.variant == Variant::nrbo_static || cfg_.variant == Variant::nrbo_full);

    if (smoothed) {
        last_schedule_.sigma1_now = cfg_.variant == Variant::nrbo_static ? sched.sigma1_base + sched.sigma1_span
                                                                         : sigma1_at(sched, round);
    }
    if (rewarded) {
        last_schedule_.sigma2_now = cfg_.variant == Variant::nrbo_static ? sched.sigma2_base : sigma2_at(sched, round);
    }

    PointSet train_x;
    Eigen::VectorXd train_y;
    if (smoothed) {
        auto s = smooth(obs_, last_schedule_.sigma1_now);
        train_x = std::move(s.points);
        train_y = std::move(s.values);
    } else {
        train_x = obs_.points();
        train_y = obs_.values();
    }

    const Surrogate gp = Surrogate::fit(train_x, train_y, cfg_.fit, derive_seed(cfg_.rng_seed, {kFit, uround}));
    const PointSet cands = candidates(round);
    const double incumbent = train_y.minCoeff();
    const auto preds = gp.predict_batch(cands);

    std::vector<std::size_t> picks;
    if (cfg_.variant == Variant::plain_bo) {
        Eigen::VectorXd ei(cands.rows());
        for (Eigen::Index i = 0; i < cands.rows(); ++i)
            ei[i] = expected_improvement(preds[static_cast<std::size_t>(i)], incumbent);
        std::vector<std::size_t> order(static_cast<std::size_t>(cands.rows()));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ei[static_cast<Eigen::Index>(a)] > ei[static_cast<Eigen::Index>(b)];
        });
        picks.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(batch));
    } else {
        const auto scores = acquisition_scores(preds, cfg_.kappa, incumbent);
        const auto reward =
            rewarded ? density_rewards(obs_, cands, last_schedule_.sigma2_now) : uniform_reward(cands.rows());
        picks = select_batch(ensemble_objectives(scores, reward), batch, derive_seed(cfg_.rng_seed, {kSelect, uround}));
    }

    std::vector<Point> out;
    out.reserve(picks.size());
    for (auto i : picks) out.emplace_back(cands.row(static_cast<Eigen::Index>(i)).transpose());
    return out;
}

void Engine::tell(const std::vector<Observation>& results) {
    if (phase_ != Phase::awaiting_observation) throw StateError("tell: no suggestions are pending");
    if (results.size() != pending_.size())
        throw ProtocolError("tell: expected " + std::to_string(pending_.size()) + " results, got " +
                            std::to_string(results.size()));
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].point.size() != pending_[i].size() || results[i].point != pending_[i])
            throw ProtocolError("tell: result " + std::to_string(i) + " does not match the pending suggestion");
        if (!std::isfinite(results[i].value))
            throw ValueError("tell: objective value for result " + std::to_string(i) + " is not finite");
    }

    // initial design is tagged 0, suggestion round r is tagged r + 1
    const bool initial = phase_before_ask_ == Phase::initializing;
    const int tag = pending_iteration();
    for (const auto& r : results) obs_.add({r.point, r.value, tag});
    pending_.clear();

    if (initial) {
        phase_ = Phase::suggesting;
        return;
    }
    ++iteration_;
    phase_ = iteration_ >= cfg_.budget ? Phase::finished : Phase::suggesting;
}

const Trial& Engine::result() const {
    if (obs_.empty()) throw StateError("result: no trials observed");
    return best_raw(obs_);
}

}  // namespace nrbo
