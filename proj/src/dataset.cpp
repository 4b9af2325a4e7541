#include "nrbo/dataset.hpp"

#include <cmath>
#include <string>

#include "nrbo/errors.hpp"

namespace nrbo {

void ObservationSet::add(Trial t) {
    if (!std::isfinite(t.raw_value)) throw ValueError("trial value must be finite");
    if (!trials_.empty()) {
        if (t.point.size() != trials_.front().point.size())
            throw DomainError("trial dimension mismatch");
        if (t.iteration < trials_.back().iteration)
            throw DomainError("trial iterations must be non-decreasing");
    }
    trials_.push_back(std::move(t));
}

PointSet ObservationSet::points() const {
    if (trials_.empty()) return {};
    PointSet out(static_cast<Eigen::Index>(trials_.size()), trials_.front().point.size());
    for (std::size_t i = 0; i < trials_.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = trials_[i].point.transpose();
    return out;
}

Eigen::VectorXd ObservationSet::values() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(trials_.size()));
    for (std::size_t i = 0; i < trials_.size(); ++i) out[static_cast<Eigen::Index>(i)] = trials_[i].raw_value;
    return out;
}

bool neighbor_filter(const Point& center, const Point& other, double radius) {
    if (center.size() != other.size())
        throw DomainError("neighbor_filter: dimension mismatch (" + std::to_string(center.size()) + " vs " +
                          std::to_string(other.size()) + ")");
    if (radius < 0.0) throw DomainError("neighbor_filter: radius must be >= 0");
    return (center - other).norm() <= radius;
}

SmoothedSet smooth(const ObservationSet& obs, double radius) {
    if (obs.empty()) throw DomainError("smooth: observation set is empty");
    if (radius < 0.0) throw DomainError("smooth: radius must be >= 0");

    SmoothedSet out{obs.points(), Eigen::VectorXd(static_cast<Eigen::Index>(obs.size()))};
    const Eigen::Index n = out.points.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if ((out.points.row(j) - out.points.row(k)).norm() <= radius) {
                sum += obs[static_cast<std::size_t>(k)].raw_value;
                ++count;
            }
        }
        out.values[j] = sum / count;
    }
    return out;
}

std::size_t neighbor_count(const ObservationSet& obs, const Point& query, double radius) {
    if (radius < 0.0) throw DomainError("neighbor_count: radius must be >= 0");
    std::size_t count = 0;
    for (const auto& t : obs.trials())
        if (neighbor_filter(query, t.point, radius)) ++count;
    return count;
}

const Trial& best_raw(const ObservationSet& obs) {
    if (obs.empty()) throw StateError("best_raw: no trials observed");
    const Trial* best = &obs[0];
    for (const auto& t : obs.trials())
        if (t.raw_value < best->raw_value) best = &t;
    return *best;
}

}  // namespace nrbo
