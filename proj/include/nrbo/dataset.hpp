#ifndef NRBO_DATASET_HPP
#define NRBO_DATASET_HPP

#include <cstddef>
#include <vector>

#include "nrbo/space.hpp"

namespace nrbo {

/// One evaluated configuration. Values follow the lower-is-better convention.
struct Trial {
    Point point;
    double raw_value = 0.0;
    int iteration = 0;
};

/// Observed trials in evaluation order.
class ObservationSet {
public:
    ObservationSet() = default;

    void add(Trial t);

    bool empty() const { return trials_.empty(); }
    std::size_t size() const { return trials_.size(); }
    const std::vector<Trial>& trials() const { return trials_; }
    const Trial& operator[](std::size_t i) const { return trials_[i]; }

    /// Points stacked one per row.
    PointSet points() const;
    Eigen::VectorXd values() const;

private:
    std::vector<Trial> trials_;
};

/// Observations after neighbor smoothing; row i corresponds to trial i.
struct SmoothedSet {
    PointSet points;
    Eigen::VectorXd values;
};

/// Ball membership test, inclusive boundary, Euclidean norm.
bool neighbor_filter(const Point& center, const Point& other, double radius);

/// Replaces each observation by the mean of all observations within radius of
/// its point (itself included).
SmoothedSet smooth(const ObservationSet& obs, double radius);

/// Number of stored trials within radius of query.
std::size_t neighbor_count(const ObservationSet& obs, const Point& query, double radius);

/// Trial with the lowest raw value; ties go to the earliest trial.
const Trial& best_raw(const ObservationSet& obs);

}  // namespace nrbo

#endif  // NRBO_DATASET_HPP
