#ifndef NRBO_SPACE_HPP
#define NRBO_SPACE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nrbo {

// A point in the normalized unit hypercube.
using Point = Eigen::VectorXd;

// A set of points, one per row.
using PointSet = Eigen::MatrixXd;

enum class Scale { linear, log10 };

struct Dimension {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    Scale scale = Scale::linear;
};

inline constexpr std::size_t kDefaultGridCap = 100000;

/// Bounded, named search domain. All optimizer logic runs on the normalized
/// cube [0,1]^d; raw units only appear at the boundary through
/// normalize() / denormalize().
class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<Dimension> dims);

    std::size_t dim() const { return dims_.size(); }
    const std::vector<Dimension>& dims() const { return dims_; }
    const Dimension& operator[](std::size_t i) const { return dims_[i]; }

    Point normalize(const Eigen::VectorXd& raw) const;
    Eigen::VectorXd denormalize(const Point& p) const;

    /// Cartesian grid of points_per_dim equally spaced values per axis
    /// (endpoints included), one point per row, last axis varying fastest.
    /// Throws BudgetError when the grid would exceed cap rows.
    PointSet meshgrid(std::size_t points_per_dim, std::size_t cap = kDefaultGridCap) const;

    /// Number of rows meshgrid() would produce, saturating at SIZE_MAX.
    std::size_t grid_size(std::size_t points_per_dim) const;

    PointSet sample_uniform(std::size_t count, std::uint64_t seed) const;

private:
    std::vector<Dimension> dims_;
};

/// Convenience: the d-dimensional unit cube with axes x0..x{d-1}.
SearchSpace unit_cube(std::size_t d);

}  // namespace nrbo

#endif  // NRBO_SPACE_HPP
