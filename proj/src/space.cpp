#include "nrbo/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "nrbo/errors.hpp"

namespace nrbo {

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    std::set<std::string> seen;
    for (const auto& d : dims_) {
        if (d.name.empty()) throw DomainError("dimension name must not be empty");
        if (!seen.insert(d.name).second) throw DomainError("duplicate dimension name '" + d.name + "'");
        if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper))
            throw DomainError("dimension '" + d.name + "' requires finite lower < upper");
        if (d.scale == Scale::log10 && !(d.lower > 0.0))
            throw DomainError("log10 dimension '" + d.name + "' requires lower > 0");
    }
}

Point SearchSpace::normalize(const Eigen::VectorXd& raw) const {
    if (static_cast<std::size_t>(raw.size()) != dim())
        throw DomainError("raw vector has length " + std::to_string(raw.size()) + ", expected " +
                          std::to_string(dim()));
    Point p(raw.size());
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& d = dims_[i];
        const double v = raw[static_cast<Eigen::Index>(i)];
        if (!(v >= d.lower && v <= d.upper))
            throw DomainError("value " + std::to_string(v) + " outside [" + std::to_string(d.lower) + ", " +
                              std::to_string(d.upper) + "] for dimension '" + d.name + "'");
        double t = 0.0;
        if (d.scale == Scale::linear) {
            t = (v - d.lower) / (d.upper - d.lower);
        } else {
            const double lo = std::log10(d.lower);
            t = (std::log10(v) - lo) / (std::log10(d.upper) - lo);
        }
        p[static_cast<Eigen::Index>(i)] = std::clamp(t, 0.0, 1.0);
    }
    return p;
}

Eigen::VectorXd SearchSpace::denormalize(const Point& p) const {
    if (static_cast<std::size_t>(p.size()) != dim())
        throw DomainError("point has length " + std::to_string(p.size()) + ", expected " + std::to_string(dim()));
    Eigen::VectorXd raw(p.size());
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& d = dims_[i];
        const double t = p[static_cast<Eigen::Index>(i)];
        double v = 0.0;
        if (d.scale == Scale::linear) {
            v = d.lower + t * (d.upper - d.lower);
        } else {
            const double lo = std::log10(d.lower);
            v = std::pow(10.0, lo + t * (std::log10(d.upper) - lo));
        }
        raw[static_cast<Eigen::Index>(i)] = std::clamp(v, d.lower, d.upper);
    }
    return raw;
}

std::size_t SearchSpace::grid_size(std::size_t points_per_dim) const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (total > std::numeric_limits<std::size_t>::max() / points_per_dim)
            return std::numeric_limits<std::size_t>::max();
        total *= points_per_dim;
    }
    return total;
}

PointSet SearchSpace::meshgrid(std::size_t points_per_dim, std::size_t cap) const {
    if (points_per_dim < 2) throw DomainError("meshgrid needs at least 2 points per dimension");
    const std::size_t total = grid_size(points_per_dim);
    if (total > cap)
        throw BudgetError("meshgrid of " + std::to_string(points_per_dim) + "^" + std::to_string(dim()) +
                          " points exceeds cap " + std::to_string(cap) + "; use random candidates instead");

    const auto d = static_cast<Eigen::Index>(dim());
    const auto k = static_cast<Eigen::Index>(points_per_dim);
    PointSet grid(static_cast<Eigen::Index>(total), d);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d), 0);
    for (Eigen::Index row = 0; row < grid.rows(); ++row) {
        for (Eigen::Index j = 0; j < d; ++j)
            grid(row, j) = static_cast<double>(idx[static_cast<std::size_t>(j)]) / static_cast<double>(k - 1);
        // odometer increment, last axis fastest
        for (Eigen::Index j = d - 1; j >= 0; --j) {
            auto& c = idx[static_cast<std::size_t>(j)];
            if (++c < k) break;
            c = 0;
        }
    }
    return grid;
}

PointSet SearchSpace::sample_uniform(std::size_t count, std::uint64_t seed) const {
    if (count == 0) throw DomainError("sample_uniform requires count >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PointSet out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim()));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = unif(rng);
    return out;
}

SearchSpace unit_cube(std::size_t d) {
    std::vector<Dimension> dims;
    dims.reserve(d);
    for (std::size_t i = 0; i < d; ++i) dims.push_back({"x" + std::to_string(i), 0.0, 1.0, Scale::linear});
    return SearchSpace(std::move(dims));
}

}  // namespace nrbo
