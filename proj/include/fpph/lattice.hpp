#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpph/errors.hpp"

namespace fpph {

using Point = std::vector<int>;

// One of the 2d control directions {±e_1, ..., ±e_d}.
struct Direction {
    int axis = 0;
    int sign = 1;
};

// Enumerates +e_1..+e_d then -e_1..-e_d. This order is the deterministic
// tie-break order wherever a minimum over directions is taken.
inline std::vector<Direction> all_directions(int d) {
    std::vector<Direction> dirs;
    dirs.reserve(2 * static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) dirs.push_back({k, +1});
    for (int k = 0; k < d; ++k) dirs.push_back({k, -1});
    return dirs;
}

inline long long l1_norm(std::span<const int> x) {
    long long s = 0;
    for (int v : x) s += std::abs(static_cast<long long>(v));
    return s;
}

inline double l1_norm(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += std::abs(v);
    return s;
}

inline double linf_norm(std::span<const double> x) {
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double dot(std::span<const double> p, std::span<const int> x) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * x[i];
    return s;
}

inline double dot(std::span<const double> p, std::span<const double> x) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * x[i];
    return s;
}

// p·alpha for a unit direction.
inline double dot(std::span<const double> p, Direction a) { return a.sign * p[a.axis]; }

// Nearest lattice point to v, halves rounded toward the smaller coordinate.
inline Point nearest_lattice_point(std::span<const double> v) {
    Point out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double lo = std::floor(v[i]);
        double frac = v[i] - lo;
        out[i] = static_cast<int>(lo) + (frac > 0.5 ? 1 : 0);
    }
    return out;
}

// Finite l1 ball around `center`. Storage maps the bounding cube
// [-radius, radius]^d to linear indices, row-major with axis 0 slowest,
// so increasing index equals lexicographic order of coordinates.
class Box {
  public:
    Box(Point center, int radius) : center_(std::move(center)), radius_(radius) {
        if (radius_ < 0) throw config_error("box radius must be nonnegative");
        side_ = 2LL * radius_ + 1;
        strides_.assign(center_.size(), 1);
        constexpr long long kSiteCap = 1LL << 50;
        for (int k = static_cast<int>(center_.size()) - 2; k >= 0; --k) {
            if (strides_[k + 1] > kSiteCap / side_)
                throw config_error("box dimensions overflow the site index space");
            strides_[k] = strides_[k + 1] * side_;
        }
        if (!strides_.empty() && strides_[0] > kSiteCap / side_)
            throw config_error("box dimensions overflow the site index space");
        cube_sites_ = strides_.empty() ? 1 : strides_[0] * side_;
    }

    int dimension() const { return static_cast<int>(center_.size()); }
    int radius() const { return radius_; }
    const Point& center() const { return center_; }
    long long side() const { return side_; }
    long long cube_sites() const { return cube_sites_; }

    bool contains(std::span<const int> y) const {
        long long s = 0;
        for (std::size_t k = 0; k < center_.size(); ++k)
            s += std::abs(static_cast<long long>(y[k]) - center_[k]);
        return s <= radius_;
    }

    bool in_cube(std::span<const int> y) const {
        for (std::size_t k = 0; k < center_.size(); ++k)
            if (std::abs(static_cast<long long>(y[k]) - center_[k]) > radius_) return false;
        return true;
    }

    std::size_t index(std::span<const int> y) const {
        long long idx = 0;
        for (std::size_t k = 0; k < center_.size(); ++k)
            idx += (static_cast<long long>(y[k]) - center_[k] + radius_) * strides_[k];
        return static_cast<std::size_t>(idx);
    }

    void decode(std::size_t idx, std::span<int> out) const {
        auto rem = static_cast<long long>(idx);
        for (std::size_t k = 0; k < center_.size(); ++k) {
            out[k] = static_cast<int>(rem / strides_[k]) - radius_ + center_[k];
            rem %= strides_[k];
        }
    }

    // l1 distance from the box center.
    long long center_distance(std::span<const int> y) const {
        long long s = 0;
        for (std::size_t k = 0; k < center_.size(); ++k)
            s += std::abs(static_cast<long long>(y[k]) - center_[k]);
        return s;
    }

  private:
    Point center_;
    int radius_;
    long long side_ = 1;
    long long cube_sites_ = 1;
    std::vector<long long> strides_;
};

// Memory budget for dense box computations, in cube sites.
inline long long& box_site_budget() {
    static long long budget = 1LL << 25;
    return budget;
}

inline void check_box_capacity(const Box& box) {
    if (box.cube_sites() > box_site_budget())
        throw config_error("box exceeds the configured site budget (" +
                           std::to_string(box.cube_sites()) + " > " +
                           std::to_string(box_site_budget()) + ")");
}

}  // namespace fpph
