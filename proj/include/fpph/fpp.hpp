#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "fpph/lattice.hpp"
#include "fpph/medium.hpp"
#include "fpph/util.hpp"

namespace fpph {

inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

namespace detail {

// Label-setting shortest paths over the directed edges (u, u+alpha) with
// cost tau(u, alpha), restricted to the l1 box. Ties in the key order are
// broken by lexicographic site order (= linear index order). Sites u with
// !can_move(u) have no outgoing edges; settling stops once the smallest
// label exceeds stop_after.
template <class CanMove>
std::vector<double> shortest_paths(const Environment& env, const Point& source, const Box& box,
                                   double stop_after, CanMove&& can_move) {
    check_box_capacity(box);
    const int d = env.dimension();
    if (static_cast<int>(source.size()) != d || box.dimension() != d)
        throw config_error("source/box dimension mismatch");
    if (!box.contains(source)) throw config_error("source lies outside the box");

    const auto dirs = all_directions(d);
    std::vector<double> dist(static_cast<std::size_t>(box.cube_sites()), kUnreached);
    std::vector<std::uint8_t> settled(dist.size(), 0);

    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

    const std::size_t src_idx = box.index(source);
    dist[src_idx] = 0.0;
    queue.emplace(0.0, static_cast<std::uint32_t>(src_idx));

    std::array<int, kMaxDimension> coords{};
    std::array<int, kMaxDimension> nbr{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    std::span<int> nspan(nbr.data(), static_cast<std::size_t>(d));

    while (!queue.empty()) {
        auto [du, u] = queue.top();
        queue.pop();
        if (settled[u]) continue;
        if (du > stop_after) break;
        settled[u] = 1;
        box.decode(u, cspan);
        if (!can_move(std::span<const int>(cspan))) continue;
        for (const Direction& a : dirs) {
            std::copy(cspan.begin(), cspan.end(), nspan.begin());
            nbr[a.axis] += a.sign;
            if (!box.contains(std::span<const int>(nspan))) continue;
            std::size_t v = box.index(std::span<const int>(nspan));
            if (settled[v]) continue;
            double cand = du + env.weight(std::span<const int>(cspan), a);
            if (cand < dist[v]) {
                dist[v] = cand;
                queue.emplace(cand, static_cast<std::uint32_t>(v));
            }
        }
    }
    return dist;
}

}  // namespace detail

// First-passage times from `source` over a box; values at sites the box
// cuts off from every path stay at kUnreached.
class PassageTimeField {
  public:
    PassageTimeField(Point source, Box box, std::vector<double> values)
        : source_(std::move(source)), box_(std::move(box)), values_(std::move(values)) {}

    const Point& source() const { return source_; }
    const Box& box() const { return box_; }

    double at(std::span<const int> y) const {
        if (!box_.contains(y)) throw config_error("site outside the passage-time box");
        return values_[box_.index(y)];
    }
    double at(const Point& y) const { return at(std::span<const int>(y)); }

    std::optional<double> try_at(std::span<const int> y) const {
        if (!box_.contains(y)) return std::nullopt;
        double v = values_[box_.index(y)];
        if (v == kUnreached) return std::nullopt;
        return v;
    }

    // Visits box sites in lexicographic order as (coords, value).
    template <class Fn>
    void for_each(Fn&& fn) const {
        const int d = box_.dimension();
        std::array<int, kMaxDimension> coords{};
        std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < values_.size(); ++i) {
            box_.decode(i, cspan);
            if (!box_.contains(std::span<const int>(cspan))) continue;
            fn(std::span<const int>(cspan), values_[i]);
        }
    }

  private:
    Point source_;
    Box box_;
    std::vector<double> values_;
};

inline PassageTimeField passage_times(const Environment& env, const Point& source, const Box& box) {
    if (box.radius() < 1) throw config_error("passage_times needs box radius >= 1");
    auto dist = detail::shortest_paths(env, source, box, std::numeric_limits<double>::infinity(),
                                       [](std::span<const int>) { return true; });
    return PassageTimeField(source, box, std::move(dist));
}

// Box radius beyond which truncation cannot change T(0, target): any path
// leaving radius r costs at least a*r, while the straight path costs at
// most b*|target|_1, so r = ceil((b/a)*|target|_1) + 1 suffices.
inline int safe_radius(std::span<const int> target, WeightBounds wb) {
    long long l1 = l1_norm(target);
    double r = std::ceil((wb.b / wb.a) * static_cast<double>(l1));
    return static_cast<int>(r) + 1;
}
inline int safe_radius(const Point& target, WeightBounds wb) {
    return safe_radius(std::span<const int>(target), wb);
}

// R(x, t): sites with passage time from the source at most t, listed in
// lexicographic order.
struct ReachableSet {
    Point source;
    double t = 0;
    std::vector<Point> members;

    bool contains(std::span<const int> y) const {
        for (const Point& m : members)
            if (std::equal(m.begin(), m.end(), y.begin(), y.end())) return true;
        return false;
    }
};

inline ReachableSet reachable_set(const Environment& env, const Point& source, double t,
                                  const Box& box) {
    if (t < 0) throw config_error("reachable_set needs t >= 0");
    const double a = env.bounds().a;
    int needed = static_cast<int>(std::ceil(t / a)) + 1;
    if (box.radius() < needed)
        throw config_error("box too small for reachable_set: radius " +
                           std::to_string(box.radius()) + " < " + std::to_string(needed));
    auto dist = detail::shortest_paths(env, source, box, t,
                                       [](std::span<const int>) { return true; });
    ReachableSet out{source, t, {}};
    const int d = env.dimension();
    std::array<int, kMaxDimension> coords{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= t) {
            box.decode(i, cspan);
            out.members.emplace_back(cspan.begin(), cspan.end());
        }
    }
    return out;
}

struct TimeConstantEstimate {
    std::vector<double> direction;  // as supplied
    Point target;                   // [n x]
    long long n = 0;
    double value = 0;      // mean over replicas of T(0, [nx]) / n
    double stderr_ = 0;    // sample standard deviation / sqrt(replicas)
    std::vector<double> samples;
};

// Estimates m(x) for several directions at once: one shortest-path sweep
// per replica covers every target, with replica seeds derived from the
// environment seed.
inline std::vector<TimeConstantEstimate> time_constants(
    const Environment& env, const std::vector<std::vector<double>>& directions, long long n,
    int replicas) {
    if (n < 1 || replicas < 1) throw config_error("time_constant needs n >= 1, replicas >= 1");
    if (directions.empty()) throw config_error("time_constant needs at least one direction");
    const int d = env.dimension();
    std::vector<TimeConstantEstimate> out(directions.size());
    int radius = 1;
    for (std::size_t i = 0; i < directions.size(); ++i) {
        if (static_cast<int>(directions[i].size()) != d)
            throw config_error("direction dimension mismatch");
        std::vector<double> scaled(directions[i]);
        for (double& v : scaled) v *= static_cast<double>(n);
        out[i].direction = directions[i];
        out[i].target = nearest_lattice_point(scaled);
        out[i].n = n;
        out[i].samples.assign(static_cast<std::size_t>(replicas), 0.0);
        radius = std::max(radius, safe_radius(out[i].target, env.bounds()));
    }
    const Point origin(static_cast<std::size_t>(d), 0);
    const Box box(origin, radius);
    check_box_capacity(box);

    parallel_for_index(replicas, [&](int r) {
        Environment rep = env.replica(r);
        PassageTimeField field = passage_times(rep, origin, box);
        for (auto& est : out)
            est.samples[static_cast<std::size_t>(r)] = field.at(est.target) / static_cast<double>(n);
    });
    for (auto& est : out) {
        auto ms = mean_stderr(est.samples);
        est.value = ms.mean;
        est.stderr_ = ms.stderr_;
    }
    return out;
}

inline TimeConstantEstimate time_constant(const Environment& env, const std::vector<double>& x,
                                          long long n, int replicas) {
    return time_constants(env, {x}, n, replicas).front();
}

}  // namespace fpph
