#pragma once

// Brute-force reference computations. Everything here recomputes a library
// quantity by a different route (iterative relaxation, exhaustive control
// enumeration, exact policy enumeration) so the two paths check each other.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "fpph/cell.hpp"
#include "fpph/lattice.hpp"
#include "fpph/medium.hpp"

namespace fpph::oracles {

// Exhaustive dynamic program over path length: after k rounds, dist holds
// the cheapest cost over all paths of at most k edges. Rounds continue to
// a fixed point, so the result covers every (necessarily simple) optimal
// path in the box.
inline std::vector<double> bellman_ford_times(const Environment& env, const Point& source,
                                              const Box& box) {
    check_box_capacity(box);
    const int d = env.dimension();
    const auto dirs = all_directions(d);
    std::vector<double> dist(static_cast<std::size_t>(box.cube_sites()), kUnreached);
    dist[box.index(source)] = 0;
    std::array<int, kMaxDimension> coords{};
    std::array<int, kMaxDimension> nbr{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist[i] == kUnreached) continue;
            box.decode(i, cspan);
            if (!box.contains(std::span<const int>(cspan))) continue;
            for (const Direction& a : dirs) {
                std::copy(cspan.begin(), cspan.end(), nbr.begin());
                nbr[a.axis] += a.sign;
                std::span<const int> nspan(nbr.data(), static_cast<std::size_t>(d));
                if (!box.contains(nspan)) continue;
                double cand = dist[i] + env.weight(std::span<const int>(cspan), a);
                std::size_t v = box.index(nspan);
                if (cand < dist[v] - 1e-15 * std::max(1.0, std::abs(cand))) {
                    dist[v] = cand;
                    changed = true;
                }
            }
        }
    }
    return dist;
}

// Depth-first enumeration of every control sequence from x with total edge
// time <= t, recording the best terminal payoff p.(y-x) + phi(y) over all
// stopping sites. Exponential; only for small t.
namespace detail {
inline void enumerate_controls(const Environment& env, std::span<const double> p,
                               const cell::TerminalCost& phi, std::vector<int>& y,
                               const Point& x, double time_left, double& best,
                               std::map<Point, double>* reached) {
    double val = phi(std::span<const int>(y));
    for (std::size_t k = 0; k < p.size(); ++k) val += p[k] * (y[k] - x[k]);
    best = std::min(best, val);
    if (reached) {
        Point key(y.begin(), y.end());
        auto it = reached->find(key);
        if (it == reached->end() || it->second < time_left) (*reached)[key] = time_left;
    }
    const auto dirs = all_directions(env.dimension());
    for (const Direction& a : dirs) {
        double w = env.weight(std::span<const int>(y), a);
        if (w > time_left) continue;
        y[static_cast<std::size_t>(a.axis)] += a.sign;
        enumerate_controls(env, p, phi, y, x, time_left - w, best, reached);
        y[static_cast<std::size_t>(a.axis)] -= a.sign;
    }
}
}  // namespace detail

inline double mu_control_enumeration(const Environment& env, const std::vector<double>& p,
                                     const Point& x, double t, const cell::TerminalCost& phi) {
    std::vector<int> y(x.begin(), x.end());
    double best = std::numeric_limits<double>::infinity();
    detail::enumerate_controls(env, p, phi, y, x, t, best, nullptr);
    return best;
}

inline std::vector<Point> reachable_enumeration(const Environment& env, const Point& x, double t) {
    std::vector<int> y(x.begin(), x.end());
    double best = std::numeric_limits<double>::infinity();
    std::map<Point, double> reached;
    std::vector<double> p(x.size(), 0.0);
    detail::enumerate_controls(env, p, cell::zero_terminal(), y, x, t, best, &reached);
    std::vector<Point> out;
    out.reserve(reached.size());
    for (const auto& [site, budget] : reached) out.push_back(site);
    return out;
}

// Exact discounted value on the quotient of a periodic medium: enumerate
// every stationary policy (a direction per period cell), evaluate each by
// a dense linear solve, and take the pointwise minimum.
inline std::map<Point, double> nu_periodic_quotient(const Environment& env,
                                                    const std::vector<double>& p, double eps) {
    if (env.spec().kind != MediumKind::Periodic)
        throw config_error("nu_periodic_quotient needs a periodic medium");
    const int d = env.dimension();
    const int period = env.spec().period;
    const auto dirs = all_directions(d);
    const std::size_t ndirs = dirs.size();

    std::vector<Point> cells;
    {
        Point v(static_cast<std::size_t>(d), 0);
        while (true) {
            cells.push_back(v);
            int k = d - 1;
            while (k >= 0 && v[static_cast<std::size_t>(k)] == period - 1) {
                v[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
            ++v[static_cast<std::size_t>(k)];
        }
    }
    const std::size_t ns = cells.size();
    if (std::pow(static_cast<double>(ndirs), static_cast<double>(ns)) > 2e6)
        throw config_error("nu_periodic_quotient: quotient too large for policy enumeration");

    auto cell_index = [&](std::span<const int> y) {
        std::size_t idx = 0;
        for (int k = 0; k < d; ++k) {
            int m = y[static_cast<std::size_t>(k)] % period;
            if (m < 0) m += period;
            idx = idx * static_cast<std::size_t>(period) + static_cast<std::size_t>(m);
        }
        return idx;
    };

    // Per-cell, per-direction cost and discount, and the successor cell.
    std::vector<double> run_cost(ns * ndirs), disc(ns * ndirs);
    std::vector<std::size_t> succ(ns * ndirs);
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t k = 0; k < ndirs; ++k) {
            const Direction a = dirs[k];
            run_cost[s * ndirs + k] = dot(p, a);
            double tau = env.weight(cells[s], a);
            disc[s * ndirs + k] = std::exp(-eps * tau);
            Point y = cells[s];
            y[static_cast<std::size_t>(a.axis)] += a.sign;
            succ[s * ndirs + k] = cell_index(y);
        }
    }

    auto evaluate_policy = [&](const std::vector<std::size_t>& pol) {
        // Solve (I - D P) v = c by Gaussian elimination with partial pivoting.
        std::vector<double> A(ns * ns, 0.0);
        std::vector<double> rhs(ns, 0.0);
        for (std::size_t s = 0; s < ns; ++s) {
            A[s * ns + s] += 1.0;
            A[s * ns + succ[s * ndirs + pol[s]]] -= disc[s * ndirs + pol[s]];
            rhs[s] = run_cost[s * ndirs + pol[s]];
        }
        for (std::size_t col = 0; col < ns; ++col) {
            std::size_t piv = col;
            for (std::size_t rr = col + 1; rr < ns; ++rr)
                if (std::abs(A[rr * ns + col]) > std::abs(A[piv * ns + col])) piv = rr;
            if (piv != col) {
                for (std::size_t cc = 0; cc < ns; ++cc) std::swap(A[col * ns + cc], A[piv * ns + cc]);
                std::swap(rhs[col], rhs[piv]);
            }
            for (std::size_t rr = col + 1; rr < ns; ++rr) {
                double m = A[rr * ns + col] / A[col * ns + col];
                if (m == 0) continue;
                for (std::size_t cc = col; cc < ns; ++cc) A[rr * ns + cc] -= m * A[col * ns + cc];
                rhs[rr] -= m * rhs[col];
            }
        }
        std::vector<double> v(ns, 0.0);
        for (std::size_t rr = ns; rr-- > 0;) {
            double s = rhs[rr];
            for (std::size_t cc = rr + 1; cc < ns; ++cc) s -= A[rr * ns + cc] * v[cc];
            v[rr] = s / A[rr * ns + rr];
        }
        return v;
    };

    std::vector<double> best(ns, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> pol(ns, 0);
    while (true) {
        auto v = evaluate_policy(pol);
        for (std::size_t s = 0; s < ns; ++s) best[s] = std::min(best[s], v[s]);
        std::size_t k = 0;
        while (k < ns && pol[k] == ndirs - 1) pol[k++] = 0;
        if (k == ns) break;
        ++pol[k];
    }

    std::map<Point, double> out;
    for (std::size_t s = 0; s < ns; ++s) out[cells[s]] = best[s];
    return out;
}

}  // namespace fpph::oracles
