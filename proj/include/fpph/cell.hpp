#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fpph/fpp.hpp"
#include "fpph/lattice.hpp"
#include "fpph/medium.hpp"
#include "fpph/rng.hpp"

namespace fpph::cell {

// Terminal cost phi with its declared discrete (l1) Lipschitz constant.
struct TerminalCost {
    std::function<double(std::span<const int>)> phi;
    double lip = 0;

    double operator()(std::span<const int> x) const { return phi(x); }
};

inline TerminalCost zero_terminal() {
    return {[](std::span<const int>) { return 0.0; }, 0.0};
}

// Finite time-horizon value
//
//   mu(x, t) = min over paths from x { sum of p.alpha over traversed edges
//                                      + phi(endpoint) : total edge time <= t }.
//
// Convention: the running cost accumulates over the k traversed edges
// (steps 0..k-1) and the terminal cost applies at the stopping site; a
// path may stop at any site it has reached within budget t. Since the
// running cost telescopes to p.(endpoint - x), the value reduces to
//
//   mu(x, t) = min over y in R(x, t) of [ p.(y - x) + phi(y) ].
inline double mu(const Environment& env, const std::vector<double>& p, const Point& x, double t,
                 const TerminalCost& phi) {
    if (t < 0) throw config_error("mu needs t >= 0");
    const int d = env.dimension();
    if (static_cast<int>(p.size()) != d || static_cast<int>(x.size()) != d)
        throw config_error("mu: p/x dimension mismatch");
    const double a = env.bounds().a;
    int radius = static_cast<int>(std::ceil(t / a)) + 1;
    Box box(x, std::max(radius, 1));
    auto dist = detail::shortest_paths(env, x, box, t, [](std::span<const int>) { return true; });

    double best = std::numeric_limits<double>::infinity();
    std::array<int, kMaxDimension> coords{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] > t) continue;
        box.decode(i, cspan);
        double val = phi(std::span<const int>(cspan));
        for (int k = 0; k < d; ++k) val += p[static_cast<std::size_t>(k)] * (coords[k] - x[k]);
        best = std::min(best, val);
    }
    return best;
}

// Truncated variant: paths move freely inside Z_K = B_K(0) (Euclidean ball
// about the origin) and freeze once they leave it; a start outside Z_K
// cannot move at all. mu <= mu_K, with equality once K covers every site
// reachable within t.
inline double mu_truncated(const Environment& env, const std::vector<double>& p, const Point& x,
                           double t, const TerminalCost& phi, double K) {
    if (t < 0) throw config_error("mu_truncated needs t >= 0");
    const int d = env.dimension();
    const double a = env.bounds().a;
    const double K2 = K * K;
    auto inside = [K2](std::span<const int> y) {
        double s = 0;
        for (int v : y) s += static_cast<double>(v) * v;
        return s <= K2;
    };
    int radius = static_cast<int>(std::ceil(t / a)) + 1;
    Box box(x, std::max(radius, 1));
    auto dist = detail::shortest_paths(env, x, box, t, inside);

    double best = std::numeric_limits<double>::infinity();
    std::array<int, kMaxDimension> coords{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] > t) continue;
        box.decode(i, cspan);
        double val = phi(std::span<const int>(cspan));
        for (int k = 0; k < d; ++k) val += p[static_cast<std::size_t>(k)] * (coords[k] - x[k]);
        best = std::min(best, val);
    }
    return best;
}

// Discounted stationary value on a finite box.
//
// The interior satisfies the fixed-point relation
//   nu(x) = min_alpha [ p.alpha + exp(-eps tau(x,alpha)) nu(x+alpha) ],
// boundary sites are clamped at the midpoint of the analytic envelope
//   -|p|_inf / (1 - e^{-eps a})  <=  nu  <=  -|p|_inf / (1 - e^{-eps b}),
// and the boundary influence decays by a factor exp(-eps a) per l1 step.
// Sites with |x|_1 <= core_radius sit at depth >= R(eps, tol) from the
// boundary and are accurate to tol. (The classical envelope uses 1/(eps a)
// and 1/(eps b); the discrete geometric sums above are the sharp version
// and keep the clamp error proportional to the envelope width even when
// a = b, where the classical interval collapses to a point the true value
// does not attain.)
struct StationaryValue {
    double eps = 0;
    std::vector<double> p;
    Box box;
    int core_radius = 0;
    double tol = 0;
    std::vector<double> values;  // cube-indexed; quiet NaN outside the l1 ball
    double fixed_point_error = 0;  // final sweep delta / (1 - exp(-eps a))
    long iterations = 0;

    double at(std::span<const int> x) const {
        if (!box.contains(x)) throw config_error("site outside the stationary-value box");
        return values[box.index(x)];
    }
    double at(const Point& x) const { return at(std::span<const int>(x)); }
    double at_origin() const { return at(box.center()); }

    bool in_core(std::span<const int> x) const { return box.center_distance(x) <= core_radius; }

    // Visits core sites in lexicographic order as (coords, value).
    template <class Fn>
    void for_each_core(Fn&& fn) const {
        const int d = box.dimension();
        std::array<int, kMaxDimension> coords{};
        std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < values.size(); ++i) {
            box.decode(i, cspan);
            if (box.center_distance(std::span<const int>(cspan)) > core_radius) continue;
            fn(std::span<const int>(cspan), values[i]);
        }
    }
};

inline double nu_sharp_lower(double eps, double pinf, WeightBounds wb) {
    return -pinf / (1.0 - std::exp(-eps * wb.a));
}
inline double nu_sharp_upper(double eps, double pinf, WeightBounds wb) {
    return -pinf / (1.0 - std::exp(-eps * wb.b));
}

// Box radius granting accuracy tol at depth 0: the boundary clamp misses
// the true value by at most half the envelope width, and the error shrinks
// by exp(-eps a) per step inward.
inline int nu_box_radius(double eps, double tol, double pinf, WeightBounds wb) {
    double range = 0.5 * (nu_sharp_upper(eps, pinf, wb) - nu_sharp_lower(eps, pinf, wb));
    if (!(range > tol)) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(range / tol) / (eps * wb.a))));
}

inline StationaryValue nu(const Environment& env, const std::vector<double>& p, double eps,
                          double tol, int core_radius = 0) {
    if (!(eps > 0)) throw config_error("nu needs eps > 0");
    if (!(tol > 0)) throw config_error("nu needs tol > 0");
    const int d = env.dimension();
    if (static_cast<int>(p.size()) != d) throw config_error("nu: p dimension mismatch");
    const WeightBounds wb = env.bounds();
    const double pinf = linf_norm(p);
    const Point origin(static_cast<std::size_t>(d), 0);

    const int radius = nu_box_radius(eps, tol, pinf, wb) + std::max(core_radius, 0);
    Box box(origin, radius);
    check_box_capacity(box);

    StationaryValue out{eps, p, box, std::max(core_radius, 0), tol, {}, 0.0, 0};
    out.values.assign(static_cast<std::size_t>(box.cube_sites()),
                      std::numeric_limits<double>::quiet_NaN());
    if (pinf == 0) {
        for (double& v : out.values) v = 0.0;
        return out;
    }

    const double init = -pinf / (eps * wb.b);  // above the envelope; sweeps descend
    const double clamp = 0.5 * (nu_sharp_lower(eps, pinf, wb) + nu_sharp_upper(eps, pinf, wb));
    const auto dirs = all_directions(d);
    const double contraction_gap = 1.0 - std::exp(-eps * wb.a);
    const double stop_delta = tol * contraction_gap;

    // Enumerate l1-ball sites once; cache p.alpha and the per-edge
    // discounts so sweeps touch no hash or exp.
    std::vector<std::uint32_t> interior;   // |x|_1 <= radius-1
    std::array<int, kMaxDimension> coords{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        box.decode(i, cspan);
        long long l1 = box.center_distance(std::span<const int>(cspan));
        if (l1 > radius) continue;
        if (l1 == radius) {
            out.values[i] = clamp;
        } else {
            out.values[i] = init;
            interior.push_back(static_cast<std::uint32_t>(i));
        }
    }
    if (interior.size() * dirs.size() > (std::size_t{1} << 25))
        throw config_error("nu: discount table too large; increase tol or eps");

    const std::size_t ndirs = dirs.size();
    std::vector<double> run_cost(ndirs);
    for (std::size_t k = 0; k < ndirs; ++k) run_cost[k] = dot(p, dirs[k]);
    std::vector<long long> step(ndirs);
    {
        Point unit(static_cast<std::size_t>(d), 0);
        const long long c0 = static_cast<long long>(box.index(origin));
        for (std::size_t k = 0; k < ndirs; ++k) {
            unit.assign(static_cast<std::size_t>(d), 0);
            unit[static_cast<std::size_t>(dirs[k].axis)] = dirs[k].sign;
            step[k] = static_cast<long long>(box.index(unit)) - c0;
        }
    }
    std::vector<double> discount(interior.size() * ndirs);
    for (std::size_t j = 0; j < interior.size(); ++j) {
        box.decode(interior[j], cspan);
        for (std::size_t k = 0; k < ndirs; ++k)
            discount[j * ndirs + k] =
                std::exp(-eps * env.weight(std::span<const int>(cspan), dirs[k]));
    }

    // Gauss-Seidel value iteration, alternating forward/backward sweeps
    // over the lexicographic site order.
    constexpr long kMaxSweeps = 1000000;
    long sweep = 0;
    double delta = std::numeric_limits<double>::infinity();
    while (delta >= stop_delta) {
        if (++sweep > kMaxSweeps)
            throw numeric_error("nu: value iteration failed to converge (configuration error?)");
        delta = 0;
        const bool forward = (sweep % 2) == 1;
        for (std::size_t jj = 0; jj < interior.size(); ++jj) {
            std::size_t j = forward ? jj : interior.size() - 1 - jj;
            const std::size_t i = interior[j];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < ndirs; ++k) {
                double cand = run_cost[k] +
                              discount[j * ndirs + k] *
                                  out.values[static_cast<std::size_t>(
                                      static_cast<long long>(i) + step[k])];
                if (cand < best) best = cand;
            }
            delta = std::max(delta, std::abs(best - out.values[i]));
            out.values[i] = best;
        }
    }
    out.iterations = sweep;
    out.fixed_point_error = delta / contraction_gap;
    return out;
}

// Max over core sites of |eps nu(x) + H(nu, p, x)| for the discrete
// Hamiltonian H; residual/eps is the empirical constant of the
// approximate-HJB property.
struct HjbResidual {
    double residual = 0;
    double residual_over_eps = 0;
    int sites = 0;
};

inline HjbResidual hjb_residual(const StationaryValue& sv, const Environment& env,
                                const std::vector<double>& p) {
    const int d = env.dimension();
    const auto dirs = all_directions(d);
    HjbResidual out;
    std::array<int, kMaxDimension> nbr{};
    sv.for_each_core([&](std::span<const int> x, double vx) {
        double ham = -std::numeric_limits<double>::infinity();
        for (const Direction& a : dirs) {
            std::copy(x.begin(), x.end(), nbr.begin());
            nbr[a.axis] += a.sign;
            std::span<const int> nspan(nbr.data(), x.size());
            double dv = sv.at(nspan) - vx;
            ham = std::max(ham, (-dv - dot(p, a)) / env.weight(x, a));
        }
        out.residual = std::max(out.residual, std::abs(sv.eps * vx + ham));
        ++out.sites;
    });
    out.residual_over_eps = out.residual / sv.eps;
    return out;
}

// Two-sided comparison check for the finite-horizon value:
//
//   phi(x) - t sup_x H(phi,p,x)  <=  mu(x,t)
//   mu(x,t)  <=  phi(x) - max(0, t - b) inf_x H(phi,p,x).
//
// The upper side carries a one-edge lag: mu is piecewise constant in t and
// only drops when the reachable set grows, so it can sit at phi(x) until
// the first edge (time up to b) is affordable; the continuum-style bound
// without the lag fails there (constant medium, t < c, phi = 0).
//
// The extrema are taken over phi_box. When phi is constant outside the box
// the tail of the sup is bounded by |p|_inf / a and the tail of the inf by
// |p|_inf / b, and folding those closures in keeps both checks implied by
// the exact statements.
struct ComparisonReport {
    int samples = 0;
    int violations = 0;
    double sup_h_box = 0, inf_h_box = 0;
    double sup_h_used = 0, inf_h_used = 0;
    double worst_lower_margin = std::numeric_limits<double>::infinity();
    double worst_upper_margin = std::numeric_limits<double>::infinity();
    std::vector<std::string> details;  // first few violations
};

inline ComparisonReport check_comparison(const Environment& env, const std::vector<double>& p,
                                         const TerminalCost& phi, int samples, const Box& phi_box,
                                         bool phi_constant_outside, std::uint64_t probe_seed,
                                         int x_range, double t_max, double tol = 1e-9) {
    if (!(phi.lip < std::numeric_limits<double>::infinity()))
        throw config_error("check_comparison needs a finite Lipschitz constant");
    const int d = env.dimension();
    const auto dirs = all_directions(d);
    const WeightBounds wb = env.bounds();
    const double pinf = linf_norm(p);

    ComparisonReport rep;
    rep.sup_h_box = -std::numeric_limits<double>::infinity();
    rep.inf_h_box = std::numeric_limits<double>::infinity();
    std::array<int, kMaxDimension> coords{};
    std::array<int, kMaxDimension> nbr{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < static_cast<std::size_t>(phi_box.cube_sites()); ++i) {
        phi_box.decode(i, cspan);
        if (!phi_box.contains(std::span<const int>(cspan))) continue;
        double px = phi(std::span<const int>(cspan));
        double ham = -std::numeric_limits<double>::infinity();
        for (const Direction& a : dirs) {
            std::copy(cspan.begin(), cspan.end(), nbr.begin());
            nbr[a.axis] += a.sign;
            std::span<const int> nspan(nbr.data(), static_cast<std::size_t>(d));
            double dphi = phi(nspan) - px;
            ham = std::max(ham, (-dphi - dot(p, a)) / env.weight(std::span<const int>(cspan), a));
        }
        rep.sup_h_box = std::max(rep.sup_h_box, ham);
        rep.inf_h_box = std::min(rep.inf_h_box, ham);
    }
    rep.sup_h_used = phi_constant_outside ? std::max(rep.sup_h_box, pinf / wb.a) : rep.sup_h_box;
    rep.inf_h_used = phi_constant_outside ? std::min(rep.inf_h_box, pinf / wb.b) : rep.inf_h_box;

    rep.samples = samples;
    for (int s = 0; s < samples; ++s) {
        Point x(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            double u = KeyHash(probe_seed, Stream::Probe).word(s).word(k).u01();
            x[static_cast<std::size_t>(k)] =
                static_cast<int>(std::floor(u * (2 * x_range + 1))) - x_range;
        }
        double t = KeyHash(probe_seed, Stream::Probe).word(s).word(d).u01() * t_max;
        double m = mu(env, p, x, t, phi);
        double px = phi(x);
        double lower = px - t * rep.sup_h_used;
        double upper = px - std::max(0.0, t - wb.b) * rep.inf_h_used;
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, m - lower);
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, upper - m);
        if (m < lower - tol || m > upper + tol) {
            ++rep.violations;
            if (rep.details.size() < 5) {
                std::ostringstream os;
                os << "sample " << s << ": mu=" << m << " outside [" << lower << ", " << upper
                   << "] at t=" << t;
                rep.details.push_back(os.str());
            }
        }
    }
    return rep;
}

}  // namespace fpph::cell
