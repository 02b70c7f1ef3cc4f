#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fpph/cell.hpp"
#include "fpph/fpp.hpp"
#include "fpph/lattice.hpp"
#include "fpph/medium.hpp"
#include "fpph/util.hpp"

namespace fpph::varform {

// Candidate phi for the variational formula; the mean-zero-gradient flag
// is caller-asserted metadata, not something the library can verify.
struct GradientCandidate {
    std::function<double(std::span<const int>)> phi;
    bool mean_zero_gradient = false;

    double operator()(std::span<const int> x) const { return phi(x); }
};

// H(phi, p, x) = max over directions of (-Dphi(x,alpha) - p.alpha) / tau(x,alpha).
inline double discrete_hamiltonian(const GradientCandidate& phi, const std::vector<double>& p,
                                   const Point& x, const Environment& env) {
    const int d = env.dimension();
    const auto dirs = all_directions(d);
    double px = phi(x);
    double best = -std::numeric_limits<double>::infinity();
    std::array<int, kMaxDimension> nbr{};
    for (const Direction& a : dirs) {
        std::copy(x.begin(), x.end(), nbr.begin());
        nbr[a.axis] += a.sign;
        std::span<const int> nspan(nbr.data(), x.size());
        double dphi = phi(nspan) - px;
        best = std::max(best, (-dphi - dot(p, a)) / env.weight(x, a));
    }
    return best;
}

// (min, max) of H(phi, p, .) over the box. For a stationary mean-zero
// candidate these bracket the effective Hamiltonian.
inline std::pair<double, double> variational_bounds(const GradientCandidate& phi,
                                                    const std::vector<double>& p,
                                                    const Environment& env, const Box& box) {
    check_box_capacity(box);
    const int d = env.dimension();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::array<int, kMaxDimension> coords{};
    std::span<int> cspan(coords.data(), static_cast<std::size_t>(d));
    Point x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < static_cast<std::size_t>(box.cube_sites()); ++i) {
        box.decode(i, cspan);
        if (!box.contains(std::span<const int>(cspan))) continue;
        x.assign(cspan.begin(), cspan.end());
        double h = discrete_hamiltonian(phi, p, x, env);
        lo = std::min(lo, h);
        hi = std::max(hi, h);
    }
    return {lo, hi};
}

enum class HbarMethod { MuSlope, NuDiscount, DualNorm };

inline const char* to_string(HbarMethod m) {
    switch (m) {
        case HbarMethod::MuSlope: return "mu_slope";
        case HbarMethod::NuDiscount: return "nu_discount";
        case HbarMethod::DualNorm: return "dual_norm";
    }
    return "?";
}

struct HbarEstimate {
    std::vector<double> p;
    HbarMethod method = HbarMethod::MuSlope;
    double value = 0;
    double uncertainty = 0;
    // solver metadata
    double t = 0;
    double eps = 0;
    int replicas = 0;
    double stderr_ = 0;
    double bias_allowance = 0;
    double residual = 0;
    int box_radius = 0;
    long iterations = 0;
    int argmax_direction = -1;  // dual norm only
};

// Finite-horizon slope estimator: mean over replicas of -mu(0, t; phi=0)/t.
// The finite-t bias allowance 2 |p|_inf / (a t) is an engineering bracket.
inline HbarEstimate hbar_mu_slope(const Environment& env, const std::vector<double>& p, double t,
                                  int replicas) {
    const WeightBounds wb = env.bounds();
    if (!(t >= 10 * wb.b)) throw config_error("hbar_mu_slope needs t >= 10 b");
    if (replicas < 1) throw config_error("hbar_mu_slope needs replicas >= 1");
    const Point origin(static_cast<std::size_t>(env.dimension()), 0);
    std::vector<double> slopes(static_cast<std::size_t>(replicas), 0.0);
    parallel_for_index(replicas, [&](int r) {
        Environment rep = env.replica(r);
        slopes[static_cast<std::size_t>(r)] =
            -cell::mu(rep, p, origin, t, cell::zero_terminal()) / t;
    });
    auto ms = mean_stderr(slopes);
    HbarEstimate est;
    est.p = p;
    est.method = HbarMethod::MuSlope;
    est.value = ms.mean;
    est.stderr_ = ms.stderr_;
    est.bias_allowance = 2.0 * (linf_norm(p) / wb.a) / t;
    est.uncertainty = est.stderr_ + est.bias_allowance;
    est.t = t;
    est.replicas = replicas;
    est.box_radius = static_cast<int>(std::ceil(t / wb.a)) + 1;
    return est;
}

// Discount estimator: -eps nu_eps(0). The uncertainty combines the
// empirical HJB residual (doubled as a margin) with the solver tolerance.
inline HbarEstimate hbar_nu_discount(const Environment& env, const std::vector<double>& p,
                                     double eps, double tol = 1e-6, int core_radius = 10) {
    if (!(eps > 0) || !(eps <= 1)) throw config_error("hbar_nu_discount needs eps in (0, 1]");
    cell::StationaryValue sv = cell::nu(env, p, eps, tol, core_radius);
    cell::HjbResidual res = cell::hjb_residual(sv, env, p);
    HbarEstimate est;
    est.p = p;
    est.method = HbarMethod::NuDiscount;
    est.value = -eps * sv.at_origin();
    est.residual = res.residual;
    est.uncertainty = 2.0 * res.residual + 2.0 * eps * tol;
    est.eps = eps;
    est.box_radius = sv.box.radius();
    est.iterations = sv.iterations;
    return est;
}

struct DirectionSample {
    std::vector<double> x;
    double m_hat = 0;
    double stderr_ = 0;
};

// Dual-norm evaluation on a finite direction grid:
//   sup over samples of p.x / m(x),
// a lower approximation that is monotone under grid refinement.
inline HbarEstimate dual_norm(const std::vector<DirectionSample>& samples,
                              const std::vector<double>& p) {
    if (samples.empty()) throw config_error("dual_norm needs at least one direction sample");
    HbarEstimate est;
    est.p = p;
    est.method = HbarMethod::DualNorm;
    est.value = -std::numeric_limits<double>::infinity();
    double rel_err = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!(s.m_hat > 0))
            throw config_error("dual_norm: degenerate sample with m_hat <= 0");
        double v = dot(p, s.x) / s.m_hat;
        if (v > est.value) {
            est.value = v;
            est.argmax_direction = static_cast<int>(i);
            rel_err = s.stderr_ / s.m_hat;
        }
    }
    est.stderr_ = std::abs(est.value) * rel_err;
    est.uncertainty = est.stderr_;
    est.replicas = 0;
    return est;
}

// Default direction grid: primitive integer vectors with |x|_inf <= 2,
// scaled to unit Euclidean length. In d=2 this is 16 directions.
inline std::vector<std::vector<double>> default_direction_grid(int d) {
    std::vector<std::vector<double>> dirs;
    std::vector<int> v(static_cast<std::size_t>(d), -2);
    auto gcd_all = [](const std::vector<int>& w) {
        int g = 0;
        for (int c : w) g = std::gcd(g, std::abs(c));
        return g;
    };
    while (true) {
        if (gcd_all(v) == 1) {
            double norm = 0;
            for (int c : v) norm += static_cast<double>(c) * c;
            norm = std::sqrt(norm);
            std::vector<double> unit(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) unit[k] = v[k] / norm;
            dirs.push_back(std::move(unit));
        }
        int k = d - 1;
        while (k >= 0 && v[static_cast<std::size_t>(k)] == 2) {
            v[static_cast<std::size_t>(k)] = -2;
            --k;
        }
        if (k < 0) break;
        ++v[static_cast<std::size_t>(k)];
    }
    return dirs;
}

// Measures m(x) on a direction grid (shared shortest-path sweep per
// replica) and evaluates the dual norm at p.
inline HbarEstimate hbar_dual_norm(const Environment& env, const std::vector<double>& p,
                                   const std::vector<std::vector<double>>& directions, long long n,
                                   int replicas) {
    auto ests = time_constants(env, directions, n, replicas);
    std::vector<DirectionSample> samples(ests.size());
    for (std::size_t i = 0; i < ests.size(); ++i)
        samples[i] = {ests[i].direction, ests[i].value, ests[i].stderr_};
    return dual_norm(samples, p);
}

struct NormAxiomReport {
    int checks = 0;
    int violations = 0;
    std::vector<std::string> details;
};

// Verifies, within estimator uncertainty: positive homogeneity for
// lambda in {2, 1/2}, subadditivity over consecutive sample pairs, and the
// envelope |p|_inf / b <= Hbar(p) <= |p|_inf / a.
inline NormAxiomReport norm_axiom_check(
    const std::function<HbarEstimate(const std::vector<double>&)>& estimator,
    const std::vector<std::vector<double>>& p_samples, WeightBounds wb) {
    NormAxiomReport rep;
    auto fail = [&rep](const std::string& msg) {
        ++rep.violations;
        if (rep.details.size() < 10) rep.details.push_back(msg);
    };
    auto scaled = [](const std::vector<double>& p, double lam) {
        std::vector<double> q(p);
        for (double& v : q) v *= lam;
        return q;
    };

    std::vector<HbarEstimate> base;
    base.reserve(p_samples.size());
    for (const auto& p : p_samples) base.push_back(estimator(p));

    for (std::size_t i = 0; i < p_samples.size(); ++i) {
        const auto& p = p_samples[i];
        const auto& e = base[i];
        ++rep.checks;
        double pinf = linf_norm(p);
        if (e.value < pinf / wb.b - e.uncertainty - 1e-12 ||
            e.value > pinf / wb.a + e.uncertainty + 1e-12) {
            std::ostringstream os;
            os << "bounds: Hbar=" << e.value << " outside [" << pinf / wb.b << ", " << pinf / wb.a
               << "] +- " << e.uncertainty;
            fail(os.str());
        }
        for (double lam : {2.0, 0.5}) {
            ++rep.checks;
            HbarEstimate se = estimator(scaled(p, lam));
            double tol = se.uncertainty + lam * e.uncertainty + 1e-12;
            if (std::abs(se.value - lam * e.value) > tol) {
                std::ostringstream os;
                os << "homogeneity: Hbar(" << lam << " p)=" << se.value << " vs " << lam
                   << "*Hbar(p)=" << lam * e.value << " tol " << tol;
                fail(os.str());
            }
        }
    }
    for (std::size_t i = 0; i + 1 < p_samples.size(); i += 2) {
        ++rep.checks;
        std::vector<double> sum(p_samples[i]);
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += p_samples[i + 1][k];
        HbarEstimate es = estimator(sum);
        double tol = es.uncertainty + base[i].uncertainty + base[i + 1].uncertainty + 1e-12;
        if (es.value > base[i].value + base[i + 1].value + tol) {
            std::ostringstream os;
            os << "subadditivity: Hbar(p+q)=" << es.value << " > " << base[i].value << " + "
               << base[i + 1].value << " + tol " << tol;
            fail(os.str());
        }
    }
    return rep;
}

}  // namespace fpph::varform
