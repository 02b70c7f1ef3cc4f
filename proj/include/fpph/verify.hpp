#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fpph/cell.hpp"
#include "fpph/corrector.hpp"
#include "fpph/fpp.hpp"
#include "fpph/medium.hpp"
#include "fpph/oracles.hpp"
#include "fpph/rng.hpp"
#include "fpph/varform.hpp"

namespace fpph::verify {

struct VerifyReport {
    std::string suite;
    bool passed = true;
    int checks = 0;
    std::vector<std::string> failures;

    explicit VerifyReport(std::string name) : suite(std::move(name)) {}

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            passed = false;
            if (failures.size() < 20) failures.push_back(what);
        }
    }
};

inline MediumSpec random_iid_spec(std::uint64_t seed, int d) {
    MediumSpec spec;
    spec.dimension = d;
    spec.undirected = true;
    double u = KeyHash(seed, Stream::Space).word(0).u01();
    if (u < 0.5) {
        spec.kind = MediumKind::IidUniform;
        spec.lo = 1.0;
        spec.hi = 2.0;
    } else {
        spec.kind = MediumKind::IidDiscrete;
        spec.values = {1.0, 1.5, 2.0};
        spec.probs = {0.25, 0.5, 0.25};
    }
    return spec;
}

inline corrector::AtomicSpace random_atomic_space(std::uint64_t seed) {
    corrector::AtomicSpace space;
    int n = 1 + static_cast<int>(KeyHash(seed, Stream::Space).word(1).u01() * 5);  // 1..5
    int d = 1 + static_cast<int>(KeyHash(seed, Stream::Space).word(2).u01() * 3);  // 1..3
    space.atoms.resize(static_cast<std::size_t>(n));
    std::vector<double> raw(static_cast<std::size_t>(n));
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        auto& q = space.atoms[static_cast<std::size_t>(i)];
        q.resize(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
            q[static_cast<std::size_t>(j)] =
                0.5 + 2.5 * KeyHash(seed, Stream::Space).word(10 + i * 8 + j).u01();
        raw[static_cast<std::size_t>(i)] = 0.1 + KeyHash(seed, Stream::Space).word(100 + i).u01();
        sum += raw[static_cast<std::size_t>(i)];
    }
    space.probs.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) space.probs[static_cast<std::size_t>(i)] =
        raw[static_cast<std::size_t>(i)] / sum;
    // Renormalization dust can leave |sum-1| just above the validator's
    // tolerance; pin the last entry.
    double acc = 0;
    for (int i = 0; i + 1 < n; ++i) acc += space.probs[static_cast<std::size_t>(i)];
    space.probs[static_cast<std::size_t>(n - 1)] = 1.0 - acc;
    return space;
}

inline std::vector<double> random_p(std::uint64_t seed, int d) {
    std::vector<double> p(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        p[static_cast<std::size_t>(j)] = -2.0 + 4.0 * KeyHash(seed, Stream::Space).word(500 + j).u01();
    double pinf = linf_norm(p);
    if (pinf < 0.1) p[0] += 0.5;
    return p;
}

// Interior dynamic-programming identity and oracle equality for the
// passage-time solver on random small media.
inline VerifyReport run_dpp(std::uint64_t seed = 20240501) {
    VerifyReport rep("dpp");
    for (int trial = 0; trial < 10; ++trial) {
        MediumSpec spec = random_iid_spec(seed + static_cast<std::uint64_t>(trial), 2);
        Environment env(spec, seed * 31 + static_cast<std::uint64_t>(trial));
        const Point origin{0, 0};
        const Box box(origin, 3);  // 7x7 cube
        auto field = passage_times(env, origin, box);
        auto oracle = oracles::bellman_ford_times(env, origin, box);
        field.for_each([&](std::span<const int> y, double v) {
            double o = oracle[box.index(y)];
            std::ostringstream os;
            os << "trial " << trial << ": passage time mismatch at (" << y[0] << "," << y[1]
               << "): " << v << " vs oracle " << o;
            rep.expect(std::abs(v - o) <= 1e-12 * std::max(1.0, std::abs(o)), os.str());
        });
        // Interior DPP: T(y) = min_a [T(y-a) + tau(y-a, a)] for interior y != source.
        const auto dirs = all_directions(2);
        field.for_each([&](std::span<const int> y, double v) {
            if (box.center_distance(y) >= box.radius()) return;
            if (y[0] == 0 && y[1] == 0) return;
            double best = kUnreached;
            for (const Direction& a : dirs) {
                Point u(y.begin(), y.end());
                u[static_cast<std::size_t>(a.axis)] -= a.sign;
                best = std::min(best, field.at(u) + env.weight(u, a));
            }
            std::ostringstream os;
            os << "trial " << trial << ": interior DPP broken at (" << y[0] << "," << y[1] << ")";
            rep.expect(v == best, os.str());
        });
        // Reachable set equals the enumeration threshold for a small budget.
        double t = 2.5;
        auto rs = reachable_set(env, origin, t, Box(origin, 8));
        auto brute = oracles::reachable_enumeration(env, origin, t);
        rep.expect(rs.members.size() == brute.size(),
                   "trial " + std::to_string(trial) + ": reachable-set size mismatch");
        for (const Point& y : brute)
            rep.expect(rs.contains(y), "trial " + std::to_string(trial) +
                                          ": enumerated site missing from reachable set");
    }
    return rep;
}

// Two-sided comparison principle on random media and terminal costs.
inline VerifyReport run_comparison(std::uint64_t seed = 20240502) {
    VerifyReport rep("comparison");
    for (int trial = 0; trial < 10; ++trial) {
        MediumSpec spec = random_iid_spec(seed + static_cast<std::uint64_t>(trial), 2);
        Environment env(spec, seed * 17 + static_cast<std::uint64_t>(trial));
        std::vector<double> p = random_p(seed + static_cast<std::uint64_t>(trial), 2);
        const Point origin{0, 0};
        const Box phi_box(origin, 14);

        // phi == 0.
        auto r0 = cell::check_comparison(env, p, cell::zero_terminal(), 30, phi_box, true,
                                         seed + 1000 + static_cast<std::uint64_t>(trial), 6, 6.0);
        rep.expect(r0.violations == 0, "trial " + std::to_string(trial) +
                                          ": comparison violated for phi=0" +
                                          (r0.details.empty() ? "" : " (" + r0.details[0] + ")"));

        // phi = clamp(p.x): linear core with lip |p|_inf, constant far away.
        std::vector<double> pc = p;
        cell::TerminalCost clamp_cost{
            [pc](std::span<const int> x) {
                double v = dot(pc, x);
                return std::clamp(v, -4.0, 4.0);
            },
            linf_norm(pc)};
        auto r1 = cell::check_comparison(env, p, clamp_cost, 30, phi_box, true,
                                         seed + 2000 + static_cast<std::uint64_t>(trial), 6, 6.0);
        rep.expect(r1.violations == 0, "trial " + std::to_string(trial) +
                                          ": comparison violated for clamp(p.x)" +
                                          (r1.details.empty() ? "" : " (" + r1.details[0] + ")"));

        // Random bounded piecewise phi with lip = 2 (l1), built by scaling a
        // hash field down to slope <= 2 per step.
        std::uint64_t phiseed = seed + 3000 + static_cast<std::uint64_t>(trial);
        cell::TerminalCost rough{
            [phiseed](std::span<const int> x) {
                double best = 0;
                // max over a few random affine pieces, each with |slope|_inf <= 1
                for (int piece = 0; piece < 4; ++piece) {
                    double v = -2.0 + 4.0 * KeyHash(phiseed, Stream::Probe).word(piece).u01();
                    for (std::size_t k = 0; k < x.size(); ++k) {
                        double g = -1.0 + 2.0 * KeyHash(phiseed, Stream::Probe)
                                                    .word(10 + piece * 4 + static_cast<int>(k))
                                                    .u01();
                        v += g * x[k];
                    }
                    best = std::max(best, v);
                }
                return std::clamp(best, -3.0, 3.0);
            },
            2.0};
        auto r2 = cell::check_comparison(env, p, rough, 40, phi_box, true,
                                         seed + 4000 + static_cast<std::uint64_t>(trial), 6, 6.0);
        rep.expect(r2.violations == 0, "trial " + std::to_string(trial) +
                                          ": comparison violated for rough phi" +
                                          (r2.details.empty() ? "" : " (" + r2.details[0] + ")"));
    }
    return rep;
}

// Norm axioms of the estimated effective Hamiltonian.
inline VerifyReport run_norm(std::uint64_t seed = 20240503) {
    VerifyReport rep("norm");
    {
        MediumSpec spec;
        spec.kind = MediumKind::Constant;
        spec.c = 2.0;
        spec.dimension = 2;
        Environment env(spec, seed);
        auto estimator = [&env](const std::vector<double>& p) {
            return varform::hbar_mu_slope(env, p, 120.0, 1);
        };
        auto r = varform::norm_axiom_check(estimator, {{1.0, 0.0}, {1.0, 1.0}, {-1.0, 0.5}, {0.5, 2.0}},
                                           env.bounds());
        rep.expect(r.violations == 0,
                   "constant medium axioms" + (r.details.empty() ? "" : ": " + r.details[0]));
    }
    {
        MediumSpec spec = random_iid_spec(seed, 2);
        Environment env(spec, seed + 7);
        auto estimator = [&env](const std::vector<double>& p) {
            return varform::hbar_mu_slope(env, p, 120.0, 4);
        };
        auto r = varform::norm_axiom_check(estimator, {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {-1.0, 1.0}},
                                           env.bounds());
        rep.expect(r.violations == 0,
                   "random medium axioms" + (r.details.empty() ? "" : ": " + r.details[0]));
    }
    return rep;
}

// Minimizing iteration against the feasibility-bisection oracle.
inline VerifyReport run_oracle(std::uint64_t seed = 20240504, int trials = 100) {
    VerifyReport rep("oracle");
    for (int trial = 0; trial < trials; ++trial) {
        auto space = random_atomic_space(seed + static_cast<std::uint64_t>(trial));
        auto p = random_p(seed + 9000 + static_cast<std::uint64_t>(trial), space.dimension());
        corrector::RunOptions opt;
        opt.tol = 1e-9;
        auto res = corrector::run(space, p, std::vector<double>(space.atoms.size(), 0.0), opt);
        auto oracle = corrector::brute_force_minimax(space, p, 1e-10);
        std::ostringstream os;
        os << "trial " << trial << ": run.hbar=" << res.hbar << " vs oracle " << oracle.value;
        rep.expect(std::abs(res.hbar - oracle.value) <= 1e-8, os.str());
        rep.expect(res.max_abs_xi <= 1.0 + 1e-9,
                   "trial " + std::to_string(trial) + ": |xi| exceeded 1");
        double mean = space.mean(res.f);
        rep.expect(std::abs(mean) <= 1e-10,
                   "trial " + std::to_string(trial) + ": mean-zero constraint drifted");
        WeightBounds wb = space.bounds();
        double pinf = linf_norm(p);
        rep.expect(oracle.value >= pinf / wb.b - 1e-9 && oracle.value <= pinf / wb.a + 1e-9,
                   "trial " + std::to_string(trial) + ": minimax value escaped [|p|/b, |p|/a]");
    }
    return rep;
}

// Exchange-of-limits surrogate: the slope and discount estimators agree
// within their combined uncertainties.
inline VerifyReport run_tauberian(std::uint64_t seed = 20240505) {
    VerifyReport rep("tauberian");
    for (int trial = 0; trial < 3; ++trial) {
        MediumSpec spec = random_iid_spec(seed + static_cast<std::uint64_t>(trial), 2);
        Environment env(spec, seed * 13 + static_cast<std::uint64_t>(trial));
        std::vector<double> p{1.0, trial * 0.5};
        auto slope = varform::hbar_mu_slope(env, p, 240.0, 4);
        auto disc = varform::hbar_nu_discount(env, p, 0.05);
        std::ostringstream os;
        os << "trial " << trial << ": |" << slope.value << " - " << disc.value << "| > "
           << slope.uncertainty + disc.uncertainty;
        rep.expect(std::abs(slope.value - disc.value) <= slope.uncertainty + disc.uncertainty,
                   os.str());
    }
    return rep;
}

inline VerifyReport run_suite(const std::string& name) {
    if (name == "dpp") return run_dpp();
    if (name == "comparison") return run_comparison();
    if (name == "norm") return run_norm();
    if (name == "oracle") return run_oracle();
    if (name == "tauberian") return run_tauberian();
    throw config_error("unknown verify suite: " + name +
                       " (expected dpp, comparison, norm, oracle, or tauberian)");
}

}  // namespace fpph::verify
