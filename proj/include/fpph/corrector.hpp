#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpph/errors.hpp"
#include "fpph/lattice.hpp"
#include "fpph/medium.hpp"
#include "fpph/varform.hpp"

namespace fpph::corrector {

// Finite probability space of edge-weight vectors at the origin: atom i is
// a vector q_i in [a,b]^d drawn with probability pi_i. The symmetric medium
// is constant on diagonal hyperplanes, so candidates for the variational
// formula reduce to one mean-zero scalar per atom.
struct AtomicSpace {
    std::vector<std::vector<double>> atoms;
    std::vector<double> probs;
    bool periodic = false;

    int atom_count() const { return static_cast<int>(atoms.size()); }
    int dimension() const { return atoms.empty() ? 0 : static_cast<int>(atoms.front().size()); }

    WeightBounds bounds() const {
        WeightBounds wb{std::numeric_limits<double>::infinity(), 0.0};
        for (const auto& q : atoms)
            for (double v : q) {
                wb.a = std::min(wb.a, v);
                wb.b = std::max(wb.b, v);
            }
        return wb;
    }

    void validate() {
        if (atoms.empty()) throw config_error("atomic space: no atoms");
        const std::size_t d = atoms.front().size();
        if (d == 0) throw config_error("atomic space: zero-dimensional atoms");
        for (const auto& q : atoms) {
            if (q.size() != d) throw config_error("atomic space: ragged atom dimensions");
            for (double v : q)
                if (!(v > 0)) throw config_error("atomic space: weights must be positive");
        }
        detail::validate_probs(probs, atoms.size(), "atomic space");
        if (periodic) {
            const double uniform = 1.0 / static_cast<double>(atoms.size());
            for (double q : probs)
                if (std::abs(q - uniform) > 1e-12)
                    throw config_error("periodic atomic space requires uniform probabilities");
        }
    }

    double mean(std::span<const double> f) const {
        double s = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * f[i];
        return s;
    }
};

// One-dimensional symmetric Hamiltonian of an atom:
//   h_sym(t) = max_i |t + p_i| / q_i,
// convex piecewise-linear with slope magnitudes in [1/b, 1/a].
inline double h_sym(double t, std::span<const double> p, std::span<const double> q) {
    double best = 0;
    for (std::size_t i = 0; i < p.size(); ++i) best = std::max(best, std::abs(t + p[i]) / q[i]);
    return best;
}

struct OneSidedDerivs {
    double left = 0;
    double right = 0;
};

// One-sided derivatives of h_sym at t: the right derivative is the max of
// the active pieces' right slopes, the left derivative the min of their
// left slopes.
inline OneSidedDerivs h_sym_derivatives(double t, std::span<const double> p,
                                        std::span<const double> q) {
    const double h = h_sym(t, p, q);
    const double tol = 1e-12 * std::max(1.0, h);
    OneSidedDerivs out{std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < p.size(); ++i) {
        double u = t + p[i];
        if (std::abs(u) / q[i] < h - tol) continue;
        double right = (u >= 0 ? 1.0 : -1.0) / q[i];
        double left = (u > 0 ? 1.0 : -1.0) / q[i];
        out.right = std::max(out.right, right);
        out.left = std::min(out.left, left);
    }
    return out;
}

struct SymArgmin {
    double x_star = 0;
    double min_value = 0;
};

// Exact minimizer of h_sym: the minimum sits at a kink -p_i or at a
// crossing of two pieces, a finite candidate list solved in closed form.
inline SymArgmin argmin_h_sym(std::span<const double> p, std::span<const double> q) {
    const std::size_t d = p.size();
    std::vector<double> cands;
    cands.reserve(d + d * d);
    for (std::size_t i = 0; i < d; ++i) cands.push_back(-p[i]);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            // |t+p_i|/q_i = |t+p_j|/q_j: same-sign and opposite-sign branches.
            if (std::abs(q[j] - q[i]) > 1e-15 * (q[i] + q[j]))
                cands.push_back((p[j] * q[i] - p[i] * q[j]) / (q[j] - q[i]));
            cands.push_back(-(p[i] * q[j] + p[j] * q[i]) / (q[i] + q[j]));
        }
    }
    SymArgmin best{cands.front(), h_sym(cands.front(), p, q)};
    for (double t : cands) {
        double h = h_sym(t, p, q);
        if (h < best.min_value) best = {t, h};
    }
    return best;
}

// Snapshot of one iteration of the minimizing procedure. Atom index sets:
//   min0:   h_i equals the per-atom minimum (tol band)
//   above (S): h_i above the mean mu0 by more than tol
//   below (I): h_i strictly below mu0; this balancing set stays exact
//              because E[(mu0 - h), {h < mu0}] = E[(h - mu0), {h > mu0}],
//              which keeps the update well defined and |xi| <= 1 whenever
//              any capped move happens
//   s_plus / s_minus: movable atoms left / right of their minimizer.
struct IterationState {
    std::vector<double> f;
    std::vector<double> h;
    std::vector<double> x_star;
    std::vector<double> min_value;
    double mu0 = 0;
    double esssup = 0;
    double d = 0;
    double xi = 0;  // balancing multiplier of the step that produced this f
    std::vector<int> min0, above, below, s_plus, s_minus;
};

inline IterationState make_state(const AtomicSpace& space, const std::vector<double>& p,
                                 std::vector<double> f, double tol) {
    const int n = space.atom_count();
    if (static_cast<int>(f.size()) != n) throw config_error("candidate size mismatch");
    if (static_cast<int>(p.size()) != space.dimension())
        throw config_error("p dimension does not match the atomic space");
    if (std::abs(space.mean(f)) > 1e-10)
        throw config_error("candidate is not mean-zero");
    IterationState st;
    st.f = std::move(f);
    st.h.resize(static_cast<std::size_t>(n));
    st.x_star.resize(static_cast<std::size_t>(n));
    st.min_value.resize(static_cast<std::size_t>(n));
    st.esssup = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const auto& q = space.atoms[static_cast<std::size_t>(i)];
        st.h[static_cast<std::size_t>(i)] = h_sym(st.f[static_cast<std::size_t>(i)], p, q);
        auto am = argmin_h_sym(p, q);
        st.x_star[static_cast<std::size_t>(i)] = am.x_star;
        st.min_value[static_cast<std::size_t>(i)] = am.min_value;
        st.esssup = std::max(st.esssup, st.h[static_cast<std::size_t>(i)]);
    }
    st.mu0 = space.mean(st.h);
    st.d = st.esssup - st.mu0;
    for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const bool at_min = st.h[ui] <= st.min_value[ui] + tol;
        if (at_min) st.min0.push_back(i);
        if (st.h[ui] > st.mu0 + tol) {
            st.above.push_back(i);
            if (!at_min) {
                auto der = h_sym_derivatives(st.f[ui], p, space.atoms[ui]);
                if (der.right < 0) st.s_plus.push_back(i);
                else if (der.left > 0) st.s_minus.push_back(i);
            }
        } else if (st.h[ui] < st.mu0) {
            st.below.push_back(i);
        }
    }
    return st;
}

// One step of the procedure: atoms above the mean move toward their
// minimizer, by at most a*(h_i - mu0); atoms below the mean absorb
// a*xi*(mu0 - h_i), with xi chosen so the update stays mean-zero.
inline IterationState iterate_step(const IterationState& st, const AtomicSpace& space,
                                   const std::vector<double>& p, double tol) {
    const double a = space.bounds().a;
    std::vector<double> delta(st.f.size(), 0.0);
    for (int i : st.s_plus) {
        const std::size_t ui = static_cast<std::size_t>(i);
        double to_min = st.x_star[ui] - st.f[ui];  // > 0 left of the minimizer
        delta[ui] = std::min(a * (st.h[ui] - st.mu0), to_min);
    }
    for (int i : st.s_minus) {
        const std::size_t ui = static_cast<std::size_t>(i);
        double to_min = st.x_star[ui] - st.f[ui];  // < 0 right of the minimizer
        delta[ui] = std::max(-a * (st.h[ui] - st.mu0), to_min);
    }
    double moved = 0;
    for (int i : st.s_plus) moved += space.probs[static_cast<std::size_t>(i)] * delta[static_cast<std::size_t>(i)];
    for (int i : st.s_minus) moved += space.probs[static_cast<std::size_t>(i)] * delta[static_cast<std::size_t>(i)];
    double capacity = 0;
    for (int i : st.below)
        capacity += space.probs[static_cast<std::size_t>(i)] * a *
                    (st.mu0 - st.h[static_cast<std::size_t>(i)]);
    double xi = 0;
    if (capacity > 0) {
        // |moved| <= capacity in exact arithmetic (the capped moves sit
        // inside E[(h - mu0), {h > mu0}] = E[(mu0 - h), {h < mu0}]); clip
        // the rounding excess that appears when both sums are ~tol and let
        // the mean re-projection absorb the dust.
        xi = std::clamp(-moved / capacity, -1.0, 1.0);
    } else if (std::abs(moved) > 1e-12 * std::max(1.0, st.esssup)) {
        throw numeric_error("iterate_step: no mass below the mean to balance the update");
    }
    for (int i : st.below) {
        const std::size_t ui = static_cast<std::size_t>(i);
        delta[ui] = a * xi * (st.mu0 - st.h[ui]);
    }

    std::vector<double> f(st.f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += delta[i];
    double drift = space.mean(f);  // float dust only; re-project exactly
    for (double& v : f) v -= drift;

    IterationState next = make_state(space, p, std::move(f), tol);
    next.xi = xi;
    return next;
}

enum class OutcomeKind { CorrectorFound, MinimizerNotCorrector, LimitCorrector };

inline const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::CorrectorFound: return "corrector_found";
        case OutcomeKind::MinimizerNotCorrector: return "minimizer_not_corrector";
        case OutcomeKind::LimitCorrector: return "limit_corrector";
    }
    return "?";
}

struct TraceRow {
    long iter = 0;
    double esssup = 0;
    double mu0 = 0;
    double d = 0;
    double xi = 0;
};

struct Outcome {
    OutcomeKind kind = OutcomeKind::CorrectorFound;
    std::vector<double> f;
    std::vector<double> per_atom_h;
    double hbar = 0;
    long iterations = 0;
    long valley_steps = 0;
    double max_abs_xi = 0;
    bool descent_violated = false;
    std::vector<TraceRow> trace;
};

struct RunOptions {
    double tol = 1e-9;
    long max_iter = 100000;
    bool record_trace = false;
};

namespace detail {

// Balanced co-descent at an equalized state: every unpinned atom moves
// toward its minimizer, the heavier side scaled so the update stays
// mean-zero. The lighter side lands exactly on its minimizers, so the
// step pins a whole side and strictly lowers the esssup.
inline IterationState valley_step(const IterationState& st, const AtomicSpace& space,
                                  const std::vector<double>& p, double tol) {
    std::vector<double> delta(st.f.size(), 0.0);
    double mass_up = 0, mass_down = 0;
    for (std::size_t i = 0; i < st.f.size(); ++i) {
        if (st.h[i] <= st.min_value[i] + tol) continue;
        delta[i] = st.x_star[i] - st.f[i];
        if (delta[i] > 0) mass_up += space.probs[i] * delta[i];
        else mass_down -= space.probs[i] * delta[i];
    }
    const double s = std::min(mass_up, mass_down);
    std::vector<double> f(st.f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (delta[i] > 0) f[i] += delta[i] * (s / mass_up);
        else if (delta[i] < 0) f[i] += delta[i] * (s / mass_down);
    }
    double drift = space.mean(f);
    for (double& v : f) v -= drift;
    return make_state(space, p, std::move(f), tol);
}

}  // namespace detail

// Runs the minimizing iteration from f0.
//
// A state certifies a minimizer in exactly two ways:
//   - pinned certificate: an atom attaining the esssup sits at its
//     per-atom minimum, so no candidate can do better there;
//   - one-sided equalized state: per-atom h is constant and every
//     unpinned atom lies on the same side of its minimizer, so the
//     mean-zero constraint blocks any joint descent.
// An equalized state without either certificate is NOT minimal: atoms on
// opposite sides of their minimizers can co-descend while preserving the
// mean. The plain iteration creeps along such a valley at speed O(d), so
// when the gap d closes without a certificate the run inserts a balanced
// valley step (see above) and resumes.
//
// Termination:
//   - d <= tol with a certificate: CorrectorFound (constant per-atom h);
//   - pinned certificate with d > tol: MinimizerNotCorrector;
//   - iteration budget reached with d below 10 tol: LimitCorrector.
// If the esssup fails to fall by d*a/b and the next pass neither
// terminates nor enters a valley step, the descent guarantee is broken
// and a numeric_error signals an implementation bug.
inline Outcome run(const AtomicSpace& space, const std::vector<double>& p, std::vector<double> f0,
                   const RunOptions& opt = {}) {
    if (!(opt.tol > 0)) throw config_error("run needs tol > 0");
    AtomicSpace sp = space;
    sp.validate();
    const WeightBounds wb = sp.bounds();

    Outcome out;
    IterationState st = make_state(sp, p, std::move(f0), opt.tol);
    bool expect_termination = false;
    for (long iter = 0;; ++iter) {
        if (opt.record_trace) out.trace.push_back({iter, st.esssup, st.mu0, st.d, st.xi});
        out.iterations = iter;
        out.max_abs_xi = std::max(out.max_abs_xi, std::abs(st.xi));

        double sup_on_min0 = -std::numeric_limits<double>::infinity();
        for (int i : st.min0)
            sup_on_min0 = std::max(sup_on_min0, st.h[static_cast<std::size_t>(i)]);
        const bool pinned_certificate = !st.min0.empty() && sup_on_min0 >= st.esssup - opt.tol;

        if (st.d <= opt.tol) {
            if (pinned_certificate) {
                out.kind = OutcomeKind::CorrectorFound;
                break;
            }
            bool pushes_up = false, pushes_down = false;
            for (std::size_t i = 0; i < st.f.size(); ++i) {
                if (st.h[i] <= st.min_value[i] + opt.tol) continue;
                (st.x_star[i] > st.f[i] ? pushes_up : pushes_down) = true;
            }
            if (!pushes_up || !pushes_down) {
                out.kind = OutcomeKind::CorrectorFound;
                break;
            }
            if (iter >= opt.max_iter)
                throw numeric_error("run: iteration budget exhausted in a valley state");
            st = detail::valley_step(st, sp, p, opt.tol);
            ++out.valley_steps;
            expect_termination = false;
            continue;
        }
        if (pinned_certificate) {
            out.kind = OutcomeKind::MinimizerNotCorrector;
            break;
        }
        if (expect_termination) {
            out.descent_violated = true;
            throw numeric_error("run: esssup descent guarantee violated (implementation bug)");
        }
        if (iter >= opt.max_iter) {
            if (st.d <= 10 * opt.tol) {
                out.kind = OutcomeKind::LimitCorrector;
                break;
            }
            throw numeric_error("run: iteration budget exhausted with d = " + std::to_string(st.d));
        }

        IterationState next = iterate_step(st, sp, p, opt.tol);
        // Either the esssup falls by at least d*a/b, or the next pass must
        // terminate or divert into a valley step.
        if (next.esssup > st.esssup - st.d * wb.a / wb.b + opt.tol) expect_termination = true;
        st = std::move(next);
    }
    out.f = st.f;
    out.per_atom_h = st.h;
    out.hbar = st.esssup;
    return out;
}

struct MinimaxResult {
    double value = 0;
    std::vector<double> f_witness;
    long bisection_steps = 0;
};

// Independent oracle for the minimax value
//
//   min over mean-zero f of max_i h_sym(f_i, p, q_i)
//
// by bisection on the level c: the sublevel set {t : h_sym(t) <= c} of
// atom i is the interval [max_j(-p_j - c q_ij), min_j(-p_j + c q_ij)], and
// a mean-zero selection exists iff sum pi_i l_i(c) <= 0 <= sum pi_i r_i(c).
inline MinimaxResult brute_force_minimax(const AtomicSpace& space, const std::vector<double>& p,
                                         double tol) {
    if (!(tol > 0)) throw config_error("brute_force_minimax needs tol > 0");
    AtomicSpace sp = space;
    sp.validate();
    const int n = sp.atom_count();
    const std::size_t d = p.size();

    auto intervals = [&](double c, std::vector<double>& l, std::vector<double>& r) {
        for (int i = 0; i < n; ++i) {
            const auto& q = sp.atoms[static_cast<std::size_t>(i)];
            double li = -std::numeric_limits<double>::infinity();
            double ri = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < d; ++j) {
                li = std::max(li, -p[j] - c * q[j]);
                ri = std::min(ri, -p[j] + c * q[j]);
            }
            l[static_cast<std::size_t>(i)] = li;
            r[static_cast<std::size_t>(i)] = ri;
        }
    };
    std::vector<double> l(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n));
    auto feasible = [&](double c) {
        intervals(c, l, r);
        for (int i = 0; i < n; ++i)
            if (l[static_cast<std::size_t>(i)] > r[static_cast<std::size_t>(i)]) return false;
        return sp.mean(l) <= 0 && 0 <= sp.mean(r);
    };

    double lo = 0;
    for (int i = 0; i < n; ++i)
        lo = std::max(lo, argmin_h_sym(p, sp.atoms[static_cast<std::size_t>(i)]).min_value);
    double hi = 0;
    for (int i = 0; i < n; ++i)
        hi = std::max(hi, h_sym(0.0, p, sp.atoms[static_cast<std::size_t>(i)]));  // f=0 is feasible

    MinimaxResult out;
    if (feasible(lo)) {
        hi = lo;
    } else {
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            if (feasible(mid)) hi = mid;
            else lo = mid;
            if (++out.bisection_steps > 200) break;
        }
    }
    out.value = hi;
    intervals(hi, l, r);
    double L = sp.mean(l), R = sp.mean(r);
    double theta = (R > L) ? std::clamp(-L / (R - L), 0.0, 1.0) : 0.0;
    out.f_witness.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        out.f_witness[ui] = l[ui] + theta * (r[ui] - l[ui]);
    }
    return out;
}

// Lifts a per-atom candidate to a lattice function whose discrete
// derivative equals f(atom at the level) in every direction:
//   phi(x) = sum over levels 0..L-1 of f(atom(level)),  L = sum_i x_i.
inline varform::GradientCandidate lift_to_lattice(const AtomicSpace& space,
                                                  const std::vector<double>& f,
                                                  const Environment& env) {
    if (env.spec().kind != MediumKind::DiagonalSymmetric)
        throw config_error("lift_to_lattice needs a diagonal_symmetric environment");
    const auto& spec = env.spec();
    if (spec.atoms.size() != space.atoms.size())
        throw config_error("lift_to_lattice: environment and space atom counts differ");
    for (std::size_t i = 0; i < space.atoms.size(); ++i) {
        if (spec.atoms[i].size() != space.atoms[i].size())
            throw config_error("lift_to_lattice: atom dimension mismatch");
        for (std::size_t j = 0; j < space.atoms[i].size(); ++j)
            if (std::abs(spec.atoms[i][j] - space.atoms[i][j]) > 1e-12)
                throw config_error("lift_to_lattice: environment atoms differ from space atoms");
        if (std::abs(spec.probs[i] - space.probs[i]) > 1e-9)
            throw config_error("lift_to_lattice: environment probabilities differ from space");
    }
    if (f.size() != space.atoms.size())
        throw config_error("lift_to_lattice: candidate size mismatch");

    Environment env_copy = env;
    std::vector<double> fc = f;
    varform::GradientCandidate out;
    out.mean_zero_gradient = true;
    out.phi = [env_copy, fc](std::span<const int> x) {
        long long level = 0;
        for (int v : x) level += v;
        double s = 0;
        if (level > 0)
            for (long long l = 0; l < level; ++l)
                s += fc[static_cast<std::size_t>(env_copy.atom_at_level(l))];
        else
            for (long long l = level; l < 0; ++l)
                s -= fc[static_cast<std::size_t>(env_copy.atom_at_level(l))];
        return s;
    };
    return out;
}

}  // namespace fpph::corrector
