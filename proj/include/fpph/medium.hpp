#pragma once

#include <algorithm>
#include <array>
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
#include "fpph/rng.hpp"

namespace fpph {

inline constexpr int kMaxDimension = 8;

struct WeightBounds {
    double a = 1.0;  // essential infimum of the edge weights
    double b = 1.0;  // essential supremum
};

enum class MediumKind { Constant, IidDiscrete, IidUniform, Periodic, DiagonalSymmetric };

inline const char* to_string(MediumKind k) {
    switch (k) {
        case MediumKind::Constant: return "constant";
        case MediumKind::IidDiscrete: return "iid_discrete";
        case MediumKind::IidUniform: return "iid_uniform";
        case MediumKind::Periodic: return "periodic";
        case MediumKind::DiagonalSymmetric: return "diagonal_symmetric";
    }
    return "?";
}

// Description of an edge-weight distribution on Z^d. The weight of a
// canonical edge is a pure function of (seed, spec, edge key), so there is
// no stored field: any box, any probe order, any thread count sees the
// same environment.
struct MediumSpec {
    int dimension = 2;
    bool undirected = true;
    MediumKind kind = MediumKind::Constant;

    double c = 1.0;                          // constant
    std::vector<double> values;              // iid_discrete
    std::vector<double> probs;               // iid_discrete / diagonal_symmetric
    double lo = 1.0, hi = 1.0;               // iid_uniform
    int period = 1;                          // periodic
    std::vector<std::vector<double>> weights;  // periodic: rows = period^d cells, cols = directions
    std::vector<std::vector<double>> atoms;  // diagonal_symmetric: q_i in [a,b]^d
    std::uint64_t level_seed = 0;            // diagonal_symmetric: offsets the level stream

    WeightBounds bounds() const;
    void validate();  // throws config_error; renormalizes probability dust
};

namespace detail {

inline void validate_probs(std::vector<double>& probs, std::size_t expected, const char* what) {
    if (probs.size() != expected)
        throw config_error(std::string(what) + ": probs size does not match entries");
    double sum = 0;
    for (double q : probs) {
        if (!(q > 0)) throw config_error(std::string(what) + ": probabilities must be positive");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw config_error(std::string(what) + ": probabilities sum to " + std::to_string(sum) +
                           ", expected 1 within 1e-12");
    for (double& q : probs) q /= sum;
}

inline std::size_t cdf_pick(std::span<const double> cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace detail

inline WeightBounds MediumSpec::bounds() const {
    auto span_bounds = [](std::span<const double> v) {
        WeightBounds wb{std::numeric_limits<double>::infinity(), 0.0};
        for (double x : v) {
            wb.a = std::min(wb.a, x);
            wb.b = std::max(wb.b, x);
        }
        return wb;
    };
    switch (kind) {
        case MediumKind::Constant: return {c, c};
        case MediumKind::IidDiscrete: return span_bounds(values);
        case MediumKind::IidUniform: return {lo, hi};
        case MediumKind::Periodic: {
            WeightBounds wb{std::numeric_limits<double>::infinity(), 0.0};
            for (const auto& row : weights)
                for (double x : row) {
                    wb.a = std::min(wb.a, x);
                    wb.b = std::max(wb.b, x);
                }
            return wb;
        }
        case MediumKind::DiagonalSymmetric: {
            WeightBounds wb{std::numeric_limits<double>::infinity(), 0.0};
            for (const auto& q : atoms)
                for (double x : q) {
                    wb.a = std::min(wb.a, x);
                    wb.b = std::max(wb.b, x);
                }
            return wb;
        }
    }
    return {};
}

inline void MediumSpec::validate() {
    if (dimension < 1 || dimension > kMaxDimension)
        throw config_error("dimension must be in [1, " + std::to_string(kMaxDimension) + "]");
    switch (kind) {
        case MediumKind::Constant:
            if (!(c > 0)) throw config_error("constant weight must be positive");
            break;
        case MediumKind::IidDiscrete:
            if (values.empty()) throw config_error("iid_discrete: empty value list");
            for (double v : values)
                if (!(v > 0)) throw config_error("iid_discrete: weights must be positive");
            detail::validate_probs(probs, values.size(), "iid_discrete");
            break;
        case MediumKind::IidUniform:
            if (!(lo > 0) || !(hi >= lo)) throw config_error("iid_uniform: need 0 < lo <= hi");
            break;
        case MediumKind::Periodic: {
            if (period < 1) throw config_error("periodic: period must be >= 1");
            double cells = std::pow(static_cast<double>(period), dimension);
            if (cells > 1e7) throw config_error("periodic: period cell too large");
            std::size_t expected_rows = 1;
            for (int k = 0; k < dimension; ++k) expected_rows *= static_cast<std::size_t>(period);
            std::size_t cols = undirected ? static_cast<std::size_t>(dimension)
                                          : 2 * static_cast<std::size_t>(dimension);
            if (weights.size() != expected_rows)
                throw config_error("periodic: expected " + std::to_string(expected_rows) +
                                   " weight rows (one per period cell)");
            for (const auto& row : weights) {
                if (row.size() != cols)
                    throw config_error("periodic: each row needs " + std::to_string(cols) +
                                       " direction entries");
                for (double v : row)
                    if (!(v > 0)) throw config_error("periodic: weights must be positive");
            }
            break;
        }
        case MediumKind::DiagonalSymmetric: {
            if (!undirected)
                throw config_error("diagonal_symmetric media are undirected by construction");
            if (atoms.empty()) throw config_error("diagonal_symmetric: empty atom list");
            for (const auto& q : atoms) {
                if (q.size() != static_cast<std::size_t>(dimension))
                    throw config_error("diagonal_symmetric: atom dimension mismatch");
                for (double v : q)
                    if (!(v > 0)) throw config_error("diagonal_symmetric: weights must be positive");
            }
            detail::validate_probs(probs, atoms.size(), "diagonal_symmetric");
            break;
        }
    }
}

// A realized random environment: spec + 64-bit seed. Immutable after
// construction; concurrent reads are safe.
class Environment {
  public:
    Environment(MediumSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
        spec_.validate();
        bounds_ = spec_.bounds();
        const auto& p =
            spec_.kind == MediumKind::IidDiscrete || spec_.kind == MediumKind::DiagonalSymmetric
                ? spec_.probs
                : std::vector<double>{};
        cdf_.resize(p.size());
        std::partial_sum(p.begin(), p.end(), cdf_.begin());
        if (!cdf_.empty()) cdf_.back() = 1.0;
    }

    int dimension() const { return spec_.dimension; }
    bool undirected() const { return spec_.undirected; }
    WeightBounds bounds() const { return bounds_; }
    const MediumSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    Environment with_seed(std::uint64_t seed) const { return Environment(spec_, seed); }
    Environment replica(int index) const {
        return with_seed(derive_seed(seed_, Stream::Replica, static_cast<std::uint64_t>(index)));
    }

    // Weight of the edge from x to x+alpha. Total once the spec is valid.
    double weight(std::span<const int> x, Direction alpha) const {
        std::array<int, kMaxDimension> base{};
        std::copy(x.begin(), x.end(), base.begin());
        int sign = alpha.sign;
        // Canonical key of an undirected edge: lexicographically smaller
        // endpoint plus positive axis. This enforces tau(x,a) = tau(x+a,-a).
        if ((spec_.undirected || spec_.kind == MediumKind::DiagonalSymmetric) && sign < 0) {
            base[alpha.axis] -= 1;
            sign = 1;
        }
        std::span<const int> bspan(base.data(), x.size());
        switch (spec_.kind) {
            case MediumKind::Constant: return spec_.c;
            case MediumKind::IidUniform: {
                double u = edge_u01(bspan, alpha.axis, sign);
                return spec_.lo + u * (spec_.hi - spec_.lo);
            }
            case MediumKind::IidDiscrete: {
                double u = edge_u01(bspan, alpha.axis, sign);
                return spec_.values[detail::cdf_pick(cdf_, u)];
            }
            case MediumKind::Periodic: {
                std::size_t row = 0;
                for (std::size_t k = 0; k < bspan.size(); ++k) {
                    int m = bspan[k] % spec_.period;
                    if (m < 0) m += spec_.period;
                    row = row * static_cast<std::size_t>(spec_.period) + static_cast<std::size_t>(m);
                }
                std::size_t col = static_cast<std::size_t>(alpha.axis) +
                                  (sign < 0 ? static_cast<std::size_t>(spec_.dimension) : 0);
                return spec_.weights[row][col];
            }
            case MediumKind::DiagonalSymmetric: {
                long long level = 0;
                for (int v : bspan) level += v;
                return spec_.atoms[static_cast<std::size_t>(atom_at_level(level))][alpha.axis];
            }
        }
        return spec_.c;
    }

    double weight(const Point& x, Direction alpha) const {
        return weight(std::span<const int>(x), alpha);
    }

    // Index of the atom governing the diagonal level sum(x_i).
    int atom_of(std::span<const int> x) const {
        long long level = 0;
        for (int v : x) level += v;
        return atom_at_level(level);
    }
    int atom_of(const Point& x) const { return atom_of(std::span<const int>(x)); }

    int atom_at_level(long long level) const {
        if (spec_.kind != MediumKind::DiagonalSymmetric)
            throw config_error("atom_of requires a diagonal_symmetric medium");
        double u = KeyHash(seed_ ^ mix64(spec_.level_seed), Stream::Level)
                       .word(static_cast<std::uint64_t>(level))
                       .u01();
        return static_cast<int>(detail::cdf_pick(cdf_, u));
    }

  private:
    double edge_u01(std::span<const int> base, int axis, int sign) const {
        KeyHash h(seed_, Stream::Edge);
        h.word(axis).word(sign < 0 ? 1 : 0);
        for (int v : base) h.word(v);
        return h.u01();
    }

    MediumSpec spec_;
    std::uint64_t seed_;
    WeightBounds bounds_;
    std::vector<double> cdf_;
};

}  // namespace fpph
