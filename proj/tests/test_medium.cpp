#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fpph/medium.hpp"
#include "fpph/rng.hpp"
#include "fpph/serialization.hpp"

using namespace fpph;

namespace {

MediumSpec constant_spec(double c, int d = 2) {
    MediumSpec spec;
    spec.kind = MediumKind::Constant;
    spec.c = c;
    spec.dimension = d;
    return spec;
}

MediumSpec discrete_12(int d = 2, bool undirected = true) {
    MediumSpec spec;
    spec.kind = MediumKind::IidDiscrete;
    spec.values = {1.0, 2.0};
    spec.probs = {0.5, 0.5};
    spec.dimension = d;
    spec.undirected = undirected;
    return spec;
}

Point probe_site(std::uint64_t seed, int trial, int d, int range) {
    Point x(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        double u = KeyHash(seed, Stream::Probe).word(trial).word(k).u01();
        x[static_cast<std::size_t>(k)] = static_cast<int>(u * (2 * range + 1)) - range;
    }
    return x;
}

}  // namespace

TEST_CASE("constant medium returns c everywhere") {
    Environment env(constant_spec(2.0), 42);
    auto dirs = all_directions(2);
    for (int trial = 0; trial < 100; ++trial) {
        Point x = probe_site(1, trial, 2, 1000);
        for (const Direction& a : dirs) CHECK(env.weight(x, a) == 2.0);
    }
}

TEST_CASE("weights stay inside [a, b] for every kind") {
    std::vector<MediumSpec> specs;
    specs.push_back(constant_spec(1.5));
    specs.push_back(discrete_12());
    {
        MediumSpec s;
        s.kind = MediumKind::IidUniform;
        s.lo = 1.0;
        s.hi = 3.0;
        s.dimension = 3;
        specs.push_back(s);
    }
    {
        MediumSpec s;
        s.kind = MediumKind::Periodic;
        s.period = 2;
        s.dimension = 2;
        s.undirected = true;
        s.weights = {{1.0, 2.0}, {1.5, 2.5}, {2.0, 1.0}, {1.25, 1.75}};
        specs.push_back(s);
    }
    {
        MediumSpec s;
        s.kind = MediumKind::DiagonalSymmetric;
        s.dimension = 2;
        s.atoms = {{1.0, 2.0}, {2.0, 1.0}};
        s.probs = {0.5, 0.5};
        specs.push_back(s);
    }
    for (auto& spec : specs) {
        Environment env(spec, 7);
        WeightBounds wb = env.bounds();
        auto dirs = all_directions(spec.dimension);
        for (int trial = 0; trial < 300; ++trial) {
            Point x = probe_site(2, trial, spec.dimension, 50);
            for (const Direction& a : dirs) {
                double w = env.weight(x, a);
                CHECK(w >= wb.a);
                CHECK(w <= wb.b);
            }
        }
    }
}

TEST_CASE("equal (spec, seed) environments agree edge for edge") {
    MediumSpec spec = discrete_12(3);
    Environment e1(spec, 99), e2(spec, 99), e3(spec, 100);
    auto dirs = all_directions(3);
    int differing = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Point x = probe_site(3, trial, 3, 40);
        for (const Direction& a : dirs) {
            CHECK(e1.weight(x, a) == e2.weight(x, a));
            if (e1.weight(x, a) != e3.weight(x, a)) ++differing;
        }
    }
    CHECK(differing > 0);  // different seed, different field
}

TEST_CASE("undirected reversal identity holds exactly") {
    for (MediumKind kind : {MediumKind::IidUniform, MediumKind::IidDiscrete, MediumKind::Periodic}) {
        MediumSpec spec;
        spec.dimension = 2;
        spec.undirected = true;
        spec.kind = kind;
        spec.lo = 1.0;
        spec.hi = 2.0;
        spec.values = {1.0, 2.0};
        spec.probs = {0.5, 0.5};
        spec.period = 3;
        if (kind == MediumKind::Periodic)
            spec.weights.assign(9, std::vector<double>{1.0, 2.0});
        Environment env(spec, 5);
        auto dirs = all_directions(2);
        for (int trial = 0; trial < 2500; ++trial) {
            Point x = probe_site(4, trial, 2, 100);
            for (const Direction& a : dirs) {
                Point y = x;
                y[static_cast<std::size_t>(a.axis)] += a.sign;
                Direction rev{a.axis, -a.sign};
                CHECK(env.weight(x, a) == env.weight(y, rev));
            }
        }
    }
}

TEST_CASE("iid discrete frequencies match the distribution (binomial 4-sigma band)") {
    Environment env(discrete_12(2), 12345);
    const int n_edges = 1000000;
    int ones = 0;
    Direction e1{0, +1};
    Point x(2);
    // distinct undirected edges: step along a line so no edge repeats
    for (int i = 0; i < n_edges; ++i) {
        x[0] = i % 10000;
        x[1] = i / 10000;
        if (env.weight(x, e1) == 1.0) ++ones;
    }
    double freq = static_cast<double>(ones) / n_edges;
    // sigma = sqrt(p(1-p)/n) = 0.0005
    CHECK(std::abs(freq - 0.5) <= 0.002);
}

TEST_CASE("iid uniform mean is shift stationary (two-sample, 3 sigma)") {
    MediumSpec spec;
    spec.kind = MediumKind::IidUniform;
    spec.lo = 1.0;
    spec.hi = 2.0;
    spec.dimension = 2;
    Environment env(spec, 2024);
    auto box_mean = [&](int cx, int cy, int half) {
        double sum = 0;
        long count = 0;
        Direction e1{0, +1};
        Direction e2{1, +1};
        Point x(2);
        for (int i = -half; i < half; ++i)
            for (int j = -half; j < half; ++j) {
                x[0] = cx + i;
                x[1] = cy + j;
                sum += env.weight(x, e1) + env.weight(x, e2);
                count += 2;
            }
        return std::pair<double, long>(sum / static_cast<double>(count), count);
    };
    auto [m1, n1] = box_mean(0, 0, 120);
    auto [m2, n2] = box_mean(1017, -533, 120);
    double sigma = (spec.hi - spec.lo) / std::sqrt(12.0);
    double band = 3.0 * sigma * std::sqrt(1.0 / n1 + 1.0 / n2);
    CHECK(std::abs(m1 - m2) <= band);
}

TEST_CASE("atom_of depends on x only through the diagonal level") {
    MediumSpec spec;
    spec.kind = MediumKind::DiagonalSymmetric;
    spec.dimension = 2;
    spec.atoms = {{1.0, 2.0}, {2.0, 1.0}};
    spec.probs = {0.25, 0.75};
    Environment env(spec, 77);
    CHECK(env.atom_of(Point{3, -1}) == env.atom_of(Point{0, 2}));
    CHECK(env.atom_of(Point{5, 5}) == env.atom_of(Point{10, 0}));

    // single atom: always index 0
    MediumSpec single = spec;
    single.atoms = {{1.0, 1.0}};
    single.probs = {1.0};
    Environment env1(single, 3);
    for (int l = -5; l <= 5; ++l) CHECK(env1.atom_at_level(l) == 0);

    // wrong-kind error
    Environment cst(constant_spec(1.0), 0);
    CHECK_THROWS_AS(cst.atom_of(Point{0, 0}), config_error);
}

TEST_CASE("diagonal-symmetric level frequencies match pi") {
    MediumSpec spec;
    spec.kind = MediumKind::DiagonalSymmetric;
    spec.dimension = 2;
    spec.atoms = {{1.0, 2.0}, {2.0, 1.0}};
    spec.probs = {0.25, 0.75};
    Environment env(spec, 31);
    const int levels = 100000;
    int count0 = 0;
    for (int l = 0; l < levels; ++l)
        if (env.atom_at_level(l) == 0) ++count0;
    double freq = static_cast<double>(count0) / levels;
    double sigma = std::sqrt(0.25 * 0.75 / levels);
    CHECK(std::abs(freq - 0.25) <= 4.0 * sigma);
}

TEST_CASE("diagonal-symmetric weights are constant on hyperplanes and undirected") {
    MediumSpec spec;
    spec.kind = MediumKind::DiagonalSymmetric;
    spec.dimension = 2;
    spec.atoms = {{1.0, 2.0}, {2.0, 1.0}};
    spec.probs = {0.5, 0.5};
    Environment env(spec, 8);
    auto dirs = all_directions(2);
    for (int trial = 0; trial < 500; ++trial) {
        Point x = probe_site(6, trial, 2, 30);
        Point same_level{x[0] + 4, x[1] - 4};
        for (const Direction& a : dirs) {
            CHECK(env.weight(x, a) == env.weight(same_level, a));
            Point y = x;
            y[static_cast<std::size_t>(a.axis)] += a.sign;
            CHECK(env.weight(x, a) == env.weight(y, Direction{a.axis, -a.sign}));
        }
    }
}

TEST_CASE("spec validation rejects malformed inputs") {
    MediumSpec bad = discrete_12();
    bad.probs = {0.5, 0.4};  // sums to 0.9
    CHECK_THROWS_AS(Environment(bad, 1), config_error);

    MediumSpec neg = discrete_12();
    neg.values = {1.0, -2.0};
    CHECK_THROWS_AS(Environment(neg, 1), config_error);

    MediumSpec zero_dim = constant_spec(1.0, 0);
    CHECK_THROWS_AS(Environment(zero_dim, 1), config_error);

    MediumSpec directed_diag;
    directed_diag.kind = MediumKind::DiagonalSymmetric;
    directed_diag.dimension = 2;
    directed_diag.undirected = false;
    directed_diag.atoms = {{1.0, 1.0}};
    directed_diag.probs = {1.0};
    CHECK_THROWS_AS(Environment(directed_diag, 1), config_error);

    MediumSpec short_period;
    short_period.kind = MediumKind::Periodic;
    short_period.dimension = 2;
    short_period.period = 2;
    short_period.weights = {{1.0, 1.0}};  // needs 4 rows
    CHECK_THROWS_AS(Environment(short_period, 1), config_error);
}

TEST_CASE("probability dust within 1e-12 is renormalized") {
    MediumSpec spec = discrete_12();
    spec.probs = {0.5 + 4e-13, 0.5 - 6e-13};
    Environment env(spec, 1);
    double sum = env.spec().probs[0] + env.spec().probs[1];
    CHECK(std::abs(sum - 1.0) <= 1e-15);
}

TEST_CASE("medium spec JSON round-trips for every kind") {
    std::vector<MediumSpec> specs;
    specs.push_back(constant_spec(2.0));
    specs.push_back(discrete_12(3, false));
    {
        MediumSpec s;
        s.kind = MediumKind::IidUniform;
        s.lo = 1.0;
        s.hi = 2.5;
        s.dimension = 1;
        specs.push_back(s);
    }
    {
        MediumSpec s;
        s.kind = MediumKind::Periodic;
        s.period = 2;
        s.dimension = 1;
        s.undirected = false;
        s.weights = {{1.0, 2.0}, {2.0, 1.0}};
        specs.push_back(s);
    }
    {
        MediumSpec s;
        s.kind = MediumKind::DiagonalSymmetric;
        s.dimension = 2;
        s.atoms = {{1.0, 2.0}, {2.0, 1.0}};
        s.probs = {0.5, 0.5};
        s.level_seed = 9;
        specs.push_back(s);
    }
    for (auto& spec : specs) {
        spec.validate();
        auto j = to_json(spec);
        MediumSpec back = medium_spec_from_json(j);
        CHECK(to_json(back) == j);
        CHECK(medium_spec_hash(back) == medium_spec_hash(spec));
        // the round-tripped spec drives an identical environment
        Environment a(spec, 11), b(back, 11);
        auto dirs = all_directions(spec.dimension);
        for (int trial = 0; trial < 50; ++trial) {
            Point x = probe_site(8, trial, spec.dimension, 20);
            for (const Direction& dir : dirs) CHECK(a.weight(x, dir) == b.weight(x, dir));
        }
    }
}
