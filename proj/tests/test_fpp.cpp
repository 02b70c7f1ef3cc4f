#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fpph/fpp.hpp"
#include "fpph/medium.hpp"
#include "fpph/oracles.hpp"
#include "fpph/verify.hpp"

using namespace fpph;

namespace {

MediumSpec constant_spec(double c, int d = 2) {
    MediumSpec spec;
    spec.kind = MediumKind::Constant;
    spec.c = c;
    spec.dimension = d;
    return spec;
}

// Literal enumeration of every simple path from the source, tracking the
// cheapest arrival time per site. Exponential; only for tiny boxes. This
// cross-checks the iterative-relaxation oracle itself.
void dfs_simple_paths(const Environment& env, const Box& box, Point& site, double time,
                      std::set<Point>& on_path, std::map<Point, double>& best) {
    auto it = best.find(site);
    if (it == best.end() || time < it->second) best[site] = time;
    for (const Direction& a : all_directions(env.dimension())) {
        Point next = site;
        next[static_cast<std::size_t>(a.axis)] += a.sign;
        if (!box.contains(next) || on_path.count(next)) continue;
        double w = env.weight(site, a);
        on_path.insert(next);
        std::swap(site, next);
        dfs_simple_paths(env, box, site, time + w, on_path, best);
        std::swap(site, next);
        on_path.erase(next);
    }
}

}  // namespace

TEST_CASE("constant medium: passage time is c * l1 distance") {
    for (double c : {1.0, 2.0}) {
        Environment env(constant_spec(c), 1);
        Point origin{0, 0};
        auto field = passage_times(env, origin, Box(origin, 9));
        CHECK(field.at(origin) == 0.0);
        CHECK(field.at(Point{3, 4}) == 7.0 * c);
        CHECK(field.at(Point{-2, 5}) == 7.0 * c);
        CHECK(field.at(Point{0, -9}) == 9.0 * c);
    }
}

TEST_CASE("passage times match exhaustive path enumeration on small boxes") {
    for (int trial = 0; trial < 5; ++trial) {
        MediumSpec spec = verify::random_iid_spec(900 + trial, 2);
        Environment env(spec, 4000 + trial);
        Point origin{0, 0};
        Box box(origin, 2);
        auto field = passage_times(env, origin, box);
        auto oracle = oracles::bellman_ford_times(env, origin, box);
        field.for_each([&](std::span<const int> y, double v) {
            CHECK(v == oracle[box.index(y)]);
        });

        // meta-check: iterative relaxation agrees with literal simple-path DFS
        std::map<Point, double> best;
        std::set<Point> on_path{origin};
        Point site = origin;
        dfs_simple_paths(env, box, site, 0.0, on_path, best);
        for (const auto& [y, t] : best)
            CHECK(field.at(y) == Catch::Approx(t).margin(1e-13));
    }
}

TEST_CASE("interior DPP identity holds exactly") {
    MediumSpec spec = verify::random_iid_spec(17, 2);
    spec.undirected = false;  // directed weights exercise the edge orientation
    Environment env(spec, 23);
    Point origin{0, 0};
    Box box(origin, 5);
    auto field = passage_times(env, origin, box);
    auto dirs = all_directions(2);
    field.for_each([&](std::span<const int> y, double v) {
        if (box.center_distance(y) >= box.radius()) return;
        if (y[0] == 0 && y[1] == 0) return;
        double best = kUnreached;
        for (const Direction& a : dirs) {
            Point u(y.begin(), y.end());
            u[static_cast<std::size_t>(a.axis)] -= a.sign;
            best = std::min(best, field.at(u) + env.weight(u, a));
        }
        CHECK(v == best);
    });
}

TEST_CASE("safe_radius formula") {
    CHECK(safe_radius(Point{3, 4}, WeightBounds{1.0, 1.0}) == 8);
    CHECK(safe_radius(Point{5, 0}, WeightBounds{1.0, 2.0}) == 11);
    CHECK(safe_radius(Point{0, 0}, WeightBounds{1.0, 3.0}) == 1);
}

TEST_CASE("truncation at safe_radius never changes the passage time") {
    for (int trial = 0; trial < 20; ++trial) {
        MediumSpec spec = verify::random_iid_spec(501 + trial, 2);
        Environment env(spec, 7000 + trial);
        Point target{4, -3};
        Point origin{0, 0};
        int r = safe_radius(target, env.bounds());
        auto tight = passage_times(env, origin, Box(origin, r));
        auto loose = passage_times(env, origin, Box(origin, 2 * r));
        CHECK(tight.at(target) == loose.at(target));
    }
}

TEST_CASE("reachable set basics") {
    Environment env(constant_spec(1.0), 2);
    Point origin{0, 0};

    auto r0 = reachable_set(env, origin, 0.0, Box(origin, 3));
    REQUIRE(r0.members.size() == 1);
    CHECK(r0.members[0] == origin);

    auto r25 = reachable_set(env, origin, 2.5, Box(origin, 5));
    CHECK(r25.members.size() == 13);  // l1 ball of radius 2 in d=2

    CHECK_THROWS_AS(reachable_set(env, origin, 10.0, Box(origin, 3)), config_error);
}

TEST_CASE("reachable set matches enumeration threshold on random media") {
    for (int trial = 0; trial < 5; ++trial) {
        MediumSpec spec = verify::random_iid_spec(1200 + trial, 2);
        Environment env(spec, 60 + trial);
        Point origin{0, 0};
        double t = 3.2;
        auto rs = reachable_set(env, origin, t, Box(origin, 8));
        auto brute = oracles::reachable_enumeration(env, origin, t);
        CHECK(rs.members.size() == brute.size());
        for (const auto& y : brute) CHECK(rs.contains(y));
    }
}

TEST_CASE("monotone reachability in t") {
    MediumSpec spec = verify::random_iid_spec(3, 2);
    Environment env(spec, 99);
    Point origin{0, 0};
    Box box(origin, 10);
    auto small = reachable_set(env, origin, 3.0, box);
    auto large = reachable_set(env, origin, 6.0, box);
    CHECK(small.members.size() <= large.members.size());
    for (const auto& y : small.members) CHECK(large.contains(y));
}

TEST_CASE("passage times obey a|y|_1 <= T <= b|y|_1") {
    MediumSpec spec = verify::random_iid_spec(4, 2);
    Environment env(spec, 321);
    Point origin{0, 0};
    auto field = passage_times(env, origin, Box(origin, 8));
    WeightBounds wb = env.bounds();
    field.for_each([&](std::span<const int> y, double v) {
        double l1 = static_cast<double>(l1_norm(y));
        // the straight path to y stays in the box, so the upper bound applies
        CHECK(v >= wb.a * l1 - 1e-12);
        CHECK(v <= wb.b * l1 + 1e-12);
    });
}

TEST_CASE("subadditivity on sampled site pairs") {
    MediumSpec spec = verify::random_iid_spec(5, 2);
    Environment env(spec, 55);
    Point origin{0, 0};
    auto from0 = passage_times(env, origin, Box(origin, 12));
    for (int trial = 0; trial < 30; ++trial) {
        auto pick = [&](int salt, int range) {
            Point y(2);
            for (int k = 0; k < 2; ++k)
                y[static_cast<std::size_t>(k)] = static_cast<int>(
                    KeyHash(777, Stream::Probe).word(trial).word(salt + k).u01() *
                    (2 * range + 1)) - range;
            return y;
        };
        Point y1 = pick(0, 3);
        Point y2 = pick(10, 3);
        Point sum{y1[0] + y2[0], y1[1] + y2[1]};
        auto from_y1 = passage_times(env, y1, Box(y1, 12));
        CHECK(from0.at(sum) <= from0.at(y1) + from_y1.at(sum) + 1e-12);
    }
}

TEST_CASE("time constant on constant media is exact for every n") {
    Environment env(constant_spec(2.0), 10);
    for (long long n : {3LL, 10LL, 57LL}) {
        auto est = time_constant(env, {1.0, 0.0}, n, 2);
        CHECK(est.value == 2.0);
        CHECK(est.stderr_ == 0.0);
    }
    Environment unit(constant_spec(1.0), 11);
    auto diag = time_constant(unit, {1.0, 1.0}, 40, 2);
    CHECK(diag.value == 2.0);
}

TEST_CASE("time constant LLN in d=1") {
    MediumSpec spec;
    spec.kind = MediumKind::IidDiscrete;
    spec.values = {1.0, 2.0};
    spec.probs = {0.5, 0.5};
    spec.dimension = 1;
    spec.undirected = false;
    Environment env(spec, 2718);
    auto est = time_constant(env, {1.0}, 10000, 8);
    CHECK(est.stderr_ > 0);
    CHECK(std::abs(est.value - 1.5) <= 3.0 * est.stderr_);
}

TEST_CASE("nearest lattice point breaks half ties toward smaller coordinates") {
    CHECK(nearest_lattice_point(std::vector<double>{2.5, -2.5}) == Point{2, -3});
    CHECK(nearest_lattice_point(std::vector<double>{2.4, 2.6}) == Point{2, 3});
    CHECK(nearest_lattice_point(std::vector<double>{-0.5, 0.0}) == Point{-1, 0});
}

TEST_CASE("replica sweeps are deterministic and scheduling independent") {
    MediumSpec spec = verify::random_iid_spec(6, 2);
    Environment env(spec, 12);
    auto grid = std::vector<std::vector<double>>{{1.0, 0.0}, {0.7071, 0.7071}};
    auto run1 = time_constants(env, grid, 50, 6);
    auto run2 = time_constants(env, grid, 50, 6);
    for (std::size_t i = 0; i < run1.size(); ++i) {
        CHECK(run1[i].value == run2[i].value);
        CHECK(run1[i].samples == run2[i].samples);
    }
}

TEST_CASE("oversized boxes raise a capacity error") {
    Environment env(constant_spec(1.0), 1);
    Point origin{0, 0};
    CHECK_THROWS_AS(passage_times(env, origin, Box(origin, 4000)), config_error);
}
