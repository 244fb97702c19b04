#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Exact agreement between the production solvers and brute-force references
// on small random instances. Distances must match bit-for-bit: Dijkstra and
// Bellman-Ford both evaluate the same left-folded path sum.

#include "lfpp/metric.hpp"
#include "lfpp/rng.hpp"
#include "test_support.hpp"

using namespace lfpp;

namespace {

const GridSpec kTiny{16, 1.0};

LatticeMetric random_patch_metric(std::uint64_t seed, double xi = 0.5) {
    const CounterRng rng(seed, 0, RngStream::Generic);
    Eigen::ArrayXXd vals(kTiny.n, kTiny.n);
    for (int y = 0; y < kTiny.n; ++y)
        for (int x = 0; x < kTiny.n; ++x)
            vals(x, y) = rng.gaussian(std::uint64_t(y) * kTiny.n + std::uint64_t(x));
    return build_metric_from_values(kTiny, vals, xi);
}

std::vector<Vertex> box_vertices(int x0, int y0, int w, int h) {
    std::vector<Vertex> out;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) out.push_back({x, y});
    return out;
}

}  // namespace

TEST_CASE("distance equals Bellman-Ford on 6x6 patches, 50 instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const LatticeMetric m = random_patch_metric(seed);
        const auto region = box_vertices(2, 2, 6, 6);
        const CounterRng rng(seed + 1000, 0, RngStream::PairSampling);
        const Vertex a{2 + int(rng.uniform_int(0, 6)), 2 + int(rng.uniform_int(1, 6))};
        Vertex b = a;
        for (std::uint64_t i = 2; b == a; i += 2)
            b = Vertex{2 + int(rng.uniform_int(i, 6)), 2 + int(rng.uniform_int(i + 1, 6))};
        const Vertex as[1] = {a}, bs[1] = {b};
        const Region reg = Region::from_vertices(kTiny, region);
        const double got = internal_distance(m, as, bs, reg);
        const double want = test::bellman_ford_set_distance(m, region, {a}, {b});
        CHECK(got == want);  // bit-exact
    }
}

TEST_CASE("unrestricted distance equals Bellman-Ford over the whole torus") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 77);
        std::vector<Vertex> whole;
        for (int y = 0; y < kTiny.n; ++y)
            for (int x = 0; x < kTiny.n; ++x) whole.push_back({x, y});
        const Vertex a{1, 2}, b{11, 13};
        const Vertex as[1] = {a}, bs[1] = {b};
        CHECK(distance(m, as, bs).distance ==
              test::bellman_ford_set_distance(m, whole, {a}, {b}));
    }
}

TEST_CASE("internal distance on an annulus equals restricted Bellman-Ford") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 300);
        const AnnulusSpec a{grid_center(kTiny), 2 * kTiny.spacing(), 5 * kTiny.spacing()};
        const Region reg = Region::annulus(kTiny, a);
        const auto verts = reg.vertices();
        REQUIRE(verts.size() >= 8);
        const Vertex p = verts.front(), q = verts.back();
        if (p == q) continue;
        const Vertex ps[1] = {p}, qs[1] = {q};
        CHECK(internal_distance(m, ps, qs, reg) ==
              test::bellman_ford_set_distance(m, verts, {p}, {q}));
    }
}

TEST_CASE("across equals Bellman-Ford between annulus boundaries") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 4000);
        const AnnulusSpec a{grid_center(kTiny), 2 * kTiny.spacing(), 5 * kTiny.spacing()};
        const Region reg = Region::annulus(kTiny, a);
        const auto want = test::bellman_ford_set_distance(
            m, reg.vertices(), annulus_inner_boundary(kTiny, a),
            annulus_outer_boundary(kTiny, a));
        CHECK(across(m, a) == want);
    }
}

TEST_CASE("crossing distance equals restricted Bellman-Ford") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 5000);
        const int k = 5;
        const auto region = box_vertices(4, 6, k + 1, k + 1);
        std::vector<Vertex> left, right;
        for (int j = 0; j <= k; ++j) {
            left.push_back({4, 6 + j});
            right.push_back({4 + k, 6 + j});
        }
        const double got = crossing_distance(m, k * kTiny.spacing(),
                                             Point{4 * kTiny.spacing(), 6 * kTiny.spacing()});
        CHECK(got == test::bellman_ford_set_distance(m, region, left, right));
    }
}

TEST_CASE("geodesic length equals Bellman-Ford distance") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 6000);
        std::vector<Vertex> whole;
        for (int y = 0; y < kTiny.n; ++y)
            for (int x = 0; x < kTiny.n; ++x) whole.push_back({x, y});
        const auto p = geodesic(m, {3, 3}, {12, 10});
        CHECK(p.length == test::bellman_ford_set_distance(m, whole, {{3, 3}}, {{12, 10}}));
    }
}

TEST_CASE("around equals exhaustive separating-cycle enumeration, 50 instances") {
    // 6x6-footprint ring: small enough for full enumeration, with enough
    // corner shortcuts to make the optimum instance-dependent.
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 9000, 0.6);
        const AnnulusSpec a{grid_center(kTiny), 2 * kTiny.spacing(), 2.9 * kTiny.spacing()};
        test::SeparatingCycleEnumerator oracle(m, a);
        const auto [want, want_cycle] = oracle.run();
        REQUIRE(want < kUnreachable);
        const double got = around(m, a);
        CHECK(got == want);  // bit-exact: canonical edge-sorted sums on both sides
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("around matches enumeration on a wider ring") {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const LatticeMetric m = random_patch_metric(seed + 9000, 0.6);
        const AnnulusSpec a{grid_center(kTiny), 2 * kTiny.spacing(), 3.7 * kTiny.spacing()};
        test::SeparatingCycleEnumerator oracle(m, a);
        const auto [want, want_cycle] = oracle.run();
        CHECK(around(m, a) == want);
    }
}
