#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "navmem/errors.hpp"
#include "navmem/viewgeom.hpp"

using namespace navmem;
using geom::Direction;
using viewgeom::CandidateCache;
using viewgeom::ViewGrid;

namespace {

constexpr double deg(double d) { return d * geom::kPi / 180.0; }

// Exhaustive oracle over the 36 views with its own wrap arithmetic.
int brute_force_best_view(const Direction& target) {
  int best = -1;
  double best_dist = 1e300;
  for (int k = 0; k < 36; ++k) {
    const double heading = deg(30.0 * (k % 12));
    const double elevation = deg(30.0 * (k / 12 - 1));
    double dh = std::fmod(std::abs(heading - target.heading), 2.0 * geom::kPi);
    if (dh > geom::kPi) dh = 2.0 * geom::kPi - dh;
    const double dist = dh + std::abs(elevation - target.elevation);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("the grid covers 12 headings by 3 elevations") {
  CHECK(ViewGrid::kViews == 36);
  CHECK(ViewGrid::heading_of(0) == 0.0);
  CHECK(ViewGrid::heading_of(11) == doctest::Approx(deg(330.0)));
  CHECK(ViewGrid::elevation_of(0) == doctest::Approx(deg(-30.0)));
  CHECK(ViewGrid::elevation_of(12) == 0.0);
  CHECK(ViewGrid::elevation_of(35) == doctest::Approx(deg(30.0)));
  CHECK(ViewGrid::view_index(1, 3) == 15);
}

TEST_CASE("target_direction follows the axis convention") {
  using geom::Vec3;
  SUBCASE("due north, level") {
    const auto d = viewgeom::target_direction({0, 0, 0}, {0, 4, 0});
    CHECK(d.heading == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.elevation == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("straight up hits the pole convention") {
    const auto d = viewgeom::target_direction({1, 1, 0}, {1, 1, 7});
    CHECK(d.heading == 0.0);
    CHECK(d.elevation == doctest::Approx(geom::kPi / 2));
  }
  SUBCASE("zero displacement is an error") {
    CHECK_THROWS_AS(viewgeom::target_direction({1, 2, 3}, {1, 2, 3}), Error);
  }
  SUBCASE("random displacements match a trigonometric oracle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
      const Vec3 from{coord(rng), coord(rng), coord(rng)};
      const Vec3 to{coord(rng), coord(rng), coord(rng)};
      const Vec3 delta = to - from;
      if (delta.norm() < 1e-9) continue;
      const auto d = viewgeom::target_direction(from, to);
      const double expected_heading =
          geom::normalize_angle(geom::kPi / 2.0 - std::atan2(delta.y(), delta.x()));
      const double expected_elevation = std::asin(delta.z() / delta.norm());
      CHECK(std::abs(geom::wrap_angle(d.heading - expected_heading)) < 1e-9);
      CHECK(std::abs(d.elevation - expected_elevation) < 1e-9);
    }
  }
}

TEST_CASE("select_best_view is the wrapped-L1 argmin") {
  ViewGrid grid;
  SUBCASE("a target exactly on a grid view selects it") {
    for (int k = 0; k < 36; ++k) {
      const Direction target{ViewGrid::heading_of(k), ViewGrid::elevation_of(k)};
      CHECK(viewgeom::select_best_view(grid, target) == k);
    }
  }
  SUBCASE("359 degrees wraps to the 0-degree heading") {
    const Direction target{deg(359.0), 0.0};
    const int k = viewgeom::select_best_view(grid, target);
    CHECK(k == ViewGrid::view_index(1, 0));
    CHECK(k == brute_force_best_view(target));
  }
  SUBCASE("exact ties go to the lower view index") {
    const Direction target{deg(15.0), 0.0};
    CHECK(viewgeom::select_best_view(grid, target) ==
          ViewGrid::view_index(1, 0));
  }
  SUBCASE("wrap invariance") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> h(0.0, 2.0 * geom::kPi);
    std::uniform_real_distribution<double> e(-geom::kPi / 2, geom::kPi / 2);
    for (int i = 0; i < 500; ++i) {
      const Direction target{h(rng), e(rng)};
      const Direction shifted{target.heading + 2.0 * geom::kPi,
                              target.elevation};
      CHECK(viewgeom::select_best_view(grid, target) ==
            viewgeom::select_best_view(grid, shifted));
    }
  }
  SUBCASE("matches the exhaustive oracle on random targets") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> h(0.0, 2.0 * geom::kPi);
    std::uniform_real_distribution<double> e(-geom::kPi / 2, geom::kPi / 2);
    for (int i = 0; i < 2000; ++i) {
      const Direction target{h(rng), e(rng)};
      CHECK(viewgeom::select_best_view(grid, target) ==
            brute_force_best_view(target));
    }
  }
  SUBCASE("selected distance is within half grid spacing in the band") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> h(0.0, 2.0 * geom::kPi);
    std::uniform_real_distribution<double> e(deg(-30.0), deg(30.0));
    for (int i = 0; i < 2000; ++i) {
      const Direction target{h(rng), e(rng)};
      const int k = viewgeom::select_best_view(grid, target);
      const double dist =
          std::abs(geom::wrap_angle(ViewGrid::heading_of(k) - target.heading)) +
          std::abs(ViewGrid::elevation_of(k) - target.elevation);
      CHECK(dist <= deg(45.0) + 1e-12);
    }
  }
}

TEST_CASE("discover_candidates maps neighbors onto the view grid") {
  SUBCASE("an isolated node has no candidates") {
    const auto scene = world::Scene::from_viewpoints(
        "solo", {{"only", {0, 0, 0}, {}, {}}});
    CandidateCache cache;
    CHECK(viewgeom::discover_candidates(scene, "only", cache).empty());
  }
  SUBCASE("a level neighbor due east gets the east-facing level view") {
    const auto scene = world::Scene::from_viewpoints(
        "pair", {{"a", {0, 0, 0}, {"b"}, {}}, {"b", {3, 0, 0}, {"a"}, {}}});
    CandidateCache cache;
    const auto candidates = viewgeom::discover_candidates(scene, "a", cache);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].target == "b");
    // East = heading 90 degrees = column 3; level = row 1.
    CHECK(candidates[0].optimized_view == ViewGrid::view_index(1, 3));
    CHECK(candidates[0].direction.heading == doctest::Approx(geom::kPi / 2));
    CHECK(candidates[0].position == geom::Vec3{3, 0, 0});
    // The discovery scan runs the low elevation row first.
    CHECK(candidates[0].discovered_view == ViewGrid::view_index(0, 3));
  }
  SUBCASE("the second visit is served from the cache") {
    const auto scene = testutil::grid_scene(3, 3);
    CandidateCache cache;
    const auto first = viewgeom::discover_candidates(scene, "r01c01", cache);
    CHECK(cache.misses() == 1);
    const auto second = viewgeom::discover_candidates(scene, "r01c01", cache);
    CHECK(cache.misses() == 1);  // no recomputation
    CHECK(cache.lookups() == 2);
    CHECK(first == second);
  }
  SUBCASE("cache transparency: hits equal recomputation") {
    std::mt19937_64 rng(31);
    const auto scene = testutil::random_scene(rng, 12);
    CandidateCache warm;
    CandidateCache cold;
    for (const auto& vp : scene.viewpoints()) {
      const auto a = viewgeom::discover_candidates(scene, vp.id, warm);
      const auto b = viewgeom::discover_candidates(scene, vp.id, warm);
      const auto fresh = viewgeom::discover_candidates(scene, vp.id, cold);
      CHECK(a == b);
      CHECK(a == fresh);
    }
  }
}
