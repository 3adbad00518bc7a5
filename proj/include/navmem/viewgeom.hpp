#pragma once

// Viewpoint-selection geometry: the 36-view discrete camera grid, target
// direction computation, the wrapped-L1 best-view argmin, and a per-location
// candidate cache.

#include <atomic>
#include <cstddef>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

#include "navmem/geometry.hpp"
#include "navmem/world.hpp"

namespace navmem::viewgeom {

using geom::Direction;
using geom::Vec3;

// 12 headings (0..330 deg in 30 deg steps) x 3 elevations (-30, 0, +30 deg),
// indexed view = elevation_row * 12 + heading_col with row 0 the lowest
// elevation.
class ViewGrid {
 public:
  static constexpr int kHeadings = 12;
  static constexpr int kElevations = 3;
  static constexpr int kViews = kHeadings * kElevations;

  static double heading_of(int view);
  static double elevation_of(int view);
  static int view_index(int elevation_row, int heading_col) {
    return elevation_row * kHeadings + heading_col;
  }
};

// Direction of `to` as seen from `from`. Throws on zero displacement. At the
// elevation poles the heading is fixed to 0.
Direction target_direction(const Vec3& from, const Vec3& to);

// Index of the grid view minimizing |wrap(heading_k - heading)| +
// |elevation_k - elevation|; heading differences wrap into (-pi, pi],
// elevation differences do not. Ties go to the smallest view index.
int select_best_view(const ViewGrid& grid, const Direction& target);

struct CandidateView {
  std::string target;
  int discovered_view = 0;  // first scan view whose field of view saw it
  int optimized_view = 0;   // best-facing view (wrapped-L1 argmin)
  Direction direction{0.0, 0.0};
  Vec3 position = Vec3::Zero();

  bool operator==(const CandidateView& o) const {
    return target == o.target && discovered_view == o.discovered_view &&
           optimized_view == o.optimized_view &&
           direction.heading == o.direction.heading &&
           direction.elevation == o.direction.elevation &&
           position == o.position;
  }
};

// Pre-computed candidates per (scene_id, viewpoint id). Concurrent readers,
// exclusive insertion; a cache hit is structurally equal to recomputation.
class CandidateCache {
 public:
  const std::vector<CandidateView>* find(const std::string& scene_id,
                                         const std::string& viewpoint) const;
  void insert(const std::string& scene_id, const std::string& viewpoint,
              std::vector<CandidateView> candidates);

  std::size_t lookups() const { return lookups_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::vector<CandidateView>>
      entries_;
  mutable std::atomic<std::size_t> lookups_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

// Candidate views for every neighbor navigable from `at`, computed on a
// cache miss via a simulated 36-view scan and stored for future visits.
std::vector<CandidateView> discover_candidates(const world::Scene& scene,
                                               const std::string& at,
                                               CandidateCache& cache);

}  // namespace navmem::viewgeom
