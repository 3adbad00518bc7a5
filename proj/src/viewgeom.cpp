#include "navmem/viewgeom.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "navmem/errors.hpp"

namespace navmem::viewgeom {

namespace {

// Per-view field of view used by the simulated discovery scan: a target is
// considered visible from a view when it lies within 30 degrees of the view
// heading and 30 degrees of the view elevation.
constexpr double kScanHalfFovHeading = geom::kPi / 6.0;
constexpr double kScanHalfFovElevation = geom::kPi / 6.0;

}  // namespace

double ViewGrid::heading_of(int view) {
  const int col = view % kHeadings;
  return geom::degrees_to_radians(30.0 * col);
}

double ViewGrid::elevation_of(int view) {
  const int row = view / kHeadings;
  return geom::degrees_to_radians(30.0 * (row - 1));
}

Direction target_direction(const Vec3& from, const Vec3& to) {
  const Vec3 delta = to - from;
  if (delta.isZero(0.0)) {
    throw Error("degenerate direction: identical positions");
  }
  return geom::direction_of(delta);
}

int select_best_view(const ViewGrid& grid, const Direction& target) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ViewGrid::kViews; ++k) {
    const double dist =
        std::abs(geom::wrap_angle(grid.heading_of(k) - target.heading)) +
        std::abs(grid.elevation_of(k) - target.elevation);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

const std::vector<CandidateView>* CandidateCache::find(
    const std::string& scene_id, const std::string& viewpoint) const {
  std::shared_lock lock(mutex_);
  ++lookups_;
  auto it = entries_.find({scene_id, viewpoint});
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  return &it->second;
}

void CandidateCache::insert(const std::string& scene_id,
                            const std::string& viewpoint,
                            std::vector<CandidateView> candidates) {
  std::unique_lock lock(mutex_);
  entries_[{scene_id, viewpoint}] = std::move(candidates);
}

std::vector<CandidateView> discover_candidates(const world::Scene& scene,
                                               const std::string& at,
                                               CandidateCache& cache) {
  if (const auto* hit = cache.find(scene.scene_id(), at)) {
    return *hit;
  }
  const world::Viewpoint& here = scene.viewpoint(at);
  ViewGrid grid;
  std::vector<CandidateView> out;
  for (const auto& nbr : here.neighbors) {
    const world::Viewpoint& other = scene.viewpoint(nbr);
    CandidateView cand;
    cand.target = nbr;
    cand.position = other.position;
    cand.direction = target_direction(here.position, other.position);
    cand.optimized_view = select_best_view(grid, cand.direction);
    // Scan views in index order (lowest elevation row first); the first view
    // whose field of view contains the target is where it was discovered.
    // Targets steeper than any view's reach fall back to the best view.
    cand.discovered_view = cand.optimized_view;
    for (int k = 0; k < ViewGrid::kViews; ++k) {
      const double dh = std::abs(
          geom::wrap_angle(grid.heading_of(k) - cand.direction.heading));
      const double de =
          std::abs(grid.elevation_of(k) - cand.direction.elevation);
      if (dh <= kScanHalfFovHeading && de <= kScanHalfFovElevation) {
        cand.discovered_view = k;
        break;
      }
    }
    out.push_back(std::move(cand));
  }
  cache.insert(scene.scene_id(), at, out);
  return out;
}

}  // namespace navmem::viewgeom
