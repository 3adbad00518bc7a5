#pragma once

// Spatial reasoning data contracts: instruction/object/layout samples,
// object extraction from instructions (rule-based baseline plus an external
// model hook), observation enhancement, and the oriented-box to image-plane
// projection pipeline with distance and occlusion culling.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "navmem/chat_client.hpp"
#include "navmem/geometry.hpp"
#include "navmem/world.hpp"

namespace navmem::spatial {

using geom::Vec3;
using world::ObjectAnnotation;

// Instruction, ranked direct/inferred object lists, and the destination
// layout prose. Layout strings are opaque; they are passed through to
// prompts untouched.
struct IOSample {
  std::string instruction;
  std::vector<std::string> direct_objects;
  std::vector<std::string> inferred_objects;
  std::string layout;
};

struct Extraction {
  std::vector<std::string> direct;
  std::vector<std::string> inferred;
  std::optional<std::string> layout;
};

struct CameraPose {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;    // clockwise from north
  double elevation = 0.0;  // positive up
  double focal = 500.0;    // pixels
  int width = 1000;
  int height = 1000;
};

struct Bbox2D {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
};

// Canonical object-name form used for all name comparisons: lowercased and
// trimmed, otherwise exact.
std::string normalize_name(const std::string& name);

// Vocabulary entries appearing as consecutive token runs in the lowercased
// instruction, ordered by first occurrence; on overlapping matches the
// longest wins. The baseline infers nothing and produces no layout.
Extraction extract_objects_rule_based(const std::string& instruction,
                                      const std::set<std::string>& vocabulary);

// The prompt sent by extract_objects_external; exposed for tests and for
// callers that drive a client directly.
ChatRequest object_extraction_request(const std::string& instruction,
                                      double temperature = 0.0);

// Asks an external model for direct/inferred object lists and a destination
// layout, and parses the reply. A malformed reply raises ParseError carrying
// the raw text.
Extraction extract_objects_external(const std::string& instruction,
                                    ChatClient& client);

// Parses a model reply of the form produced by object_extraction_request:
//   Direct Objects: ["a", "b"]
//   Inferred Objects: ["c"]
//   Destination Spatial Layout: <prose>   (optional)
Extraction parse_extraction_reply(const std::string& raw);

// task_objects filtered to names present in `visible` (case-insensitive),
// preserving task order.
std::vector<std::string> enhance_observation(
    const std::set<std::string>& visible,
    const std::vector<std::string>& task_objects);

// Projects the eight oriented-box vertices through a pinhole camera and
// returns the axis-aligned hull clipped to the image, or nullopt when no
// vertex has positive depth or the hull misses the image.
std::optional<Bbox2D> project_bbox(const ObjectAnnotation& object,
                                   const CameraPose& camera);

// Survivors of the visibility pipeline: objects within 3 m of the camera
// whose bbox is not overlapped >= 50% in area by the bbox of a strictly
// closer object. `others` can occlude but are never returned.
std::vector<std::pair<std::string, Bbox2D>> filter_visible(
    const std::vector<ObjectAnnotation>& objects, const CameraPose& camera,
    const std::vector<ObjectAnnotation>& others = {});

inline constexpr double kVisibilityRangeMeters = 3.0;
inline constexpr double kOcclusionOverlapFraction = 0.5;

// I-O-S files: a JSON array of {instruction, direct_objects,
// inferred_objects, layout} records.
std::vector<IOSample> load_ios_file(const std::string& path);
void save_ios_file(const std::vector<IOSample>& samples,
                   const std::string& path);

// Projection fixtures: {"schema_version": 1, "camera": {...},
// "objects": [...]} used by projection tests and tools.
struct ProjectionFixture {
  CameraPose camera;
  std::vector<ObjectAnnotation> objects;
};
ProjectionFixture load_projection_fixture(const std::string& path);

}  // namespace navmem::spatial
