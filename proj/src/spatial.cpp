#include "navmem/spatial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <json.hpp>

#include "navmem/errors.hpp"

namespace navmem::spatial {

namespace {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string token;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else if (!token.empty()) {
      tokens.push_back(std::move(token));
      token.clear();
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

// Parses a bracketed list accepting single or double quotes:
//   ["chair", 'sofa chair']
std::vector<std::string> parse_quoted_list(const std::string& text,
                                           const std::string& raw) {
  std::vector<std::string> out;
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos ||
      close < open) {
    throw ParseError("expected a bracketed object list", raw);
  }
  std::size_t i = open + 1;
  while (i < close) {
    const char c = text[i];
    if (c == '"' || c == '\'') {
      const auto end = text.find(c, i + 1);
      if (end == std::string::npos || end > close) {
        throw ParseError("unterminated quoted object name", raw);
      }
      out.push_back(text.substr(i + 1, end - i - 1));
      i = end + 1;
    } else {
      ++i;
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> dedup_preserving_order(
    const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (seen.insert(normalize_name(name)).second) out.push_back(name);
  }
  return out;
}

std::optional<Bbox2D> intersect_with_image(double min_x, double min_y,
                                           double max_x, double max_y,
                                           const CameraPose& camera) {
  const double x0 = std::max(min_x, 0.0);
  const double y0 = std::max(min_y, 0.0);
  const double x1 = std::min(max_x, static_cast<double>(camera.width));
  const double y1 = std::min(max_y, static_cast<double>(camera.height));
  if (x0 > x1 || y0 > y1) return std::nullopt;
  return Bbox2D{x0, y0, x1 - x0, y1 - y0};
}

double overlap_area(const Bbox2D& a, const Bbox2D& b) {
  const double w =
      std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double h =
      std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

CameraPose parse_camera(const json& j) {
  CameraPose cam;
  const auto& pos = j.at("position");
  cam.position = {pos[0].get<double>(), pos[1].get<double>(),
                  pos[2].get<double>()};
  cam.heading = j.value("heading", 0.0);
  cam.elevation = j.value("elevation", 0.0);
  cam.focal = j.at("focal").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  return cam;
}

}  // namespace

std::string normalize_name(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (unsigned char c : name) {
    lower.push_back(static_cast<char>(std::tolower(c)));
  }
  return trim(lower);
}

Extraction extract_objects_rule_based(
    const std::string& instruction, const std::set<std::string>& vocabulary) {
  const std::vector<std::string> tokens = tokenize(instruction);

  struct Match {
    std::size_t start;
    std::size_t length;
    const std::string* entry;
  };
  std::vector<Match> matches;
  for (const auto& entry : vocabulary) {
    const std::vector<std::string> needle = tokenize(entry);
    if (needle.empty()) continue;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
      if (std::equal(needle.begin(), needle.end(), tokens.begin() + i)) {
        matches.push_back({i, needle.size(), &entry});
      }
    }
  }
  // Leftmost-longest sweep: earlier starts first, longer runs win overlaps.
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.length != b.length) return a.length > b.length;
    return *a.entry < *b.entry;
  });
  Extraction out;
  std::set<std::string> taken;
  std::size_t covered_until = 0;
  for (const auto& m : matches) {
    if (m.start < covered_until) continue;
    if (!taken.insert(*m.entry).second) continue;
    out.direct.push_back(*m.entry);
    covered_until = m.start + m.length;
  }
  return out;
}

ChatRequest object_extraction_request(const std::string& instruction,
                                      double temperature) {
  ChatRequest req;
  req.temperature = temperature;
  req.system = R"(You analyze indoor navigation instructions.
List the objects a navigator should look for while following the instruction.
'Direct Objects' are objects explicitly mentioned in the instruction, ordered by importance.
'Inferred Objects' are objects not mentioned but likely present along the route or at the destination, ordered by importance.
Reply with exactly these lines and nothing else:
Direct Objects: ["name", ...]
Inferred Objects: ["name", ...]
Destination Spatial Layout: one or two sentences describing the object arrangement at the destination.)";
  req.user = "Instruction: " + instruction;
  return req;
}

Extraction parse_extraction_reply(const std::string& raw) {
  std::optional<std::string> direct_line;
  std::optional<std::string> inferred_line;
  std::optional<std::string> layout_line;
  std::istringstream stream(raw);
  std::string line;
  while (std::getline(stream, line)) {
    const std::string trimmed = trim(line);
    if (trimmed.rfind("Direct Objects:", 0) == 0) {
      direct_line = trimmed.substr(15);
    } else if (trimmed.rfind("Inferred Objects:", 0) == 0) {
      inferred_line = trimmed.substr(17);
    } else if (trimmed.rfind("Destination Spatial Layout:", 0) == 0) {
      layout_line = trim(trimmed.substr(27));
    }
  }
  if (!direct_line) {
    throw ParseError("reply lacks a 'Direct Objects:' line", raw);
  }
  Extraction out;
  out.direct = dedup_preserving_order(parse_quoted_list(*direct_line, raw));
  if (inferred_line) {
    out.inferred =
        dedup_preserving_order(parse_quoted_list(*inferred_line, raw));
  }
  if (layout_line && !layout_line->empty()) {
    out.layout = *layout_line;
  }
  return out;
}

Extraction extract_objects_external(const std::string& instruction,
                                    ChatClient& client) {
  const std::string raw = client.complete(object_extraction_request(instruction));
  return parse_extraction_reply(raw);
}

std::vector<std::string> enhance_observation(
    const std::set<std::string>& visible,
    const std::vector<std::string>& task_objects) {
  std::set<std::string> normalized;
  for (const auto& name : visible) normalized.insert(normalize_name(name));
  std::vector<std::string> out;
  for (const auto& name : task_objects) {
    if (normalized.count(normalize_name(name))) out.push_back(name);
  }
  return out;
}

std::optional<Bbox2D> project_bbox(const ObjectAnnotation& object,
                                   const CameraPose& camera) {
  // Camera basis under the world convention: forward along (heading,
  // elevation), right on the horizon 90 degrees clockwise of the heading,
  // image y measured downward.
  const Vec3 forward = geom::direction_vector(camera.heading, camera.elevation);
  const Vec3 right{std::cos(camera.heading), -std::sin(camera.heading), 0.0};
  const Vec3 up = right.cross(forward);

  const double inf = std::numeric_limits<double>::infinity();
  double min_x = inf, min_y = inf, max_x = -inf, max_y = -inf;
  bool any_in_front = false;
  const double cx = camera.width / 2.0;
  const double cy = camera.height / 2.0;
  for (int mask = 0; mask < 8; ++mask) {
    Vec3 corner = object.center;
    for (int axis = 0; axis < 3; ++axis) {
      const double sign = (mask >> axis) & 1 ? 1.0 : -1.0;
      corner += sign * object.half_extents[axis] * object.axes.col(axis);
    }
    const Vec3 rel = corner - camera.position;
    const double depth = rel.dot(forward);
    if (depth <= 0.0) continue;
    any_in_front = true;
    const double u = cx + camera.focal * rel.dot(right) / depth;
    const double v = cy - camera.focal * rel.dot(up) / depth;
    min_x = std::min(min_x, u);
    max_x = std::max(max_x, u);
    min_y = std::min(min_y, v);
    max_y = std::max(max_y, v);
  }
  if (!any_in_front) return std::nullopt;
  return intersect_with_image(min_x, min_y, max_x, max_y, camera);
}

std::vector<std::pair<std::string, Bbox2D>> filter_visible(
    const std::vector<ObjectAnnotation>& objects, const CameraPose& camera,
    const std::vector<ObjectAnnotation>& others) {
  struct Entry {
    const ObjectAnnotation* object;
    double distance;
    Bbox2D bbox;
  };
  auto make_entries = [&](const std::vector<ObjectAnnotation>& source,
                          bool range_limited) {
    std::vector<Entry> entries;
    for (const auto& obj : source) {
      const double distance = (obj.center - camera.position).norm();
      if (range_limited && distance > kVisibilityRangeMeters) continue;
      const auto bbox = project_bbox(obj, camera);
      if (!bbox) continue;
      entries.push_back({&obj, distance, *bbox});
    }
    return entries;
  };
  const std::vector<Entry> candidates = make_entries(objects, true);
  std::vector<Entry> occluders = make_entries(objects, false);
  for (auto& entry : make_entries(others, false)) {
    occluders.push_back(entry);
  }

  std::vector<std::pair<std::string, Bbox2D>> out;
  for (const auto& cand : candidates) {
    bool occluded = false;
    for (const auto& occ : occluders) {
      if (occ.object == cand.object) continue;
      if (occ.distance >= cand.distance) continue;
      const double area = cand.bbox.area();
      if (area <= 0.0) continue;
      if (overlap_area(cand.bbox, occ.bbox) >=
          kOcclusionOverlapFraction * area) {
        occluded = true;
        break;
      }
    }
    if (!occluded) out.emplace_back(cand.object->name, cand.bbox);
  }
  return out;
}

std::vector<IOSample> load_ios_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_array()) {
    throw ParseError(path + ": expected a JSON array of samples");
  }
  std::vector<IOSample> out;
  for (const auto& sj : j) {
    IOSample sample;
    sample.instruction = sj.at("instruction").get<std::string>();
    sample.direct_objects =
        sj.value("direct_objects", std::vector<std::string>{});
    sample.inferred_objects =
        sj.value("inferred_objects", std::vector<std::string>{});
    sample.layout = sj.value("layout", std::string{});
    out.push_back(std::move(sample));
  }
  return out;
}

void save_ios_file(const std::vector<IOSample>& samples,
                   const std::string& path) {
  json j = json::array();
  for (const auto& sample : samples) {
    j.push_back(json{{"instruction", sample.instruction},
                     {"direct_objects", sample.direct_objects},
                     {"inferred_objects", sample.inferred_objects},
                     {"layout", sample.layout}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

ProjectionFixture load_projection_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("schema_version", 0) != 1) {
    throw ParseError(path + ": unsupported schema_version");
  }
  ProjectionFixture fixture;
  fixture.camera = parse_camera(j.at("camera"));
  for (const auto& oj : j.at("objects")) {
    ObjectAnnotation obj;
    obj.name = oj.at("name").get<std::string>();
    const auto& c = oj.at("center");
    obj.center = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    const auto& h = oj.at("half_extents");
    obj.half_extents = {h[0].get<double>(), h[1].get<double>(),
                        h[2].get<double>()};
    if (oj.contains("axes")) {
      const auto& ax = oj.at("axes");
      for (int i = 0; i < 3; ++i) {
        obj.axes.col(i) = Vec3{ax[i][0].get<double>(), ax[i][1].get<double>(),
                               ax[i][2].get<double>()};
      }
    }
    fixture.objects.push_back(std::move(obj));
  }
  return fixture;
}

}  // namespace navmem::spatial
