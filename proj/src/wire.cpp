#include "domcity/wire.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include "json.hpp"

namespace domcity {

std::string content_hash(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace domcity

namespace domcity::wire {
namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::kSchema, "schema error: " + what); }

// ---------------------------------------------------------------------------
// Writing

void put_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

void put_number(std::string& out, double v) { out += format_number(v); }

void put_vec3(std::string& out, const Vec3& v) {
  out += '[';
  put_number(out, v.x);
  out += ',';
  put_number(out, v.y);
  out += ',';
  put_number(out, v.z);
  out += ']';
}

void put_path(std::string& out, const NodePath& p) {
  out += '[';
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(p.steps[i]);
  }
  out += ']';
}

void put_optional_string(std::string& out, const std::optional<std::string>& s) {
  if (s) {
    put_string(out, *s);
  } else {
    out += "null";
  }
}

void put_style(std::string& out, const StyleConfig& s) {
  out += "{\"layer_gap\":";
  put_number(out, s.layer_gap);
  out += ",\"box_height\":";
  put_number(out, s.box_height);
  out += ",\"color_mode\":";
  put_string(out, to_string(s.color_mode));
  out += ",\"texture_mode\":";
  put_string(out, to_string(s.texture_mode));
  out += ",\"world_scale\":";
  put_number(out, s.world_scale);
  out += '}';
}

void put_box(std::string& out, const SceneBox& b) {
  out += "{\"path\":";
  put_path(out, b.path);
  out += ",\"pos\":";
  put_vec3(out, b.position);
  out += ",\"size\":";
  put_vec3(out, b.size);
  out += ",\"color\":[";
  put_number(out, b.color.r);
  out += ',';
  put_number(out, b.color.g);
  out += ',';
  put_number(out, b.color.b);
  out += "],\"uv\":";
  if (b.uv) {
    out += '[';
    put_number(out, b.uv->u0);
    out += ',';
    put_number(out, b.uv->v0);
    out += ',';
    put_number(out, b.uv->u1);
    out += ',';
    put_number(out, b.uv->v1);
    out += ']';
  } else {
    out += "null";
  }
  out += ",\"depth\":" + std::to_string(b.depth);
  out += ",\"match_text\":";
  put_string(out, b.match_text.text);
  out += '}';
}

void put_line(std::string& out, const ConnectorLine& l) {
  out += "{\"from\":";
  put_path(out, l.from_path);
  out += ",\"to\":";
  put_path(out, l.to_path);
  out += ",\"a\":";
  put_vec3(out, l.a);
  out += ",\"b\":";
  put_vec3(out, l.b);
  out += '}';
}

// Writes `items` as a JSON array with one element per line.
template <typename T, typename Fn>
void put_list(std::string& out, const std::vector<T>& items, Fn&& put_item) {
  if (items.empty()) {
    out += "[]";
    return;
  }
  out += "[\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += "    ";
    put_item(out, items[i]);
    if (i + 1 < items.size()) out += ',';
    out += '\n';
  }
  out += "  ]";
}

// ---------------------------------------------------------------------------
// Reading

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) schema_error(std::string("expected object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(std::string("missing field '") + key + "'");
  return *it;
}

// Null when absent or explicitly null.
const json* optional_field(const json& obj, const char* key) {
  if (!obj.is_object()) schema_error(std::string("expected object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

double get_number(const json& j, const char* what) {
  if (!j.is_number()) schema_error(std::string("'") + what + "' must be a number");
  return j.get<double>();
}

std::uint64_t get_unsigned(const json& j, const char* what) {
  if (!j.is_number_unsigned()) schema_error(std::string("'") + what + "' must be a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const char* what) {
  if (!j.is_string()) schema_error(std::string("'") + what + "' must be a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const char* what) {
  if (!j.is_boolean()) schema_error(std::string("'") + what + "' must be a boolean");
  return j.get<bool>();
}

NodePath get_path(const json& j) {
  if (!j.is_array()) schema_error("path must be an array of integers");
  NodePath p;
  for (const auto& step : j) {
    std::uint64_t v = get_unsigned(step, "path step");
    if (v > UINT32_MAX) schema_error("path step out of range");
    p.steps.push_back(static_cast<std::uint32_t>(v));
  }
  return p;
}

std::vector<double> get_numbers(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    schema_error(std::string("'") + what + "' must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> v;
  for (const auto& x : j) v.push_back(get_number(x, what));
  return v;
}

Vec3 get_vec3(const json& j, const char* what) {
  auto v = get_numbers(j, 3, what);
  return {v[0], v[1], v[2]};
}

StyleConfig read_style(const json& j) {
  StyleConfig s;
  if (!j.is_object()) schema_error("style must be an object");
  if (auto* v = optional_field(j, "layer_gap")) s.layer_gap = get_number(*v, "layer_gap");
  if (auto* v = optional_field(j, "box_height")) s.box_height = get_number(*v, "box_height");
  if (auto* v = optional_field(j, "color_mode")) s.color_mode = parse_color_mode(get_string(*v, "color_mode"));
  if (auto* v = optional_field(j, "texture_mode")) s.texture_mode = parse_texture_mode(get_string(*v, "texture_mode"));
  if (auto* v = optional_field(j, "world_scale")) s.world_scale = get_number(*v, "world_scale");
  return s;
}

SceneBox read_box(const json& j) {
  SceneBox b;
  b.path = get_path(field(j, "path"));
  b.position = get_vec3(field(j, "pos"), "pos");
  b.size = get_vec3(field(j, "size"), "size");
  auto c = get_numbers(field(j, "color"), 3, "color");
  b.color = {c[0], c[1], c[2]};
  if (auto* uv = optional_field(j, "uv")) {
    auto u = get_numbers(*uv, 4, "uv");
    b.uv = UvRect{u[0], u[1], u[2], u[3]};
  }
  std::uint64_t depth = get_unsigned(field(j, "depth"), "depth");
  b.depth = static_cast<std::uint32_t>(depth);
  b.match_text.text = get_string(field(j, "match_text"), "match_text");
  return b;
}

std::optional<std::string> read_optional_string(const json& obj, const char* key) {
  if (auto* v = optional_field(obj, key)) return get_string(*v, key);
  return std::nullopt;
}

Measurement read_measurement(const json& j) {
  Measurement m;
  m.path = get_path(field(j, "path"));
  auto r = get_numbers(field(j, "rect"), 4, "rect");
  m.rect = {r[0], r[1], r[2], r[3]};
  if (auto* v = optional_field(j, "scroll_w")) m.scroll_w = get_number(*v, "scroll_w");
  if (auto* v = optional_field(j, "scroll_h")) m.scroll_h = get_number(*v, "scroll_h");
  if (auto* v = optional_field(j, "visible")) m.visible = get_bool(*v, "visible");
  return m;
}

Viewport read_viewport(const json& j) {
  Viewport v;
  v.w = get_number(field(j, "w"), "w");
  v.h = get_number(field(j, "h"), "h");
  if (auto* x = optional_field(j, "scroll_x")) v.scroll_x = get_number(*x, "scroll_x");
  if (auto* y = optional_field(j, "scroll_y")) v.scroll_y = get_number(*y, "scroll_y");
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::kSchema, "schema error: non-finite number");
  if (value == 0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

const char* to_string(ColorMode mode) { return mode == ColorMode::kPerLayer ? "per-layer" : "tag-hash"; }

const char* to_string(TextureMode mode) {
  switch (mode) {
    case TextureMode::kNone: return "none";
    case TextureMode::kLeavesOnly: return "leaves";
    case TextureMode::kAllBoxes: return "all";
  }
  return "none";
}

const char* to_string(SnapshotOrigin origin) {
  switch (origin) {
    case SnapshotOrigin::kFile: return "file";
    case SnapshotOrigin::kUrl: return "url";
    case SnapshotOrigin::kLivePush: return "live-push";
  }
  return "file";
}

ColorMode parse_color_mode(std::string_view text) {
  if (text == "per-layer") return ColorMode::kPerLayer;
  if (text == "tag-hash") return ColorMode::kTagHash;
  schema_error("unknown color mode '" + std::string(text) + "'");
}

TextureMode parse_texture_mode(std::string_view text) {
  if (text == "none") return TextureMode::kNone;
  if (text == "leaves" || text == "leaves-only") return TextureMode::kLeavesOnly;
  if (text == "all" || text == "all-boxes") return TextureMode::kAllBoxes;
  schema_error("unknown texture mode '" + std::string(text) + "'");
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
  }
  if (clean.size() % 4 != 0) schema_error("invalid base64 length");
  std::string out(clean.size() / 4 * 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) schema_error("invalid base64");
  std::size_t padding = 0;
  if (!clean.empty() && clean.back() == '=') ++padding;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string scene_to_json(const Scene& scene) {
  std::string out = "{\n  \"revision\": " + std::to_string(scene.revision) + ",\n  \"style\": ";
  put_style(out, scene.style);
  out += ",\n  \"boxes\": ";
  put_list(out, scene.boxes, put_box);
  out += ",\n  \"lines\": ";
  put_list(out, scene.lines, put_line);
  out += ",\n  \"visible_count\": " + std::to_string(scene.visible_count);
  out += ",\n  \"max_depth\": " + std::to_string(scene.max_depth);
  out += ",\n  \"screenshot_ref\": ";
  put_optional_string(out, scene.screenshot_ref);
  out += "\n}\n";
  return out;
}

Scene scene_from_json(std::string_view text) {
  json j = parse_document(text);
  Scene s;
  s.revision = get_unsigned(field(j, "revision"), "revision");
  s.style = read_style(field(j, "style"));
  const json& boxes = field(j, "boxes");
  if (!boxes.is_array()) schema_error("boxes must be an array");
  for (const auto& b : boxes) s.boxes.push_back(read_box(b));
  const json& lines = field(j, "lines");
  if (!lines.is_array()) schema_error("lines must be an array");
  for (const auto& l : lines) {
    s.lines.push_back({get_path(field(l, "from")), get_path(field(l, "to")), get_vec3(field(l, "a"), "a"),
                       get_vec3(field(l, "b"), "b")});
  }
  s.visible_count = get_unsigned(field(j, "visible_count"), "visible_count");
  if (auto* v = optional_field(j, "max_depth")) s.max_depth = static_cast<std::uint32_t>(get_unsigned(*v, "max_depth"));
  s.screenshot_ref = read_optional_string(j, "screenshot_ref");
  return s;
}

std::string diff_to_json(const SceneDiff& d) {
  std::string out = "{\n  \"base_revision\": " + std::to_string(d.base_revision);
  out += ",\n  \"target_revision\": " + std::to_string(d.target_revision);
  out += ",\n  \"added\": ";
  put_list(out, d.added, put_box);
  out += ",\n  \"removed\": ";
  put_list(out, d.removed, put_path);
  out += ",\n  \"changed\": ";
  put_list(out, d.changed, put_box);
  out += ",\n  \"style\": ";
  put_style(out, d.style);
  out += ",\n  \"visible_count\": " + std::to_string(d.visible_count);
  out += ",\n  \"max_depth\": " + std::to_string(d.max_depth);
  out += ",\n  \"screenshot_ref\": ";
  put_optional_string(out, d.screenshot_ref);
  out += "\n}\n";
  return out;
}

SceneDiff diff_from_json(std::string_view text) {
  json j = parse_document(text);
  SceneDiff d;
  d.base_revision = get_unsigned(field(j, "base_revision"), "base_revision");
  d.target_revision = get_unsigned(field(j, "target_revision"), "target_revision");
  for (const auto& b : field(j, "added")) d.added.push_back(read_box(b));
  for (const auto& p : field(j, "removed")) d.removed.push_back(get_path(p));
  for (const auto& b : field(j, "changed")) d.changed.push_back(read_box(b));
  d.style = read_style(field(j, "style"));
  d.visible_count = get_unsigned(field(j, "visible_count"), "visible_count");
  d.max_depth = static_cast<std::uint32_t>(get_unsigned(field(j, "max_depth"), "max_depth"));
  d.screenshot_ref = read_optional_string(j, "screenshot_ref");
  return d;
}

std::string filter_to_json(const FilterSpec& f) {
  std::string out = "{\"depth_min\":" + std::to_string(f.depth_min) + ",\"depth_max\":";
  out += f.depth_max ? std::to_string(*f.depth_max) : "null";
  out += ",\"search\":";
  put_string(out, f.search);
  out += ",\"subtree_root\":";
  if (f.subtree_root) {
    put_path(out, *f.subtree_root);
  } else {
    out += "null";
  }
  out += ",\"cropping\":";
  out += f.cropping ? "true" : "false";
  out += "}\n";
  return out;
}

FilterSpec filter_from_json(std::string_view text) {
  json j = parse_document(text);
  if (!j.is_object()) schema_error("filter must be an object");
  FilterSpec f;
  if (auto* v = optional_field(j, "depth_min")) f.depth_min = static_cast<std::uint32_t>(get_unsigned(*v, "depth_min"));
  if (auto* v = optional_field(j, "depth_max")) f.depth_max = static_cast<std::uint32_t>(get_unsigned(*v, "depth_max"));
  if (auto* v = optional_field(j, "search")) f.search = get_string(*v, "search");
  if (auto* v = optional_field(j, "subtree_root")) f.subtree_root = get_path(*v);
  if (auto* v = optional_field(j, "cropping")) f.cropping = get_bool(*v, "cropping");
  return f;
}

std::string style_to_json(const StyleConfig& style) {
  std::string out;
  put_style(out, style);
  out += '\n';
  return out;
}

StyleConfig style_from_json(std::string_view text) { return read_style(parse_document(text)); }

std::string snapshot_to_json(const Snapshot& s) {
  std::string out = "{\"html\":";
  put_string(out, s.html);
  out += ",\"measurements\":";
  if (s.measurements) {
    out += '[';
    for (std::size_t i = 0; i < s.measurements->size(); ++i) {
      const Measurement& m = (*s.measurements)[i];
      if (i) out += ',';
      out += "{\"path\":";
      put_path(out, m.path);
      out += ",\"rect\":[";
      put_number(out, m.rect.x);
      out += ',';
      put_number(out, m.rect.y);
      out += ',';
      put_number(out, m.rect.w);
      out += ',';
      put_number(out, m.rect.h);
      out += "],\"scroll_w\":";
      put_number(out, m.scroll_w);
      out += ",\"scroll_h\":";
      put_number(out, m.scroll_h);
      out += ",\"visible\":";
      out += m.visible ? "true" : "false";
      out += '}';
    }
    out += ']';
  } else {
    out += "null";
  }
  out += ",\"viewport\":";
  if (s.viewport) {
    out += "{\"w\":";
    put_number(out, s.viewport->w);
    out += ",\"h\":";
    put_number(out, s.viewport->h);
    out += ",\"scroll_x\":";
    put_number(out, s.viewport->scroll_x);
    out += ",\"scroll_y\":";
    put_number(out, s.viewport->scroll_y);
    out += '}';
  } else {
    out += "null";
  }
  out += ",\"screenshot\":";
  if (s.screenshot) {
    out += "{\"png_base64\":";
    put_string(out, base64_encode(s.screenshot->png));
    out += ",\"page_w\":";
    put_number(out, s.screenshot->page_w);
    out += ",\"page_h\":";
    put_number(out, s.screenshot->page_h);
    out += '}';
  } else {
    out += "null";
  }
  out += ",\"origin\":";
  put_string(out, to_string(s.origin));
  out += "}\n";
  return out;
}

Snapshot snapshot_from_json(std::string_view text) {
  json j = parse_document(text);
  Snapshot s;
  s.html = get_string(field(j, "html"), "html");
  if (auto* ms = optional_field(j, "measurements")) {
    if (!ms->is_array()) schema_error("measurements must be an array");
    s.measurements.emplace();
    for (const auto& m : *ms) s.measurements->push_back(read_measurement(m));
  }
  if (auto* v = optional_field(j, "viewport")) s.viewport = read_viewport(*v);
  if (auto* shot = optional_field(j, "screenshot")) {
    Screenshot sc;
    sc.png = base64_decode(get_string(field(*shot, "png_base64"), "png_base64"));
    sc.page_w = get_number(field(*shot, "page_w"), "page_w");
    sc.page_h = get_number(field(*shot, "page_h"), "page_h");
    s.screenshot = std::move(sc);
  }
  if (auto* o = optional_field(j, "origin")) {
    std::string origin = get_string(*o, "origin");
    if (origin == "file") {
      s.origin = SnapshotOrigin::kFile;
    } else if (origin == "url") {
      s.origin = SnapshotOrigin::kUrl;
    } else if (origin == "live-push") {
      s.origin = SnapshotOrigin::kLivePush;
    } else {
      schema_error("unknown origin '" + origin + "'");
    }
  }
  if (s.measurements && !s.viewport) schema_error("measurements require a viewport");
  return s;
}

}  // namespace domcity::wire
