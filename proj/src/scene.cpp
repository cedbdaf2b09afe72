#include "domcity/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace domcity {
namespace {

// ColorBrewer Set3.
constexpr std::array<std::uint32_t, kLayerPaletteSize> kLayerPalette = {
    0x8dd3c7, 0xffffb3, 0xbebada, 0xfb8072, 0x80b1d3, 0xfdb462,
    0xb3de69, 0xfccde5, 0xd9d9d9, 0xbc80bd, 0xccebc5, 0xffed6f,
};

constexpr double kTagSaturation = 0.65;
constexpr double kTagLightness = 0.55;

Rgb from_hex(std::uint32_t hex) {
  return {((hex >> 16) & 0xFF) / 255.0, ((hex >> 8) & 0xFF) / 255.0, (hex & 0xFF) / 255.0};
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0; }

}  // namespace

void validate(const StyleConfig& style) {
  if (!positive_finite(style.layer_gap)) throw Error(ErrorCode::kInvalidStyle, "invalid style: layer_gap must be > 0");
  if (!positive_finite(style.box_height)) throw Error(ErrorCode::kInvalidStyle, "invalid style: box_height must be > 0");
  if (!positive_finite(style.world_scale)) throw Error(ErrorCode::kInvalidStyle, "invalid style: world_scale must be > 0");
}

const SceneBox* Scene::find(const NodePath& path) const {
  auto it = std::lower_bound(boxes.begin(), boxes.end(), path,
                             [](const SceneBox& b, const NodePath& p) { return b.path < p; });
  return (it != boxes.end() && it->path == path) ? &*it : nullptr;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Rgb hsl_to_rgb(double hue_degrees, double s, double l) {
  const double h = std::fmod(std::fmod(hue_degrees, 360.0) + 360.0, 360.0) / 60.0;
  const double c = (1.0 - std::fabs(2.0 * l - 1.0)) * s;
  const double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  const double m = l - c / 2.0;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {r + m, g + m, b + m};
}

Rgb color_for(std::string_view tag, std::uint32_t depth, ColorMode mode) {
  if (mode == ColorMode::kPerLayer) return from_hex(kLayerPalette[depth % kLayerPaletteSize]);
  const double hue = static_cast<double>(fnv1a64(tag) % 360);
  return hsl_to_rgb(hue, kTagSaturation, kTagLightness);
}

Rgb color_for(const DomNode& node, ColorMode mode) { return color_for(node.tag, node.depth, mode); }

UvRect texture_uv(const Rect& rect, double page_w, double page_h) {
  if (!(rect.w > 0 && rect.h > 0)) throw Error(ErrorCode::kDegenerateTexture, "degenerate texture region");
  if (!(page_w > 0 && page_h > 0)) throw Error(ErrorCode::kDegenerateTexture, "degenerate texture region: empty page");
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {clamp01(rect.x / page_w), clamp01(1.0 - rect.bottom() / page_h), clamp01(rect.right() / page_w),
          clamp01(1.0 - rect.y / page_h)};
}

std::vector<ConnectorLine> connect_boxes(const std::vector<SceneBox>& boxes) {
  std::map<NodePath, const SceneBox*> by_path;
  for (const auto& b : boxes) by_path.emplace(b.path, &b);
  std::vector<ConnectorLine> lines;
  for (const auto& child : boxes) {
    if (child.path.empty()) continue;
    auto it = by_path.find(child.path.parent());
    if (it == by_path.end()) continue;
    const SceneBox& parent = *it->second;
    lines.push_back({child.path, parent.path,
                     {child.position.x, child.position.y - child.size.y / 2, child.position.z},
                     {parent.position.x, parent.position.y + parent.size.y / 2, parent.position.z}});
  }
  return lines;
}

Scene build_scene(const DomTree& tree, const GeometryMap& geom, const FilterSpec& filter, const StyleConfig& style,
                  const std::optional<TextureSource>& texture, std::uint64_t revision) {
  validate(style);
  Scene scene;
  scene.revision = revision;
  scene.style = style;
  scene.max_depth = tree.max_depth();
  if (texture) scene.screenshot_ref = texture->ref;
  const double page_w = texture ? texture->page_w : geom.page_w;
  const double page_h = texture ? texture->page_h : geom.page_h;

  for (NodeId id : apply_filters(tree, geom, filter)) {
    const DomNode& n = tree.node(id);
    NodePath path = node_path(tree, id);
    const Rect* full = geom.find(path);
    if (full == nullptr) throw Error(ErrorCode::kMissingGeometry, "missing geometry for " + path.to_string());
    // Filtering already dropped nodes that crop to nothing.
    const Rect rect = *crop_rect(*full, geom.viewport, filter.cropping);

    SceneBox box;
    box.path = std::move(path);
    box.depth = n.depth;
    box.position = {style.world_scale * rect.center_x(), static_cast<double>(n.depth) * style.layer_gap,
                    style.world_scale * rect.center_y()};
    box.size = {style.world_scale * rect.w, style.box_height, style.world_scale * rect.h};
    box.color = color_for(n, style.color_mode);
    const bool textured = style.texture_mode == TextureMode::kAllBoxes ||
                          (style.texture_mode == TextureMode::kLeavesOnly && n.is_leaf());
    if (textured) box.uv = texture_uv(rect, page_w, page_h);
    box.match_text = serialize_node(tree, id);
    scene.boxes.push_back(std::move(box));
  }
  scene.lines = connect_boxes(scene.boxes);
  scene.visible_count = scene.boxes.size();
  return scene;
}

SceneDiff diff_scenes(const Scene& old_scene, const Scene& new_scene) {
  if (old_scene.revision >= new_scene.revision) {
    throw Error(ErrorCode::kRevisionOrder, "revision order violated: " + std::to_string(old_scene.revision) +
                                               " >= " + std::to_string(new_scene.revision));
  }
  SceneDiff diff;
  diff.base_revision = old_scene.revision;
  diff.target_revision = new_scene.revision;
  diff.style = new_scene.style;
  diff.visible_count = new_scene.visible_count;
  diff.max_depth = new_scene.max_depth;
  diff.screenshot_ref = new_scene.screenshot_ref;

  // Both box lists are sorted by path; merge.
  auto o = old_scene.boxes.begin();
  auto n = new_scene.boxes.begin();
  while (o != old_scene.boxes.end() || n != new_scene.boxes.end()) {
    if (n == new_scene.boxes.end() || (o != old_scene.boxes.end() && o->path < n->path)) {
      diff.removed.push_back(o->path);
      ++o;
    } else if (o == old_scene.boxes.end() || n->path < o->path) {
      diff.added.push_back(*n);
      ++n;
    } else {
      if (!(*o == *n)) diff.changed.push_back(*n);
      ++o;
      ++n;
    }
  }
  return diff;
}

Scene apply_diff(const Scene& base, const SceneDiff& diff) {
  if (diff.base_revision != base.revision) {
    throw Error(ErrorCode::kRevisionOrder, "revision order violated: diff base " + std::to_string(diff.base_revision) +
                                               " does not match scene revision " + std::to_string(base.revision));
  }
  std::map<NodePath, SceneBox> boxes;
  for (const auto& b : base.boxes) boxes.emplace(b.path, b);
  for (const auto& p : diff.removed) boxes.erase(p);
  for (const auto& b : diff.added) boxes.insert_or_assign(b.path, b);
  for (const auto& b : diff.changed) boxes.insert_or_assign(b.path, b);

  Scene out;
  out.revision = diff.target_revision;
  out.style = diff.style;
  out.max_depth = diff.max_depth;
  out.screenshot_ref = diff.screenshot_ref;
  out.boxes.reserve(boxes.size());
  for (auto& [path, box] : boxes) out.boxes.push_back(std::move(box));
  out.lines = connect_boxes(out.boxes);
  out.visible_count = out.boxes.size();
  return out;
}

}  // namespace domcity
