#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcity/dom.hpp"
#include "domcity/layout.hpp"
#include "domcity/query.hpp"

namespace domcity {

enum class ColorMode { kPerLayer, kTagHash };
enum class TextureMode { kNone, kLeavesOnly, kAllBoxes };

struct StyleConfig {
  double layer_gap = 1.0;     // world units per depth step
  double box_height = 0.2;    // world units
  ColorMode color_mode = ColorMode::kPerLayer;
  TextureMode texture_mode = TextureMode::kNone;
  double world_scale = 0.001; // world units per CSS pixel

  friend bool operator==(const StyleConfig&, const StyleConfig&) = default;
};

void validate(const StyleConfig& style);

struct Vec3 {
  double x = 0;
  double y = 0;
  double z = 0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// sRGB components in [0, 1].
struct Rgb {
  double r = 0;
  double g = 0;
  double b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Normalized screenshot region; v grows upward from the image bottom.
struct UvRect {
  double u0 = 0;
  double v0 = 0;
  double u1 = 1;
  double v1 = 1;

  friend bool operator==(const UvRect&, const UvRect&) = default;
};

// World axes: page x -> x, page y -> z, DOM depth -> +y. `position` is the
// box center.
struct SceneBox {
  NodePath path;
  Vec3 position;
  Vec3 size;
  Rgb color;
  std::optional<UvRect> uv;
  MatchText match_text;
  std::uint32_t depth = 0;

  friend bool operator==(const SceneBox&, const SceneBox&) = default;
};

// Runs from the bottom-center of the child box (`a`) to the top-center of
// its parent box (`b`).
struct ConnectorLine {
  NodePath from_path;  // child
  NodePath to_path;    // parent
  Vec3 a;
  Vec3 b;

  friend bool operator==(const ConnectorLine&, const ConnectorLine&) = default;
};

struct Scene {
  std::uint64_t revision = 0;
  StyleConfig style;
  std::vector<SceneBox> boxes;  // document order
  std::vector<ConnectorLine> lines;
  std::size_t visible_count = 0;
  std::uint32_t max_depth = 0;
  std::optional<std::string> screenshot_ref;

  const SceneBox* find(const NodePath& path) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Box-level changes between two revisions, plus the target scene's header
// fields so that apply_diff reproduces the target exactly.
struct SceneDiff {
  std::uint64_t base_revision = 0;
  std::uint64_t target_revision = 0;
  std::vector<SceneBox> added;
  std::vector<NodePath> removed;
  std::vector<SceneBox> changed;

  StyleConfig style;
  std::size_t visible_count = 0;
  std::uint32_t max_depth = 0;
  std::optional<std::string> screenshot_ref;

  bool empty() const { return added.empty() && removed.empty() && changed.empty(); }

  friend bool operator==(const SceneDiff&, const SceneDiff&) = default;
};

// The page image boxes are textured from.
struct TextureSource {
  std::string ref;  // content hash
  double page_w = 0;
  double page_h = 0;
};

inline constexpr int kLayerPaletteSize = 12;

std::uint64_t fnv1a64(std::string_view bytes);
Rgb hsl_to_rgb(double hue_degrees, double saturation, double lightness);

Rgb color_for(std::string_view tag, std::uint32_t depth, ColorMode mode);
Rgb color_for(const DomNode& node, ColorMode mode);

UvRect texture_uv(const Rect& rect, double page_w, double page_h);

// Connector lines implied by a box set: one per box whose parent box is present.
std::vector<ConnectorLine> connect_boxes(const std::vector<SceneBox>& boxes);

Scene build_scene(const DomTree& tree, const GeometryMap& geom, const FilterSpec& filter, const StyleConfig& style,
                  const std::optional<TextureSource>& texture = std::nullopt, std::uint64_t revision = 0);

SceneDiff diff_scenes(const Scene& old_scene, const Scene& new_scene);
Scene apply_diff(const Scene& base, const SceneDiff& diff);

}  // namespace domcity
