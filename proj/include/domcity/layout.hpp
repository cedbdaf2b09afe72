#pragma once

#include <map>
#include <optional>
#include <vector>

#include "domcity/dom.hpp"

namespace domcity {

// Axis-aligned rectangle in CSS pixels, page coordinates, origin top-left.
struct Rect {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  double center_x() const { return x + w / 2; }
  double center_y() const { return y + h / 2; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Viewport {
  double w = 1280;
  double h = 800;
  double scroll_x = 0;
  double scroll_y = 0;

  // The currently visible window in page coordinates.
  Rect window() const { return {scroll_x, scroll_y, w, h}; }

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

// Throws Error(kMalformedMeasurement) unless w, h > 0 and scroll offsets >= 0.
void validate(const Viewport& viewport);

struct Measurement {
  NodePath path;
  Rect rect;  // border box
  double scroll_w = 0;  // 0 when unmeasured
  double scroll_h = 0;
  bool visible = true;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

enum class GeometrySource { kMeasured, kSynthetic };

struct GeometryMap {
  std::map<NodePath, Rect> rects;  // effective rect per node; ordered = document order
  Viewport viewport;
  double page_w = 0;
  double page_h = 0;
  GeometrySource source = GeometrySource::kSynthetic;

  const Rect* find(const NodePath& path) const;

  friend bool operator==(const GeometryMap&, const GeometryMap&) = default;
};

// Side length of the placeholder footprint given to hidden or unmeasured nodes.
inline constexpr double kEpsilonFootprint = 1.0;

GeometryMap ingest_geometry(const DomTree& tree, const std::vector<Measurement>& measurements,
                            const Viewport& viewport);

// Slice-and-dice treemap over the viewport. Even depths split their rect
// along x, odd depths along y; each child's share is 1 + its descendant count.
GeometryMap synthetic_layout(const DomTree& tree, const Viewport& viewport);

// With cropping on, the part of `rect` inside the viewport window, or nullopt
// when nothing of positive area remains. With cropping off, `rect` itself.
std::optional<Rect> crop_rect(const Rect& rect, const Viewport& viewport, bool cropping);

}  // namespace domcity
