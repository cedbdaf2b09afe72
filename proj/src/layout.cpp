#include "domcity/layout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace domcity {
namespace {

bool finite(double v) { return std::isfinite(v); }

Rect epsilon_rect_around(const Rect& anchor) {
  return {anchor.center_x() - kEpsilonFootprint / 2, anchor.center_y() - kEpsilonFootprint / 2, kEpsilonFootprint,
          kEpsilonFootprint};
}

void check_measurement(const Measurement& m) {
  const Rect& r = m.rect;
  if (!finite(r.x) || !finite(r.y) || !finite(r.w) || !finite(r.h) || !finite(m.scroll_w) ||
      !finite(m.scroll_h) || r.w < 0 || r.h < 0 || m.scroll_w < 0 || m.scroll_h < 0) {
    throw Error(ErrorCode::kMalformedMeasurement, "malformed measurement at " + m.path.to_string());
  }
}

}  // namespace

void validate(const Viewport& v) {
  if (!finite(v.w) || !finite(v.h) || !finite(v.scroll_x) || !finite(v.scroll_y) || v.w <= 0 || v.h <= 0 ||
      v.scroll_x < 0 || v.scroll_y < 0) {
    throw Error(ErrorCode::kMalformedMeasurement, "malformed measurement: invalid viewport");
  }
}

const Rect* GeometryMap::find(const NodePath& path) const {
  auto it = rects.find(path);
  return it == rects.end() ? nullptr : &it->second;
}

GeometryMap ingest_geometry(const DomTree& tree, const std::vector<Measurement>& measurements,
                            const Viewport& viewport) {
  validate(viewport);

  std::map<NodePath, const Measurement*> by_path;
  std::vector<NodePath> unresolved;
  for (const auto& m : measurements) {
    check_measurement(m);
    if (!try_resolve_path(tree, m.path)) {
      unresolved.push_back(m.path);
      continue;
    }
    if (!by_path.emplace(m.path, &m).second) {
      throw Error(ErrorCode::kMalformedMeasurement, "malformed measurement: duplicate path " + m.path.to_string());
    }
  }
  if (!unresolved.empty()) {
    std::string msg = "unresolvable measurement paths:";
    for (const auto& p : unresolved) msg += " " + p.to_string();
    throw Error(ErrorCode::kUnresolvablePaths, msg);
  }

  GeometryMap geom;
  geom.viewport = viewport;
  geom.source = GeometrySource::kMeasured;

  // Preorder, so a parent's effective rect exists before its children need it.
  std::vector<Rect> effective(tree.size());
  for (const DomNode& n : tree.nodes()) {
    NodePath path = node_path(tree, n.id);
    auto it = by_path.find(path);
    std::optional<Rect> rect;
    if (it != by_path.end() && it->second->visible) {
      const Measurement& m = *it->second;
      Rect r = m.rect;
      if (m.scroll_w > r.w) r.w = m.scroll_w;
      if (m.scroll_h > r.h) r.h = m.scroll_h;
      if (r.w > 0 && r.h > 0) rect = r;
    }
    if (!rect) {
      const Rect anchor = n.parent ? effective[n.parent->value] : viewport.window();
      rect = epsilon_rect_around(anchor);
    }
    effective[n.id.value] = *rect;
    geom.page_w = std::max(geom.page_w, rect->right());
    geom.page_h = std::max(geom.page_h, rect->bottom());
    geom.rects.emplace(std::move(path), *rect);
  }
  return geom;
}

GeometryMap synthetic_layout(const DomTree& tree, const Viewport& viewport) {
  validate(viewport);
  GeometryMap geom;
  geom.viewport = viewport;
  geom.page_w = viewport.w;
  geom.page_h = viewport.h;
  geom.source = GeometrySource::kSynthetic;
  if (tree.empty()) return geom;

  std::vector<Rect> rects(tree.size());
  rects[0] = {0, 0, viewport.w, viewport.h};
  for (const DomNode& n : tree.nodes()) {
    if (n.children.empty()) continue;
    const Rect parent = rects[n.id.value];
    double total = 0;
    for (NodeId c : n.children) total += 1.0 + static_cast<double>(tree.descendant_count(c));
    const bool split_x = n.depth % 2 == 0;
    const double origin = split_x ? parent.x : parent.y;
    const double extent = split_x ? parent.w : parent.h;
    double cumulative = 0;
    double start = origin;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      NodeId c = n.children[i];
      cumulative += 1.0 + static_cast<double>(tree.descendant_count(c));
      // The last tile ends exactly on the parent's far edge.
      const double end = (i + 1 == n.children.size()) ? origin + extent : origin + extent * (cumulative / total);
      rects[c.value] = split_x ? Rect{start, parent.y, end - start, parent.h}
                               : Rect{parent.x, start, parent.w, end - start};
      start = end;
    }
  }
  for (const DomNode& n : tree.nodes()) geom.rects.emplace(node_path(tree, n.id), rects[n.id.value]);
  return geom;
}

std::optional<Rect> crop_rect(const Rect& rect, const Viewport& viewport, bool cropping) {
  if (!cropping) return rect;
  const Rect win = viewport.window();
  const double x0 = std::max(rect.x, win.x);
  const double y0 = std::max(rect.y, win.y);
  const double x1 = std::min(rect.right(), win.right());
  const double y1 = std::min(rect.bottom(), win.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace domcity
