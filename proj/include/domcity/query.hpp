#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcity/dom.hpp"
#include "domcity/layout.hpp"

namespace domcity {

// Conjunction of the visibility filters. An unset depth_max means "up to the
// tree's max depth".
struct FilterSpec {
  std::uint32_t depth_min = 0;
  std::optional<std::uint32_t> depth_max;
  std::string search;
  std::optional<NodePath> subtree_root;
  bool cropping = true;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

// Throws Error(kInvalidFilter) if depth bounds are inverted, or (when a tree
// is given) if subtree_root does not resolve in it.
void validate(const FilterSpec& filter, const DomTree* tree = nullptr);

// Case-insensitive (ASCII) literal substring test; an empty query matches.
bool match_search(const MatchText& text, std::string_view query);

// The node at `root` and all its descendants, in document order.
std::vector<NodeId> subtree_ids(const DomTree& tree, const NodePath& root);

// Nodes passing every filter, in document order.
std::vector<NodeId> apply_filters(const DomTree& tree, const GeometryMap& geom, const FilterSpec& filter);

}  // namespace domcity
