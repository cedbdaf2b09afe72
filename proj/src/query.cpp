#include "domcity/query.hpp"

#include <algorithm>

namespace domcity {
namespace {

char fold(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c; }

}  // namespace

void validate(const FilterSpec& filter, const DomTree* tree) {
  if (filter.depth_max && filter.depth_min > *filter.depth_max) {
    throw Error(ErrorCode::kInvalidFilter, "invalid filter: depth_min " + std::to_string(filter.depth_min) +
                                               " > depth_max " + std::to_string(*filter.depth_max));
  }
  if (tree != nullptr && filter.subtree_root && !try_resolve_path(*tree, *filter.subtree_root)) {
    throw Error(ErrorCode::kInvalidFilter,
                "invalid filter: subtree root " + filter.subtree_root->to_string() + " not resolvable");
  }
}

bool match_search(const MatchText& text, std::string_view query) {
  if (query.empty()) return true;
  auto it = std::search(text.text.begin(), text.text.end(), query.begin(), query.end(),
                        [](char a, char b) { return fold(a) == fold(b); });
  return it != text.text.end();
}

std::vector<NodeId> subtree_ids(const DomTree& tree, const NodePath& root) {
  const NodeId top = resolve_path(tree, root);
  // Ids are preorder, so the subtree is a contiguous id range.
  const std::size_t count = tree.descendant_count(top) + 1;
  std::vector<NodeId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(NodeId{static_cast<std::uint32_t>(top.value + i)});
  return ids;
}

std::vector<NodeId> apply_filters(const DomTree& tree, const GeometryMap& geom, const FilterSpec& filter) {
  validate(filter);
  std::uint32_t first = 0;
  std::uint32_t last = static_cast<std::uint32_t>(tree.size());
  if (filter.subtree_root) {
    auto ids = subtree_ids(tree, *filter.subtree_root);
    first = ids.front().value;
    last = ids.back().value + 1;
  }
  const std::uint32_t depth_max = filter.depth_max.value_or(tree.max_depth());

  std::vector<NodeId> out;
  for (std::uint32_t i = first; i < last; ++i) {
    const DomNode& n = tree.nodes()[i];
    if (n.depth < filter.depth_min || n.depth > depth_max) continue;
    if (!filter.search.empty() && !match_search(serialize_node(tree, n.id), filter.search)) continue;
    if (filter.cropping) {
      NodePath path = node_path(tree, n.id);
      const Rect* rect = geom.find(path);
      if (rect == nullptr) throw Error(ErrorCode::kMissingGeometry, "missing geometry for " + path.to_string());
      if (!crop_rect(*rect, geom.viewport, true)) continue;
    }
    out.push_back(n.id);
  }
  return out;
}

}  // namespace domcity
