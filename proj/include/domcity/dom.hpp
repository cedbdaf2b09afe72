#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domcity/error.hpp"

namespace domcity {

// Opaque node handle, valid only for the DomTree that produced it.
struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

// Element-child indices from the root element down to a node. The empty path
// is the root. Lexicographic order on paths is document order.
struct NodePath {
  std::vector<std::uint32_t> steps;

  NodePath() = default;
  NodePath(std::initializer_list<std::uint32_t> s) : steps(s) {}
  explicit NodePath(std::vector<std::uint32_t> s) : steps(std::move(s)) {}

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  // Path of the parent; precondition: !empty().
  NodePath parent() const;
  // True when this path is a strict prefix of `other`.
  bool is_strict_prefix_of(const NodePath& other) const;
  // Prefix-or-equal.
  bool contains(const NodePath& other) const;

  std::string to_string() const;

  friend auto operator<=>(const NodePath&, const NodePath&) = default;
  friend bool operator==(const NodePath&, const NodePath&) = default;
};

struct Attribute {
  std::string name;
  std::string value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct DomNode {
  NodeId id;
  std::string tag;  // lowercase
  std::vector<Attribute> attributes;  // source order, first occurrence wins
  std::string direct_text;  // immediate text children, whitespace-collapsed
  std::vector<NodeId> children;
  std::optional<NodeId> parent;
  std::uint32_t depth = 0;
  std::uint32_t index_in_parent = 0;

  bool is_leaf() const { return children.empty(); }
};

// Immutable element tree. Node ids are assigned in document order, so
// iterating nodes() visits the tree in preorder.
class DomTree {
 public:
  DomTree() = default;
  explicit DomTree(std::vector<DomNode> nodes);

  NodeId root() const { return NodeId{0}; }
  bool contains(NodeId id) const { return id.value < nodes_.size(); }
  const DomNode& node(NodeId id) const;
  std::span<const DomNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::uint32_t max_depth() const { return max_depth_; }

  // Number of element descendants (excluding the node itself).
  std::size_t descendant_count(NodeId id) const;

 private:
  std::vector<DomNode> nodes_;
  std::vector<std::uint32_t> subtree_end_;  // preorder index one past the subtree
  std::uint32_t max_depth_ = 0;
};

struct MatchText {
  std::string text;

  friend bool operator==(const MatchText&, const MatchText&) = default;
};

// Parses an HTML document with the standard tree construction rules
// (scripting enabled). Invalid UTF-8 is replaced with U+FFFD.
DomTree parse_html(std::string_view html);

NodePath node_path(const DomTree& tree, NodeId id);
NodeId resolve_path(const DomTree& tree, const NodePath& path);
std::optional<NodeId> try_resolve_path(const DomTree& tree, const NodePath& path);

bool is_void_element(std::string_view tag);
MatchText serialize_node(const DomTree& tree, NodeId id);

}  // namespace domcity
