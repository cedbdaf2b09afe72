#include "domcity/dom.hpp"

#include <algorithm>
#include <array>

#include "html/tree_builder.hpp"

namespace domcity {
namespace {

constexpr std::array<std::string_view, 13> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr",
};

bool is_collapsible_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\f' || c == '\r'; }

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_collapsible_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

void flatten(const html::BuildDocument& doc, int index, std::optional<NodeId> parent, std::uint32_t depth,
             std::uint32_t index_in_parent, std::vector<DomNode>& out) {
  const html::BuildNode& src = doc.nodes[static_cast<std::size_t>(index)];
  const NodeId id{static_cast<std::uint32_t>(out.size())};
  {
    DomNode n;
    n.id = id;
    n.tag = src.name;
    n.attributes = src.attributes;
    n.parent = parent;
    n.depth = depth;
    n.index_in_parent = index_in_parent;
    std::string raw;
    for (int child : src.children) {
      const auto& c = doc.nodes[static_cast<std::size_t>(child)];
      if (c.kind == html::BuildNode::Kind::kText) raw += c.text;
    }
    n.direct_text = collapse_whitespace(raw);
    out.push_back(std::move(n));
  }
  // Template contents live in a separate fragment, not among the element's children.
  if (src.ns == html::Namespace::kHtml && src.name == "template") return;
  std::uint32_t element_index = 0;
  for (int child : src.children) {
    if (doc.nodes[static_cast<std::size_t>(child)].kind != html::BuildNode::Kind::kElement) continue;
    out[id.value].children.push_back(NodeId{static_cast<std::uint32_t>(out.size())});
    flatten(doc, child, id, depth + 1, element_index++, out);
  }
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoSuchNode: return "no such node";
    case ErrorCode::kPathNotResolvable: return "path not resolvable";
    case ErrorCode::kMalformedMeasurement: return "malformed measurement";
    case ErrorCode::kUnresolvablePaths: return "unresolvable paths";
    case ErrorCode::kDegenerateTexture: return "degenerate texture region";
    case ErrorCode::kMissingGeometry: return "missing geometry";
    case ErrorCode::kRevisionOrder: return "revision order violated";
    case ErrorCode::kInvalidFilter: return "invalid filter";
    case ErrorCode::kInvalidStyle: return "invalid style";
    case ErrorCode::kSchema: return "schema error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "error";
}

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoSuchNode: return "no_such_node";
    case ErrorCode::kPathNotResolvable: return "path_not_resolvable";
    case ErrorCode::kMalformedMeasurement: return "malformed_measurement";
    case ErrorCode::kUnresolvablePaths: return "unresolvable_paths";
    case ErrorCode::kDegenerateTexture: return "degenerate_texture";
    case ErrorCode::kMissingGeometry: return "missing_geometry";
    case ErrorCode::kRevisionOrder: return "revision_order";
    case ErrorCode::kInvalidFilter: return "invalid_filter";
    case ErrorCode::kInvalidStyle: return "invalid_style";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
  }
  return "error";
}

NodePath NodePath::parent() const {
  NodePath p = *this;
  p.steps.pop_back();
  return p;
}

bool NodePath::is_strict_prefix_of(const NodePath& other) const {
  return steps.size() < other.steps.size() && std::equal(steps.begin(), steps.end(), other.steps.begin());
}

bool NodePath::contains(const NodePath& other) const { return *this == other || is_strict_prefix_of(other); }

std::string NodePath::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(steps[i]);
  }
  return s + "]";
}

DomTree::DomTree(std::vector<DomNode> nodes) : nodes_(std::move(nodes)) {
  subtree_end_.assign(nodes_.size(), 0);
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const DomNode& n = nodes_[i];
    max_depth_ = std::max(max_depth_, n.depth);
    subtree_end_[i] = n.children.empty() ? static_cast<std::uint32_t>(i + 1) : subtree_end_[n.children.back().value];
  }
}

const DomNode& DomTree::node(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::kNoSuchNode, "no such node: " + std::to_string(id.value));
  return nodes_[id.value];
}

std::size_t DomTree::descendant_count(NodeId id) const {
  node(id);
  return subtree_end_[id.value] - id.value - 1;
}

DomTree parse_html(std::string_view html) {
  html::BuildDocument doc = html::build_document(html);
  std::vector<DomNode> nodes;
  nodes.reserve(doc.nodes.size());
  flatten(doc, doc.document_element(), std::nullopt, 0, 0, nodes);
  return DomTree(std::move(nodes));
}

NodePath node_path(const DomTree& tree, NodeId id) {
  std::vector<std::uint32_t> steps;
  const DomNode* n = &tree.node(id);
  while (n->parent) {
    steps.push_back(n->index_in_parent);
    n = &tree.node(*n->parent);
  }
  std::reverse(steps.begin(), steps.end());
  return NodePath(std::move(steps));
}

std::optional<NodeId> try_resolve_path(const DomTree& tree, const NodePath& path) {
  if (tree.empty()) return std::nullopt;
  NodeId cur = tree.root();
  for (std::uint32_t step : path.steps) {
    const auto& children = tree.node(cur).children;
    if (step >= children.size()) return std::nullopt;
    cur = children[step];
  }
  return cur;
}

NodeId resolve_path(const DomTree& tree, const NodePath& path) {
  if (tree.empty()) throw PathError(0, "path not resolvable: empty tree");
  NodeId cur = tree.root();
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& children = tree.node(cur).children;
    if (path.steps[i] >= children.size()) {
      throw PathError(i, "path not resolvable: " + path.to_string() + " fails at step " + std::to_string(i));
    }
    cur = children[path.steps[i]];
  }
  return cur;
}

bool is_void_element(std::string_view tag) {
  return std::find(kVoidElements.begin(), kVoidElements.end(), tag) != kVoidElements.end();
}

MatchText serialize_node(const DomTree& tree, NodeId id) {
  const DomNode& n = tree.node(id);
  std::string s = "<" + n.tag;
  for (const auto& a : n.attributes) {
    s += ' ';
    s += a.name;
    s += "=\"";
    s += a.value;
    s += '"';
  }
  s += '>';
  s += n.direct_text;
  if (!is_void_element(n.tag)) s += "</" + n.tag + ">";
  return MatchText{std::move(s)};
}

}  // namespace domcity
