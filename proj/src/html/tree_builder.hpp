#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "domcity/dom.hpp"

namespace domcity::html {

enum class Namespace { kHtml, kSvg, kMathml };

// Mutable node used only while the tree is being constructed. Text nodes are
// kept so that reparenting (adoption agency, foster parenting) moves text
// along with its siblings.
struct BuildNode {
  enum class Kind { kDocument, kElement, kText };

  Kind kind = Kind::kElement;
  Namespace ns = Namespace::kHtml;
  std::string name;
  std::vector<Attribute> attributes;
  std::string text;
  int parent = -1;
  std::vector<int> children;
};

struct BuildDocument {
  std::vector<BuildNode> nodes;  // nodes[0] is the document

  // Index of the root element (always present after parsing).
  int document_element() const;
};

BuildDocument build_document(std::string_view html);

}  // namespace domcity::html
