#include "html/tree_builder.hpp"

#include <algorithm>
#include <initializer_list>
#include <utility>

#include "html/tokenizer.hpp"

namespace domcity::html {
namespace {

using Type = Token::Type;

enum class Mode {
  kInitial,
  kBeforeHtml,
  kBeforeHead,
  kInHead,
  kAfterHead,
  kInBody,
  kText,
  kInTable,
  kInTableText,
  kInCaption,
  kInColumnGroup,
  kInTableBody,
  kInRow,
  kInCell,
  kInSelect,
  kInSelectInTable,
  kInTemplate,
  kAfterBody,
  kInFrameset,
  kAfterFrameset,
  kAfterAfterBody,
  kAfterAfterFrameset,
};

enum class Scope { kDefault, kListItem, kButton, kTable, kSelect };

bool one_of(std::string_view name, std::initializer_list<std::string_view> names) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_whitespace(char32_t c) { return c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' '; }

bool is_heading(std::string_view name) {
  return one_of(name, {"h1", "h2", "h3", "h4", "h5", "h6"});
}

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
  }
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

constexpr std::string_view kQuirkyPublicPrefixes[] = {
    "+//silmaril//dtd html pro v0r11 19970101//",
    "-//as//dtd html 3.0 aswedit + extensions//",
    "-//advasoft ltd//dtd html 3.0 aswedit + extensions//",
    "-//ietf//dtd html 2.0 level 1//",
    "-//ietf//dtd html 2.0 level 2//",
    "-//ietf//dtd html 2.0 strict level 1//",
    "-//ietf//dtd html 2.0 strict level 2//",
    "-//ietf//dtd html 2.0 strict//",
    "-//ietf//dtd html 2.0//",
    "-//ietf//dtd html 2.1e//",
    "-//ietf//dtd html 3.0//",
    "-//ietf//dtd html 3.2 final//",
    "-//ietf//dtd html 3.2//",
    "-//ietf//dtd html 3//",
    "-//ietf//dtd html level 0//",
    "-//ietf//dtd html level 1//",
    "-//ietf//dtd html level 2//",
    "-//ietf//dtd html level 3//",
    "-//ietf//dtd html strict level 0//",
    "-//ietf//dtd html strict level 1//",
    "-//ietf//dtd html strict level 2//",
    "-//ietf//dtd html strict level 3//",
    "-//ietf//dtd html strict//",
    "-//ietf//dtd html//",
    "-//metrius//dtd metrius presentational//",
    "-//microsoft//dtd internet explorer 2.0 html strict//",
    "-//microsoft//dtd internet explorer 2.0 html//",
    "-//microsoft//dtd internet explorer 2.0 tables//",
    "-//microsoft//dtd internet explorer 3.0 html strict//",
    "-//microsoft//dtd internet explorer 3.0 html//",
    "-//microsoft//dtd internet explorer 3.0 tables//",
    "-//netscape comm. corp.//dtd html//",
    "-//netscape comm. corp.//dtd strict html//",
    "-//o'reilly and associates//dtd html 2.0//",
    "-//o'reilly and associates//dtd html extended 1.0//",
    "-//o'reilly and associates//dtd html extended relaxed 1.0//",
    "-//sq//dtd html 2.0 hotmetal + extensions//",
    "-//softquad software//dtd hotmetal pro 6.0::19990601::extensions to html 4.0//",
    "-//softquad//dtd hotmetal pro 4.0::19971010::extensions to html 4.0//",
    "-//spyglass//dtd html 2.0 extended//",
    "-//sun microsystems corp.//dtd hotjava html//",
    "-//sun microsystems corp.//dtd hotjava strict html//",
    "-//w3c//dtd html 3 1995-03-24//",
    "-//w3c//dtd html 3.2 draft//",
    "-//w3c//dtd html 3.2 final//",
    "-//w3c//dtd html 3.2//",
    "-//w3c//dtd html 3.2s draft//",
    "-//w3c//dtd html 4.0 frameset//",
    "-//w3c//dtd html 4.0 transitional//",
    "-//w3c//dtd html experimental 19960712//",
    "-//w3c//dtd html experimental 970421//",
    "-//w3c//dtd w3 html//",
    "-//w3o//dtd w3 html 3.0//",
    "-//webtechs//dtd mozilla html 2.0//",
    "-//webtechs//dtd mozilla html//",
};

bool doctype_is_quirky(const Token& t) {
  if (t.force_quirks || t.name != "html") return true;
  const std::string pub = t.public_id ? ascii_lower(*t.public_id) : std::string();
  const std::string sys = t.system_id ? ascii_lower(*t.system_id) : std::string();
  if (t.public_id) {
    if (pub == "-//w3o//dtd w3 html strict 3.0//en//" || pub == "-/w3c/dtd html 4.0 transitional/en" ||
        pub == "html") {
      return true;
    }
    for (auto prefix : kQuirkyPublicPrefixes) {
      if (starts_with(pub, prefix)) return true;
    }
    if (!t.system_id && (starts_with(pub, "-//w3c//dtd html 4.01 frameset//") ||
                         starts_with(pub, "-//w3c//dtd html 4.01 transitional//"))) {
      return true;
    }
  }
  return t.system_id && sys == "http://www.ibm.com/data/dtd/v11/ibmxhtml1-transitional.dtd";
}

// Attribute names SVG keeps in mixed case, keyed by their lowercase form.
constexpr std::pair<std::string_view, std::string_view> kSvgAttributeCase[] = {
    {"attributename", "attributeName"},
    {"attributetype", "attributeType"},
    {"basefrequency", "baseFrequency"},
    {"baseprofile", "baseProfile"},
    {"calcmode", "calcMode"},
    {"clippathunits", "clipPathUnits"},
    {"diffuseconstant", "diffuseConstant"},
    {"edgemode", "edgeMode"},
    {"filterunits", "filterUnits"},
    {"glyphref", "glyphRef"},
    {"gradienttransform", "gradientTransform"},
    {"gradientunits", "gradientUnits"},
    {"kernelmatrix", "kernelMatrix"},
    {"kernelunitlength", "kernelUnitLength"},
    {"keypoints", "keyPoints"},
    {"keysplines", "keySplines"},
    {"keytimes", "keyTimes"},
    {"lengthadjust", "lengthAdjust"},
    {"limitingconeangle", "limitingConeAngle"},
    {"markerheight", "markerHeight"},
    {"markerunits", "markerUnits"},
    {"markerwidth", "markerWidth"},
    {"maskcontentunits", "maskContentUnits"},
    {"maskunits", "maskUnits"},
    {"numoctaves", "numOctaves"},
    {"pathlength", "pathLength"},
    {"patterncontentunits", "patternContentUnits"},
    {"patterntransform", "patternTransform"},
    {"patternunits", "patternUnits"},
    {"pointsatx", "pointsAtX"},
    {"pointsaty", "pointsAtY"},
    {"pointsatz", "pointsAtZ"},
    {"preservealpha", "preserveAlpha"},
    {"preserveaspectratio", "preserveAspectRatio"},
    {"primitiveunits", "primitiveUnits"},
    {"refx", "refX"},
    {"refy", "refY"},
    {"repeatcount", "repeatCount"},
    {"repeatdur", "repeatDur"},
    {"requiredextensions", "requiredExtensions"},
    {"requiredfeatures", "requiredFeatures"},
    {"specularconstant", "specularConstant"},
    {"specularexponent", "specularExponent"},
    {"spreadmethod", "spreadMethod"},
    {"startoffset", "startOffset"},
    {"stddeviation", "stdDeviation"},
    {"stitchtiles", "stitchTiles"},
    {"surfacescale", "surfaceScale"},
    {"systemlanguage", "systemLanguage"},
    {"tablevalues", "tableValues"},
    {"targetx", "targetX"},
    {"targety", "targetY"},
    {"textlength", "textLength"},
    {"viewbox", "viewBox"},
    {"viewtarget", "viewTarget"},
    {"xchannelselector", "xChannelSelector"},
    {"ychannelselector", "yChannelSelector"},
    {"zoomandpan", "zoomAndPan"},
};

void adjust_foreign_attributes(std::vector<Attribute>& attributes, Namespace ns) {
  for (auto& a : attributes) {
    if (ns == Namespace::kMathml) {
      if (a.name == "definitionurl") a.name = "definitionURL";
      continue;
    }
    auto it = std::lower_bound(std::begin(kSvgAttributeCase), std::end(kSvgAttributeCase), a.name,
                               [](const auto& entry, const std::string& name) { return entry.first < name; });
    if (it != std::end(kSvgAttributeCase) && it->first == a.name) a.name = std::string(it->second);
  }
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view html) : tokenizer_(decode_input(html)) {
    BuildNode document;
    document.kind = BuildNode::Kind::kDocument;
    doc_.nodes.push_back(std::move(document));
  }

  BuildDocument run() {
    while (true) {
      tokenizer_.set_cdata_allowed(!open_.empty() && node(current()).ns != Namespace::kHtml);
      Token t = tokenizer_.next();
      if (skip_newline_) {
        skip_newline_ = false;
        if (t.type == Type::kCharacter && t.ch == '\n') continue;
      }
      dispatch(t);
      if (t.type == Type::kEndOfFile) break;
    }
    return std::move(doc_);
  }

 private:
  // ---------------------------------------------------------------------------
  // Node helpers

  BuildNode& node(int i) { return doc_.nodes[static_cast<std::size_t>(i)]; }
  int current() const { return open_.back(); }

  bool is_html(int i, std::string_view name) {
    const BuildNode& n = node(i);
    return n.kind == BuildNode::Kind::kElement && n.ns == Namespace::kHtml && n.name == name;
  }
  bool is_html_one_of(int i, std::initializer_list<std::string_view> names) {
    const BuildNode& n = node(i);
    return n.kind == BuildNode::Kind::kElement && n.ns == Namespace::kHtml && one_of(n.name, names);
  }
  bool current_is(std::string_view name) { return !open_.empty() && is_html(current(), name); }
  bool current_is_one_of(std::initializer_list<std::string_view> names) {
    return !open_.empty() && is_html_one_of(current(), names);
  }

  bool is_special(int i) {
    const BuildNode& n = node(i);
    switch (n.ns) {
      case Namespace::kHtml:
        return one_of(n.name,
                      {"address", "applet",   "area",     "article",  "aside",    "base",    "basefont",
                       "bgsound", "blockquote", "body",   "br",       "button",   "caption", "center",
                       "col",     "colgroup", "dd",       "details",  "dir",      "div",     "dl",
                       "dt",      "embed",    "fieldset", "figcaption", "figure", "footer",  "form",
                       "frame",   "frameset", "h1",       "h2",       "h3",       "h4",      "h5",
                       "h6",      "head",     "header",   "hgroup",   "hr",       "html",    "iframe",
                       "img",     "input",    "keygen",   "li",       "link",     "listing", "main",
                       "marquee", "menu",     "meta",     "nav",      "noembed",  "noframes", "noscript",
                       "object",  "ol",       "p",        "param",    "plaintext", "pre",    "script",
                       "search",  "section",  "select",   "source",   "style",    "summary", "table",
                       "tbody",   "td",       "template", "textarea", "tfoot",    "th",      "thead",
                       "title",   "tr",       "track",    "ul",       "wbr",      "xmp"});
      case Namespace::kMathml:
        return one_of(n.name, {"mi", "mo", "mn", "ms", "mtext", "annotation-xml"});
      case Namespace::kSvg:
        return one_of(n.name, {"foreignobject", "desc", "title"});
    }
    return false;
  }

  bool is_mathml_text_integration_point(int i) {
    const BuildNode& n = node(i);
    return n.ns == Namespace::kMathml && one_of(n.name, {"mi", "mo", "mn", "ms", "mtext"});
  }

  bool is_html_integration_point(int i) {
    const BuildNode& n = node(i);
    if (n.ns == Namespace::kSvg) return one_of(n.name, {"foreignobject", "desc", "title"});
    if (n.ns == Namespace::kMathml && n.name == "annotation-xml") {
      for (const auto& a : n.attributes) {
        if (a.name == "encoding") {
          std::string enc = ascii_lower(a.value);
          return enc == "text/html" || enc == "application/xhtml+xml";
        }
      }
    }
    return false;
  }

  int create_element(const Token& t, Namespace ns) {
    BuildNode n;
    n.kind = BuildNode::Kind::kElement;
    n.ns = ns;
    n.name = t.name;
    n.attributes = t.attributes;
    if (ns != Namespace::kHtml) adjust_foreign_attributes(n.attributes, ns);
    doc_.nodes.push_back(std::move(n));
    return static_cast<int>(doc_.nodes.size() - 1);
  }

  void detach(int child) {
    int parent = node(child).parent;
    if (parent < 0) return;
    auto& siblings = node(parent).children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), child));
    node(child).parent = -1;
  }

  // Inserts `child` into `parent` before `before` (or appends when before < 0).
  void insert_at(int parent, int before, int child) {
    detach(child);
    auto& siblings = node(parent).children;
    if (before < 0) {
      siblings.push_back(child);
    } else {
      siblings.insert(std::find(siblings.begin(), siblings.end(), before), child);
    }
    node(child).parent = parent;
  }

  struct Place {
    int parent;
    int before;  // -1 = append
  };

  Place appropriate_place(int override_target = -1) {
    int target = override_target >= 0 ? override_target : current();
    if (foster_parenting_ && is_html_one_of(target, {"table", "tbody", "tfoot", "thead", "tr"})) {
      int last_template = -1;
      int last_table = -1;
      for (int i = static_cast<int>(open_.size()) - 1; i >= 0; --i) {
        if (last_template < 0 && is_html(open_[i], "template")) last_template = i;
        if (last_table < 0 && is_html(open_[i], "table")) last_table = i;
      }
      if (last_template >= 0 && (last_table < 0 || last_template > last_table)) {
        return {open_[last_template], -1};
      }
      if (last_table < 0) return {open_[0], -1};
      int table = open_[last_table];
      if (node(table).parent >= 0) return {node(table).parent, table};
      return {open_[last_table - 1], -1};
    }
    return {target, -1};
  }

  int insert_element(const Token& t, Namespace ns = Namespace::kHtml) {
    Place place = appropriate_place();
    int el = create_element(t, ns);
    insert_at(place.parent, place.before, el);
    open_.push_back(el);
    return el;
  }

  void insert_character(char32_t c) {
    Place place = appropriate_place();
    if (node(place.parent).kind == BuildNode::Kind::kDocument) return;
    auto& siblings = node(place.parent).children;
    int previous = -1;
    if (place.before < 0) {
      if (!siblings.empty()) previous = siblings.back();
    } else {
      auto it = std::find(siblings.begin(), siblings.end(), place.before);
      if (it != siblings.begin()) previous = *(it - 1);
    }
    if (previous >= 0 && node(previous).kind == BuildNode::Kind::kText) {
      append_utf8(node(previous).text, c);
      return;
    }
    BuildNode text;
    text.kind = BuildNode::Kind::kText;
    append_utf8(text.text, c);
    doc_.nodes.push_back(std::move(text));
    insert_at(place.parent, place.before, static_cast<int>(doc_.nodes.size() - 1));
  }

  // ---------------------------------------------------------------------------
  // Stack of open elements

  bool is_scope_boundary(int i, Scope scope) {
    const BuildNode& n = node(i);
    if (scope == Scope::kSelect) {
      return !(n.ns == Namespace::kHtml && one_of(n.name, {"optgroup", "option"}));
    }
    if (scope == Scope::kTable) {
      return n.ns == Namespace::kHtml && one_of(n.name, {"html", "table", "template"});
    }
    bool base = false;
    switch (n.ns) {
      case Namespace::kHtml:
        base = one_of(n.name, {"applet", "caption", "html", "table", "td", "th", "marquee", "object",
                               "template"});
        break;
      case Namespace::kMathml:
        base = one_of(n.name, {"mi", "mo", "mn", "ms", "mtext", "annotation-xml"});
        break;
      case Namespace::kSvg:
        base = one_of(n.name, {"foreignobject", "desc", "title"});
        break;
    }
    if (base) return true;
    if (scope == Scope::kListItem) return n.ns == Namespace::kHtml && one_of(n.name, {"ol", "ul"});
    if (scope == Scope::kButton) return n.ns == Namespace::kHtml && n.name == "button";
    return false;
  }

  template <typename Pred>
  bool in_scope_if(Pred matches, Scope scope) {
    for (auto it = open_.rbegin(); it != open_.rend(); ++it) {
      if (matches(*it)) return true;
      if (is_scope_boundary(*it, scope)) return false;
    }
    return false;
  }

  bool in_scope(std::string_view name, Scope scope = Scope::kDefault) {
    return in_scope_if([&](int i) { return is_html(i, name); }, scope);
  }

  bool node_in_scope(int target, Scope scope = Scope::kDefault) {
    return in_scope_if([&](int i) { return i == target; }, scope);
  }

  bool on_stack(int target) { return std::find(open_.begin(), open_.end(), target) != open_.end(); }

  bool template_on_stack() {
    return std::any_of(open_.begin(), open_.end(), [&](int i) { return is_html(i, "template"); });
  }

  void pop_until(std::string_view name) {
    while (!open_.empty()) {
      int top = current();
      open_.pop_back();
      if (is_html(top, name)) return;
    }
  }

  void pop_until_one_of(std::initializer_list<std::string_view> names) {
    while (!open_.empty()) {
      int top = current();
      open_.pop_back();
      if (is_html_one_of(top, names)) return;
    }
  }

  void remove_from_stack(int target) {
    auto it = std::find(open_.begin(), open_.end(), target);
    if (it != open_.end()) open_.erase(it);
  }

  void generate_implied_end_tags(std::string_view except = {}) {
    while (current_is_one_of({"dd", "dt", "li", "optgroup", "option", "p", "rb", "rp", "rt", "rtc"}) &&
           !(except.size() && current_is(except))) {
      open_.pop_back();
    }
  }

  void generate_implied_end_tags_thoroughly() {
    while (current_is_one_of({"caption", "colgroup", "dd", "dt", "li", "optgroup", "option", "p", "rb",
                              "rp", "rt", "rtc", "tbody", "td", "tfoot", "th", "thead", "tr"})) {
      open_.pop_back();
    }
  }

  void close_p() {
    generate_implied_end_tags("p");
    pop_until("p");
  }

  void close_p_in_button_scope() {
    if (in_scope("p", Scope::kButton)) close_p();
  }

  void clear_stack_back_to(std::initializer_list<std::string_view> names) {
    while (!is_html_one_of(current(), names)) open_.pop_back();
  }

  // ---------------------------------------------------------------------------
  // Active formatting elements

  struct Formatting {
    int node = -1;  // -1 = marker
    Token token;
  };

  void push_marker() { active_.push_back({}); }

  void push_formatting(int el, const Token& t) {
    // At most three identical entries after the last marker.
    int matches = 0;
    int earliest = -1;
    for (int i = static_cast<int>(active_.size()) - 1; i >= 0; --i) {
      const Formatting& f = active_[i];
      if (f.node < 0) break;
      const BuildNode& n = node(f.node);
      if (n.name != t.name || n.ns != Namespace::kHtml) continue;
      auto sorted = [](std::vector<Attribute> v) {
        std::sort(v.begin(), v.end(), [](const Attribute& a, const Attribute& b) { return a.name < b.name; });
        return v;
      };
      if (sorted(f.token.attributes) != sorted(t.attributes)) continue;
      ++matches;
      earliest = i;
    }
    if (matches >= 3) active_.erase(active_.begin() + earliest);
    active_.push_back({el, t});
  }

  int formatting_index(int el) {
    for (int i = static_cast<int>(active_.size()) - 1; i >= 0; --i) {
      if (active_[i].node == el) return i;
    }
    return -1;
  }

  void clear_formatting_to_marker() {
    while (!active_.empty()) {
      bool marker = active_.back().node < 0;
      active_.pop_back();
      if (marker) return;
    }
  }

  void reconstruct_formatting() {
    if (active_.empty()) return;
    int i = static_cast<int>(active_.size()) - 1;
    if (active_[i].node < 0 || on_stack(active_[i].node)) return;
    while (i > 0) {
      --i;
      if (active_[i].node < 0 || on_stack(active_[i].node)) {
        ++i;
        break;
      }
    }
    for (; i < static_cast<int>(active_.size()); ++i) {
      int el = insert_element(active_[i].token);
      active_[i].node = el;
    }
  }

  // Returns true when the caller should fall through to "any other end tag".
  bool adoption_agency(const Token& t) {
    const std::string& subject = t.name;
    if (current_is(subject) && formatting_index(current()) < 0) {
      open_.pop_back();
      return false;
    }
    for (int outer = 0; outer < 8; ++outer) {
      int fmt_index = -1;
      for (int i = static_cast<int>(active_.size()) - 1; i >= 0; --i) {
        if (active_[i].node < 0) break;
        if (is_html(active_[i].node, subject)) {
          fmt_index = i;
          break;
        }
      }
      if (fmt_index < 0) return true;
      int formatting = active_[fmt_index].node;
      if (!on_stack(formatting)) {
        active_.erase(active_.begin() + fmt_index);
        return false;
      }
      if (!node_in_scope(formatting)) return false;

      auto fmt_pos = std::find(open_.begin(), open_.end(), formatting) - open_.begin();
      int furthest = -1;
      for (auto i = fmt_pos + 1; i < static_cast<long>(open_.size()); ++i) {
        if (is_special(open_[i])) {
          furthest = open_[i];
          break;
        }
      }
      if (furthest < 0) {
        open_.resize(fmt_pos);
        active_.erase(active_.begin() + fmt_index);
        return false;
      }

      int common_ancestor = open_[fmt_pos - 1];
      int bookmark = fmt_index;
      int node_el = furthest;
      int last_node = furthest;
      auto node_pos = std::find(open_.begin(), open_.end(), furthest) - open_.begin();
      for (int inner = 1;; ++inner) {
        --node_pos;
        node_el = open_[node_pos];
        if (node_el == formatting) break;
        int node_fmt = formatting_index(node_el);
        if (inner > 3 && node_fmt >= 0) {
          active_.erase(active_.begin() + node_fmt);
          if (node_fmt < bookmark) --bookmark;
          node_fmt = -1;
        }
        if (node_fmt < 0) {
          open_.erase(open_.begin() + node_pos);
          continue;
        }
        int replacement = create_element(active_[node_fmt].token, Namespace::kHtml);
        active_[node_fmt].node = replacement;
        open_[node_pos] = replacement;
        node_el = replacement;
        if (last_node == furthest) bookmark = node_fmt + 1;
        insert_at(node_el, -1, last_node);
        last_node = node_el;
      }

      fmt_index = formatting_index(formatting);
      Place place = appropriate_place(common_ancestor);
      insert_at(place.parent, place.before, last_node);

      Token fmt_token = active_[fmt_index].token;
      int fresh = create_element(fmt_token, Namespace::kHtml);
      std::vector<int> moved = node(furthest).children;
      for (int child : moved) insert_at(fresh, -1, child);
      insert_at(furthest, -1, fresh);

      active_.erase(active_.begin() + fmt_index);
      if (fmt_index < bookmark) --bookmark;
      bookmark = std::clamp(bookmark, 0, static_cast<int>(active_.size()));
      active_.insert(active_.begin() + bookmark, Formatting{fresh, fmt_token});

      remove_from_stack(formatting);
      auto furthest_pos = std::find(open_.begin(), open_.end(), furthest) - open_.begin();
      open_.insert(open_.begin() + furthest_pos + 1, fresh);
    }
    return false;
  }

  // ---------------------------------------------------------------------------
  // Dispatch

  bool use_html_rules(const Token& t) {
    if (open_.empty()) return true;
    int adjusted = current();
    const BuildNode& n = node(adjusted);
    if (n.ns == Namespace::kHtml) return true;
    if (t.type == Type::kEndOfFile) return true;
    if (is_mathml_text_integration_point(adjusted)) {
      if (t.type == Type::kStartTag && t.name != "mglyph" && t.name != "malignmark") return true;
      if (t.type == Type::kCharacter) return true;
    }
    if (n.ns == Namespace::kMathml && n.name == "annotation-xml" && t.type == Type::kStartTag &&
        t.name == "svg") {
      return true;
    }
    if (is_html_integration_point(adjusted) && (t.type == Type::kStartTag || t.type == Type::kCharacter)) {
      return true;
    }
    return false;
  }

  void dispatch(Token& t) {
    if (use_html_rules(t)) {
      process(t);
    } else {
      foreign_content(t);
    }
  }

  void process(Token& t) {
    switch (mode_) {
      case Mode::kInitial: return initial(t);
      case Mode::kBeforeHtml: return before_html(t);
      case Mode::kBeforeHead: return before_head(t);
      case Mode::kInHead: return in_head(t);
      case Mode::kAfterHead: return after_head(t);
      case Mode::kInBody: return in_body(t);
      case Mode::kText: return text(t);
      case Mode::kInTable: return in_table(t);
      case Mode::kInTableText: return in_table_text(t);
      case Mode::kInCaption: return in_caption(t);
      case Mode::kInColumnGroup: return in_column_group(t);
      case Mode::kInTableBody: return in_table_body(t);
      case Mode::kInRow: return in_row(t);
      case Mode::kInCell: return in_cell(t);
      case Mode::kInSelect: return in_select(t);
      case Mode::kInSelectInTable: return in_select_in_table(t);
      case Mode::kInTemplate: return in_template(t);
      case Mode::kAfterBody: return after_body(t);
      case Mode::kInFrameset: return in_frameset(t);
      case Mode::kAfterFrameset: return after_frameset(t);
      case Mode::kAfterAfterBody: return after_after_body(t);
      case Mode::kAfterAfterFrameset: return after_after_frameset(t);
    }
  }

  void reprocess_in(Mode m, Token& t) {
    mode_ = m;
    dispatch(t);
  }

  void reset_insertion_mode() {
    for (int i = static_cast<int>(open_.size()) - 1; i >= 0; --i) {
      int el = open_[i];
      bool last = (i == 0);
      const BuildNode& n = node(el);
      if (n.ns != Namespace::kHtml) {
        if (last) {
          mode_ = Mode::kInBody;
          return;
        }
        continue;
      }
      const std::string& name = n.name;
      if (name == "select") {
        for (int j = i - 1; j > 0; --j) {
          if (is_html(open_[j], "template")) break;
          if (is_html(open_[j], "table")) {
            mode_ = Mode::kInSelectInTable;
            return;
          }
        }
        mode_ = Mode::kInSelect;
        return;
      }
      if ((name == "td" || name == "th") && !last) {
        mode_ = Mode::kInCell;
        return;
      }
      if (name == "tr") {
        mode_ = Mode::kInRow;
        return;
      }
      if (one_of(name, {"tbody", "thead", "tfoot"})) {
        mode_ = Mode::kInTableBody;
        return;
      }
      if (name == "caption") {
        mode_ = Mode::kInCaption;
        return;
      }
      if (name == "colgroup") {
        mode_ = Mode::kInColumnGroup;
        return;
      }
      if (name == "table") {
        mode_ = Mode::kInTable;
        return;
      }
      if (name == "template") {
        mode_ = template_modes_.empty() ? Mode::kInBody : template_modes_.back();
        return;
      }
      if (name == "head" && !last) {
        mode_ = Mode::kInHead;
        return;
      }
      if (name == "body") {
        mode_ = Mode::kInBody;
        return;
      }
      if (name == "frameset") {
        mode_ = Mode::kInFrameset;
        return;
      }
      if (name == "html") {
        mode_ = head_ < 0 ? Mode::kBeforeHead : Mode::kAfterHead;
        return;
      }
      if (last) {
        mode_ = Mode::kInBody;
        return;
      }
    }
    mode_ = Mode::kInBody;
  }

  void generic_text_element(const Token& t, Tokenizer::State state) {
    insert_element(t);
    tokenizer_.set_state(state);
    original_mode_ = mode_;
    mode_ = Mode::kText;
  }

  static bool is_start(const Token& t, std::initializer_list<std::string_view> names) {
    return t.type == Type::kStartTag && one_of(t.name, names);
  }
  static bool is_end(const Token& t, std::initializer_list<std::string_view> names) {
    return t.type == Type::kEndTag && one_of(t.name, names);
  }
  static bool is_ws_char(const Token& t) { return t.type == Type::kCharacter && is_whitespace(t.ch); }

  // ---------------------------------------------------------------------------
  // Insertion modes

  void initial(Token& t) {
    if (is_ws_char(t) || t.type == Type::kComment) return;
    if (t.type == Type::kDoctype) {
      quirks_ = doctype_is_quirky(t);
      mode_ = Mode::kBeforeHtml;
      return;
    }
    quirks_ = true;
    reprocess_in(Mode::kBeforeHtml, t);
  }

  void before_html(Token& t) {
    if (t.type == Type::kDoctype || t.type == Type::kComment || is_ws_char(t)) return;
    if (is_start(t, {"html"})) {
      int el = create_element(t, Namespace::kHtml);
      insert_at(0, -1, el);
      open_.push_back(el);
      mode_ = Mode::kBeforeHead;
      return;
    }
    if (t.type == Type::kEndTag && !one_of(t.name, {"head", "body", "html", "br"})) return;
    Token html;
    html.type = Type::kStartTag;
    html.name = "html";
    int el = create_element(html, Namespace::kHtml);
    insert_at(0, -1, el);
    open_.push_back(el);
    reprocess_in(Mode::kBeforeHead, t);
  }

  void before_head(Token& t) {
    if (is_ws_char(t) || t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"head"})) {
      head_ = insert_element(t);
      mode_ = Mode::kInHead;
      return;
    }
    if (t.type == Type::kEndTag && !one_of(t.name, {"head", "body", "html", "br"})) return;
    Token head;
    head.type = Type::kStartTag;
    head.name = "head";
    head_ = insert_element(head);
    reprocess_in(Mode::kInHead, t);
  }

  void in_head(Token& t) {
    if (is_ws_char(t)) return insert_character(t.ch);
    if (t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"base", "basefont", "bgsound", "link", "meta"})) {
      insert_element(t);
      open_.pop_back();
      return;
    }
    if (is_start(t, {"title"})) return generic_text_element(t, Tokenizer::State::kRcdata);
    if (is_start(t, {"noscript", "noframes", "style"})) {
      return generic_text_element(t, Tokenizer::State::kRawtext);
    }
    if (is_start(t, {"script"})) return generic_text_element(t, Tokenizer::State::kScriptData);
    if (is_end(t, {"head"})) {
      open_.pop_back();
      mode_ = Mode::kAfterHead;
      return;
    }
    if (is_start(t, {"template"})) {
      insert_element(t);
      push_marker();
      frameset_ok_ = false;
      mode_ = Mode::kInTemplate;
      template_modes_.push_back(Mode::kInTemplate);
      return;
    }
    if (is_end(t, {"template"})) {
      if (!template_on_stack()) return;
      generate_implied_end_tags_thoroughly();
      pop_until("template");
      clear_formatting_to_marker();
      template_modes_.pop_back();
      reset_insertion_mode();
      return;
    }
    if (is_start(t, {"head"})) return;
    if (t.type == Type::kEndTag && !one_of(t.name, {"body", "html", "br"})) return;
    open_.pop_back();
    reprocess_in(Mode::kAfterHead, t);
  }

  void after_head(Token& t) {
    if (is_ws_char(t)) return insert_character(t.ch);
    if (t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"body"})) {
      insert_element(t);
      frameset_ok_ = false;
      mode_ = Mode::kInBody;
      return;
    }
    if (is_start(t, {"frameset"})) {
      insert_element(t);
      mode_ = Mode::kInFrameset;
      return;
    }
    if (is_start(t, {"base", "basefont", "bgsound", "link", "meta", "noframes", "script", "style",
                     "template", "title"})) {
      open_.push_back(head_);
      in_head(t);
      remove_from_stack(head_);
      return;
    }
    if (is_end(t, {"template"})) return in_head(t);
    if (is_start(t, {"head"})) return;
    if (t.type == Type::kEndTag && !one_of(t.name, {"body", "html", "br"})) return;
    Token body;
    body.type = Type::kStartTag;
    body.name = "body";
    insert_element(body);
    reprocess_in(Mode::kInBody, t);
  }

  void in_body(Token& t) {
    switch (t.type) {
      case Type::kCharacter:
        if (t.ch == 0) return;
        reconstruct_formatting();
        insert_character(t.ch);
        if (!is_whitespace(t.ch)) frameset_ok_ = false;
        return;
      case Type::kComment:
      case Type::kDoctype:
        return;
      case Type::kStartTag:
        return in_body_start(t);
      case Type::kEndTag:
        return in_body_end(t);
      case Type::kEndOfFile:
        if (!template_modes_.empty()) return in_template(t);
        return;
    }
  }

  void in_body_start(Token& t) {
    const std::string& name = t.name;
    if (name == "html") {
      if (template_on_stack()) return;
      merge_attributes(open_[0], t);
      return;
    }
    if (one_of(name, {"base", "basefont", "bgsound", "link", "meta", "noframes", "script", "style",
                      "template", "title"})) {
      return in_head(t);
    }
    if (name == "body") {
      if (open_.size() < 2 || !is_html(open_[1], "body") || template_on_stack()) return;
      frameset_ok_ = false;
      merge_attributes(open_[1], t);
      return;
    }
    if (name == "frameset") {
      if (open_.size() < 2 || !is_html(open_[1], "body") || !frameset_ok_) return;
      detach(open_[1]);
      open_.resize(1);
      insert_element(t);
      mode_ = Mode::kInFrameset;
      return;
    }
    if (one_of(name, {"address", "article", "aside", "blockquote", "center", "details", "dialog", "dir",
                      "div", "dl", "fieldset", "figcaption", "figure", "footer", "header", "hgroup",
                      "main", "menu", "nav", "ol", "p", "search", "section", "summary", "ul"})) {
      close_p_in_button_scope();
      insert_element(t);
      return;
    }
    if (is_heading(name)) {
      close_p_in_button_scope();
      if (!open_.empty() && node(current()).ns == Namespace::kHtml && is_heading(node(current()).name)) {
        open_.pop_back();
      }
      insert_element(t);
      return;
    }
    if (name == "pre" || name == "listing") {
      close_p_in_button_scope();
      insert_element(t);
      skip_newline_ = true;
      frameset_ok_ = false;
      return;
    }
    if (name == "form") {
      bool has_template = template_on_stack();
      if (form_ >= 0 && !has_template) return;
      close_p_in_button_scope();
      int el = insert_element(t);
      if (!has_template) form_ = el;
      return;
    }
    if (name == "li" || name == "dd" || name == "dt") {
      frameset_ok_ = false;
      for (int i = static_cast<int>(open_.size()) - 1; i >= 0; --i) {
        int el = open_[i];
        bool match = name == "li" ? is_html(el, "li") : is_html_one_of(el, {"dd", "dt"});
        if (match) {
          const std::string closing = node(el).name;
          generate_implied_end_tags(closing);
          pop_until(closing);
          break;
        }
        if (is_special(el) && !is_html_one_of(el, {"address", "div", "p"})) break;
      }
      close_p_in_button_scope();
      insert_element(t);
      return;
    }
    if (name == "plaintext") {
      close_p_in_button_scope();
      insert_element(t);
      tokenizer_.set_state(Tokenizer::State::kPlaintext);
      return;
    }
    if (name == "button") {
      if (in_scope("button")) {
        generate_implied_end_tags();
        pop_until("button");
      }
      reconstruct_formatting();
      insert_element(t);
      frameset_ok_ = false;
      return;
    }
    if (name == "a") {
      for (int i = static_cast<int>(active_.size()) - 1; i >= 0; --i) {
        if (active_[i].node < 0) break;
        if (is_html(active_[i].node, "a")) {
          int stale = active_[i].node;
          Token end;
          end.type = Type::kEndTag;
          end.name = "a";
          adoption_agency(end);
          int idx = formatting_index(stale);
          if (idx >= 0) active_.erase(active_.begin() + idx);
          remove_from_stack(stale);
          break;
        }
      }
      reconstruct_formatting();
      int el = insert_element(t);
      push_formatting(el, t);
      return;
    }
    if (one_of(name, {"b", "big", "code", "em", "font", "i", "s", "small", "strike", "strong", "tt", "u"})) {
      reconstruct_formatting();
      int el = insert_element(t);
      push_formatting(el, t);
      return;
    }
    if (name == "nobr") {
      reconstruct_formatting();
      if (in_scope("nobr")) {
        Token end;
        end.type = Type::kEndTag;
        end.name = "nobr";
        adoption_agency(end);
        reconstruct_formatting();
      }
      int el = insert_element(t);
      push_formatting(el, t);
      return;
    }
    if (one_of(name, {"applet", "marquee", "object"})) {
      reconstruct_formatting();
      insert_element(t);
      push_marker();
      frameset_ok_ = false;
      return;
    }
    if (name == "table") {
      if (!quirks_) close_p_in_button_scope();
      insert_element(t);
      frameset_ok_ = false;
      mode_ = Mode::kInTable;
      return;
    }
    if (one_of(name, {"area", "br", "embed", "img", "keygen", "wbr"})) {
      reconstruct_formatting();
      insert_element(t);
      open_.pop_back();
      frameset_ok_ = false;
      return;
    }
    if (name == "input") {
      reconstruct_formatting();
      insert_element(t);
      open_.pop_back();
      const Attribute* type = t.attribute("type");
      if (type == nullptr || ascii_lower(type->value) != "hidden") frameset_ok_ = false;
      return;
    }
    if (one_of(name, {"param", "source", "track"})) {
      insert_element(t);
      open_.pop_back();
      return;
    }
    if (name == "hr") {
      close_p_in_button_scope();
      insert_element(t);
      open_.pop_back();
      frameset_ok_ = false;
      return;
    }
    if (name == "image") {
      t.name = "img";
      return dispatch(t);
    }
    if (name == "textarea") {
      insert_element(t);
      skip_newline_ = true;
      tokenizer_.set_state(Tokenizer::State::kRcdata);
      original_mode_ = mode_;
      frameset_ok_ = false;
      mode_ = Mode::kText;
      return;
    }
    if (name == "xmp") {
      close_p_in_button_scope();
      reconstruct_formatting();
      frameset_ok_ = false;
      return generic_text_element(t, Tokenizer::State::kRawtext);
    }
    if (name == "iframe") {
      frameset_ok_ = false;
      return generic_text_element(t, Tokenizer::State::kRawtext);
    }
    if (name == "noembed" || name == "noscript") {
      return generic_text_element(t, Tokenizer::State::kRawtext);
    }
    if (name == "select") {
      reconstruct_formatting();
      insert_element(t);
      frameset_ok_ = false;
      if (one_of_mode({Mode::kInTable, Mode::kInCaption, Mode::kInTableBody, Mode::kInRow, Mode::kInCell})) {
        mode_ = Mode::kInSelectInTable;
      } else {
        mode_ = Mode::kInSelect;
      }
      return;
    }
    if (name == "optgroup" || name == "option") {
      if (current_is("option")) open_.pop_back();
      reconstruct_formatting();
      insert_element(t);
      return;
    }
    if (name == "rb" || name == "rtc") {
      if (in_scope("ruby")) generate_implied_end_tags();
      insert_element(t);
      return;
    }
    if (name == "rp" || name == "rt") {
      if (in_scope("ruby")) generate_implied_end_tags("rtc");
      insert_element(t);
      return;
    }
    if (name == "math" || name == "svg") {
      reconstruct_formatting();
      insert_element(t, name == "math" ? Namespace::kMathml : Namespace::kSvg);
      if (t.self_closing) open_.pop_back();
      return;
    }
    if (one_of(name, {"caption", "col", "colgroup", "frame", "head", "tbody", "td", "tfoot", "th", "thead",
                      "tr"})) {
      return;
    }
    reconstruct_formatting();
    insert_element(t);
  }

  void in_body_end(Token& t) {
    const std::string& name = t.name;
    if (name == "template") return in_head(t);
    if (name == "body" || name == "html") {
      if (!in_scope("body")) return;
      mode_ = Mode::kAfterBody;
      if (name == "html") dispatch(t);
      return;
    }
    if (one_of(name, {"address", "article", "aside", "blockquote", "button", "center", "details", "dialog",
                      "dir", "div", "dl", "fieldset", "figcaption", "figure", "footer", "header", "hgroup",
                      "listing", "main", "menu", "nav", "ol", "pre", "search", "section", "summary",
                      "ul"})) {
      if (!in_scope(name)) return;
      generate_implied_end_tags();
      pop_until(name);
      return;
    }
    if (name == "form") {
      if (!template_on_stack()) {
        int el = form_;
        form_ = -1;
        if (el < 0 || !node_in_scope(el)) return;
        generate_implied_end_tags();
        remove_from_stack(el);
      } else {
        if (!in_scope("form")) return;
        generate_implied_end_tags();
        pop_until("form");
      }
      return;
    }
    if (name == "p") {
      if (!in_scope("p", Scope::kButton)) {
        Token p;
        p.type = Type::kStartTag;
        p.name = "p";
        insert_element(p);
      }
      close_p();
      return;
    }
    if (name == "li") {
      if (!in_scope("li", Scope::kListItem)) return;
      generate_implied_end_tags("li");
      pop_until("li");
      return;
    }
    if (name == "dd" || name == "dt") {
      if (!in_scope(name)) return;
      generate_implied_end_tags(name);
      pop_until(name);
      return;
    }
    if (is_heading(name)) {
      bool any = in_scope_if(
          [&](int i) { return node(i).ns == Namespace::kHtml && is_heading(node(i).name); }, Scope::kDefault);
      if (!any) return;
      generate_implied_end_tags();
      pop_until_one_of({"h1", "h2", "h3", "h4", "h5", "h6"});
      return;
    }
    if (one_of(name, {"a", "b", "big", "code", "em", "font", "i", "nobr", "s", "small", "strike", "strong",
                      "tt", "u"})) {
      if (adoption_agency(t)) any_other_end_tag(t);
      return;
    }
    if (one_of(name, {"applet", "marquee", "object"})) {
      if (!in_scope(name)) return;
      generate_implied_end_tags();
      pop_until(name);
      clear_formatting_to_marker();
      return;
    }
    if (name == "br") {
      Token br;
      br.type = Type::kStartTag;
      br.name = "br";
      return in_body_start(br);
    }
    any_other_end_tag(t);
  }

  void any_other_end_tag(const Token& t) {
    for (int i = static_cast<int>(open_.size()) - 1; i >= 0; --i) {
      int el = open_[i];
      if (is_html(el, t.name)) {
        generate_implied_end_tags(t.name);
        while (!open_.empty()) {
          int top = current();
          open_.pop_back();
          if (top == el) break;
        }
        return;
      }
      if (is_special(el)) return;
    }
  }

  void merge_attributes(int el, const Token& t) {
    auto& attrs = node(el).attributes;
    for (const auto& a : t.attributes) {
      bool present = std::any_of(attrs.begin(), attrs.end(), [&](const Attribute& b) { return b.name == a.name; });
      if (!present) attrs.push_back(a);
    }
  }

  bool one_of_mode(std::initializer_list<Mode> modes) const {
    return std::find(modes.begin(), modes.end(), mode_) != modes.end();
  }

  void text(Token& t) {
    if (t.type == Type::kCharacter) return insert_character(t.ch);
    if (t.type == Type::kEndOfFile) {
      open_.pop_back();
      return reprocess_in(original_mode_, t);
    }
    if (t.type == Type::kEndTag) {
      open_.pop_back();
      mode_ = original_mode_;
    }
  }

  void in_table(Token& t) {
    if (t.type == Type::kCharacter && current_is_one_of({"table", "tbody", "template", "tfoot", "thead", "tr"})) {
      pending_table_chars_.clear();
      original_mode_ = mode_;
      return reprocess_in(Mode::kInTableText, t);
    }
    if (t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (t.type == Type::kStartTag) {
      const std::string& name = t.name;
      if (name == "caption") {
        clear_stack_back_to({"table", "template", "html"});
        push_marker();
        insert_element(t);
        mode_ = Mode::kInCaption;
        return;
      }
      if (name == "colgroup") {
        clear_stack_back_to({"table", "template", "html"});
        insert_element(t);
        mode_ = Mode::kInColumnGroup;
        return;
      }
      if (name == "col") {
        clear_stack_back_to({"table", "template", "html"});
        Token colgroup;
        colgroup.type = Type::kStartTag;
        colgroup.name = "colgroup";
        insert_element(colgroup);
        return reprocess_in(Mode::kInColumnGroup, t);
      }
      if (one_of(name, {"tbody", "tfoot", "thead"})) {
        clear_stack_back_to({"table", "template", "html"});
        insert_element(t);
        mode_ = Mode::kInTableBody;
        return;
      }
      if (one_of(name, {"td", "th", "tr"})) {
        clear_stack_back_to({"table", "template", "html"});
        Token tbody;
        tbody.type = Type::kStartTag;
        tbody.name = "tbody";
        insert_element(tbody);
        return reprocess_in(Mode::kInTableBody, t);
      }
      if (name == "table") {
        if (!in_scope("table", Scope::kTable)) return;
        pop_until("table");
        reset_insertion_mode();
        return dispatch(t);
      }
      if (one_of(name, {"style", "script", "template"})) return in_head(t);
      if (name == "input") {
        const Attribute* type = t.attribute("type");
        if (type != nullptr && ascii_lower(type->value) == "hidden") {
          insert_element(t);
          open_.pop_back();
          return;
        }
      }
      if (name == "form") {
        if (template_on_stack() || form_ >= 0) return;
        form_ = insert_element(t);
        open_.pop_back();
        return;
      }
    }
    if (t.type == Type::kEndTag) {
      const std::string& name = t.name;
      if (name == "table") {
        if (!in_scope("table", Scope::kTable)) return;
        pop_until("table");
        reset_insertion_mode();
        return;
      }
      if (one_of(name, {"body", "caption", "col", "colgroup", "html", "tbody", "td", "tfoot", "th", "thead",
                        "tr"})) {
        return;
      }
      if (name == "template") return in_head(t);
    }
    if (t.type == Type::kEndOfFile) return in_body(t);
    foster_parenting_ = true;
    in_body(t);
    foster_parenting_ = false;
  }

  void in_table_text(Token& t) {
    if (t.type == Type::kCharacter) {
      if (t.ch != 0) pending_table_chars_.push_back(t.ch);
      return;
    }
    bool all_ws = std::all_of(pending_table_chars_.begin(), pending_table_chars_.end(), is_whitespace);
    std::u32string pending = std::move(pending_table_chars_);
    pending_table_chars_.clear();
    for (char32_t c : pending) {
      if (all_ws) {
        insert_character(c);
      } else {
        Token ch;
        ch.type = Type::kCharacter;
        ch.ch = c;
        foster_parenting_ = true;
        in_body(ch);
        foster_parenting_ = false;
      }
    }
    reprocess_in(original_mode_, t);
  }

  void in_caption(Token& t) {
    if (is_end(t, {"caption"})) {
      close_caption();
      return;
    }
    if (is_start(t, {"caption", "col", "colgroup", "tbody", "td", "tfoot", "th", "thead", "tr"}) ||
        is_end(t, {"table"})) {
      if (!in_scope("caption", Scope::kTable)) return;
      close_caption();
      return dispatch(t);
    }
    if (is_end(t, {"body", "col", "colgroup", "html", "tbody", "td", "tfoot", "th", "thead", "tr"})) return;
    in_body(t);
  }

  void close_caption() {
    if (!in_scope("caption", Scope::kTable)) return;
    generate_implied_end_tags();
    pop_until("caption");
    clear_formatting_to_marker();
    mode_ = Mode::kInTable;
  }

  void in_column_group(Token& t) {
    if (is_ws_char(t)) return insert_character(t.ch);
    if (t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"col"})) {
      insert_element(t);
      open_.pop_back();
      return;
    }
    if (is_end(t, {"colgroup"})) {
      if (!current_is("colgroup")) return;
      open_.pop_back();
      mode_ = Mode::kInTable;
      return;
    }
    if (is_end(t, {"col"})) return;
    if (is_start(t, {"template"}) || is_end(t, {"template"})) return in_head(t);
    if (t.type == Type::kEndOfFile) return in_body(t);
    if (!current_is("colgroup")) return;
    open_.pop_back();
    reprocess_in(Mode::kInTable, t);
  }

  void in_table_body(Token& t) {
    if (is_start(t, {"tr"})) {
      clear_stack_back_to({"tbody", "tfoot", "thead", "template", "html"});
      insert_element(t);
      mode_ = Mode::kInRow;
      return;
    }
    if (is_start(t, {"th", "td"})) {
      clear_stack_back_to({"tbody", "tfoot", "thead", "template", "html"});
      Token tr;
      tr.type = Type::kStartTag;
      tr.name = "tr";
      insert_element(tr);
      return reprocess_in(Mode::kInRow, t);
    }
    if (is_end(t, {"tbody", "tfoot", "thead"})) {
      if (!in_scope(t.name, Scope::kTable)) return;
      clear_stack_back_to({"tbody", "tfoot", "thead", "template", "html"});
      open_.pop_back();
      mode_ = Mode::kInTable;
      return;
    }
    if (is_start(t, {"caption", "col", "colgroup", "tbody", "tfoot", "thead"}) || is_end(t, {"table"})) {
      if (!in_scope("tbody", Scope::kTable) && !in_scope("thead", Scope::kTable) &&
          !in_scope("tfoot", Scope::kTable)) {
        return;
      }
      clear_stack_back_to({"tbody", "tfoot", "thead", "template", "html"});
      open_.pop_back();
      return reprocess_in(Mode::kInTable, t);
    }
    if (is_end(t, {"body", "caption", "col", "colgroup", "html", "td", "th", "tr"})) return;
    in_table(t);
  }

  void in_row(Token& t) {
    if (is_start(t, {"th", "td"})) {
      clear_stack_back_to({"tr", "template", "html"});
      insert_element(t);
      mode_ = Mode::kInCell;
      push_marker();
      return;
    }
    if (is_end(t, {"tr"})) {
      if (!in_scope("tr", Scope::kTable)) return;
      clear_stack_back_to({"tr", "template", "html"});
      open_.pop_back();
      mode_ = Mode::kInTableBody;
      return;
    }
    if (is_start(t, {"caption", "col", "colgroup", "tbody", "tfoot", "thead", "tr"}) || is_end(t, {"table"})) {
      if (!in_scope("tr", Scope::kTable)) return;
      clear_stack_back_to({"tr", "template", "html"});
      open_.pop_back();
      return reprocess_in(Mode::kInTableBody, t);
    }
    if (is_end(t, {"tbody", "tfoot", "thead"})) {
      if (!in_scope(t.name, Scope::kTable)) return;
      if (!in_scope("tr", Scope::kTable)) return;
      clear_stack_back_to({"tr", "template", "html"});
      open_.pop_back();
      return reprocess_in(Mode::kInTableBody, t);
    }
    if (is_end(t, {"body", "caption", "col", "colgroup", "html", "td", "th"})) return;
    in_table(t);
  }

  void close_cell() {
    generate_implied_end_tags();
    pop_until_one_of({"td", "th"});
    clear_formatting_to_marker();
    mode_ = Mode::kInRow;
  }

  void in_cell(Token& t) {
    if (is_end(t, {"td", "th"})) {
      if (!in_scope(t.name, Scope::kTable)) return;
      generate_implied_end_tags();
      pop_until(t.name);
      clear_formatting_to_marker();
      mode_ = Mode::kInRow;
      return;
    }
    if (is_start(t, {"caption", "col", "colgroup", "tbody", "td", "tfoot", "th", "thead", "tr"})) {
      if (!in_scope("td", Scope::kTable) && !in_scope("th", Scope::kTable)) return;
      close_cell();
      return dispatch(t);
    }
    if (is_end(t, {"body", "caption", "col", "colgroup", "html"})) return;
    if (is_end(t, {"table", "tbody", "tfoot", "thead", "tr"})) {
      if (!in_scope(t.name, Scope::kTable)) return;
      close_cell();
      return dispatch(t);
    }
    in_body(t);
  }

  void in_select(Token& t) {
    switch (t.type) {
      case Type::kCharacter:
        if (t.ch != 0) insert_character(t.ch);
        return;
      case Type::kComment:
      case Type::kDoctype:
        return;
      case Type::kEndOfFile:
        return in_body(t);
      case Type::kStartTag:
        break;
      case Type::kEndTag:
        if (t.name == "optgroup") {
          if (current_is("option") && open_.size() >= 2 && is_html(open_[open_.size() - 2], "optgroup")) {
            open_.pop_back();
          }
          if (current_is("optgroup")) open_.pop_back();
          return;
        }
        if (t.name == "option") {
          if (current_is("option")) open_.pop_back();
          return;
        }
        if (t.name == "select") {
          if (!in_scope("select", Scope::kSelect)) return;
          pop_until("select");
          reset_insertion_mode();
          return;
        }
        if (t.name == "template") return in_head(t);
        return;
    }
    const std::string& name = t.name;
    if (name == "html") return in_body(t);
    if (name == "option") {
      if (current_is("option")) open_.pop_back();
      insert_element(t);
      return;
    }
    if (name == "optgroup") {
      if (current_is("option")) open_.pop_back();
      if (current_is("optgroup")) open_.pop_back();
      insert_element(t);
      return;
    }
    if (name == "select") {
      if (!in_scope("select", Scope::kSelect)) return;
      pop_until("select");
      reset_insertion_mode();
      return;
    }
    if (one_of(name, {"input", "keygen", "textarea"})) {
      if (!in_scope("select", Scope::kSelect)) return;
      pop_until("select");
      reset_insertion_mode();
      return dispatch(t);
    }
    if (name == "script" || name == "template") return in_head(t);
  }

  void in_select_in_table(Token& t) {
    if (is_start(t, {"caption", "table", "tbody", "tfoot", "thead", "tr", "td", "th"})) {
      pop_until("select");
      reset_insertion_mode();
      return dispatch(t);
    }
    if (is_end(t, {"caption", "table", "tbody", "tfoot", "thead", "tr", "td", "th"})) {
      if (!in_scope(t.name, Scope::kTable)) return;
      pop_until("select");
      reset_insertion_mode();
      return dispatch(t);
    }
    in_select(t);
  }

  void in_template(Token& t) {
    if (t.type == Type::kCharacter || t.type == Type::kComment || t.type == Type::kDoctype) return in_body(t);
    if (is_start(t, {"base", "basefont", "bgsound", "link", "meta", "noframes", "script", "style", "template",
                     "title"}) ||
        is_end(t, {"template"})) {
      return in_head(t);
    }
    auto switch_template_mode = [&](Mode m) {
      template_modes_.pop_back();
      template_modes_.push_back(m);
      reprocess_in(m, t);
    };
    if (is_start(t, {"caption", "colgroup", "tbody", "tfoot", "thead"})) return switch_template_mode(Mode::kInTable);
    if (is_start(t, {"col"})) return switch_template_mode(Mode::kInColumnGroup);
    if (is_start(t, {"tr"})) return switch_template_mode(Mode::kInTableBody);
    if (is_start(t, {"td", "th"})) return switch_template_mode(Mode::kInRow);
    if (t.type == Type::kStartTag) return switch_template_mode(Mode::kInBody);
    if (t.type == Type::kEndTag) return;
    // End of file.
    if (!template_on_stack()) return;
    pop_until("template");
    clear_formatting_to_marker();
    template_modes_.pop_back();
    reset_insertion_mode();
    dispatch(t);
  }

  void after_body(Token& t) {
    if (is_ws_char(t)) return in_body(t);
    if (t.type == Type::kComment || t.type == Type::kDoctype) return;
    if (is_start(t, {"html"})) return in_body(t);
    if (is_end(t, {"html"})) {
      mode_ = Mode::kAfterAfterBody;
      return;
    }
    if (t.type == Type::kEndOfFile) return;
    reprocess_in(Mode::kInBody, t);
  }

  void in_frameset(Token& t) {
    if (is_ws_char(t)) return insert_character(t.ch);
    if (is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"frameset"})) {
      insert_element(t);
      return;
    }
    if (is_end(t, {"frameset"})) {
      if (open_.size() == 1) return;
      open_.pop_back();
      if (!current_is("frameset")) mode_ = Mode::kAfterFrameset;
      return;
    }
    if (is_start(t, {"frame"})) {
      insert_element(t);
      open_.pop_back();
      return;
    }
    if (is_start(t, {"noframes"})) return in_head(t);
  }

  void after_frameset(Token& t) {
    if (is_ws_char(t)) return insert_character(t.ch);
    if (is_start(t, {"html"})) return in_body(t);
    if (is_end(t, {"html"})) {
      mode_ = Mode::kAfterAfterFrameset;
      return;
    }
    if (is_start(t, {"noframes"})) return in_head(t);
  }

  void after_after_body(Token& t) {
    if (t.type == Type::kComment || t.type == Type::kEndOfFile) return;
    if (t.type == Type::kDoctype || is_ws_char(t) || is_start(t, {"html"})) return in_body(t);
    reprocess_in(Mode::kInBody, t);
  }

  void after_after_frameset(Token& t) {
    if (t.type == Type::kComment || t.type == Type::kEndOfFile) return;
    if (t.type == Type::kDoctype || is_ws_char(t) || is_start(t, {"html"})) return in_body(t);
    if (is_start(t, {"noframes"})) return in_head(t);
  }

  void foreign_content(Token& t) {
    switch (t.type) {
      case Type::kCharacter:
        if (t.ch == 0) {
          insert_character(0xFFFD);
          return;
        }
        insert_character(t.ch);
        if (!is_whitespace(t.ch)) frameset_ok_ = false;
        return;
      case Type::kComment:
      case Type::kDoctype:
      case Type::kEndOfFile:
        return;
      case Type::kStartTag: {
        bool breakout =
            one_of(t.name, {"b",    "big",  "blockquote", "body", "br",     "center", "code",  "dd",
                            "div",  "dl",   "dt",         "em",   "embed",  "h1",     "h2",    "h3",
                            "h4",   "h5",   "h6",         "head", "hr",     "i",      "img",   "li",
                            "listing", "menu", "meta",    "nobr", "ol",     "p",      "pre",   "ruby",
                            "s",    "small", "span",      "strong", "strike", "sub",  "sup",   "table",
                            "tt",   "u",    "ul",         "var"}) ||
            (t.name == "font" && (t.attribute("color") || t.attribute("face") || t.attribute("size")));
        if (breakout) {
          while (!open_.empty()) {
            int cur = current();
            if (node(cur).ns == Namespace::kHtml || is_mathml_text_integration_point(cur) ||
                is_html_integration_point(cur)) {
              break;
            }
            open_.pop_back();
          }
          return process(t);
        }
        Namespace ns = node(current()).ns;
        insert_element(t, ns);
        if (t.self_closing) open_.pop_back();
        return;
      }
      case Type::kEndTag: {
        int i = static_cast<int>(open_.size()) - 1;
        while (i > 0) {
          int el = open_[i];
          if (node(el).name == t.name) {
            open_.resize(i);
            return;
          }
          --i;
          if (node(open_[i]).ns == Namespace::kHtml) return process(t);
        }
        return;
      }
    }
  }

  Tokenizer tokenizer_;
  BuildDocument doc_;
  std::vector<int> open_;
  std::vector<Formatting> active_;
  std::vector<Mode> template_modes_;
  std::u32string pending_table_chars_;
  Mode mode_ = Mode::kInitial;
  Mode original_mode_ = Mode::kInitial;
  int head_ = -1;
  int form_ = -1;
  bool frameset_ok_ = true;
  bool foster_parenting_ = false;
  bool quirks_ = false;
  bool skip_newline_ = false;
};

}  // namespace

int BuildDocument::document_element() const {
  for (int child : nodes.front().children) {
    if (nodes[static_cast<std::size_t>(child)].kind == BuildNode::Kind::kElement) return child;
  }
  return -1;
}

BuildDocument build_document(std::string_view html) { return TreeBuilder(html).run(); }

}  // namespace domcity::html
