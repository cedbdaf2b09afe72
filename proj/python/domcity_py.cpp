#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "domcity/dom.hpp"
#include "domcity/layout.hpp"
#include "domcity/query.hpp"
#include "domcity/scene.hpp"
#include "domcity/session.hpp"
#include "domcity/wire.hpp"

namespace py = pybind11;
using namespace domcity;

namespace {

NodePath to_path(const std::vector<std::uint32_t>& steps) { return NodePath(steps); }

StyleConfig style_or_default(const std::optional<std::string>& json) {
  return json ? wire::style_from_json(*json) : StyleConfig{};
}

FilterSpec filter_or_default(const std::optional<std::string>& json) {
  return json ? wire::filter_from_json(*json) : FilterSpec{};
}

py::dict node_dict(const DomTree& tree, const DomNode& n) {
  py::dict d;
  d["id"] = n.id.value;
  d["tag"] = n.tag;
  d["depth"] = n.depth;
  d["path"] = node_path(tree, n.id).steps;
  py::list attrs;
  for (const auto& a : n.attributes) attrs.append(py::make_tuple(a.name, a.value));
  d["attributes"] = attrs;
  d["direct_text"] = n.direct_text;
  std::vector<std::uint32_t> children;
  for (NodeId c : n.children) children.push_back(c.value);
  d["children"] = children;
  return d;
}

}  // namespace

PYBIND11_MODULE(_domcity, m) {
  m.doc() = "HTML documents as layered 3D scenes";

  auto base_error = py::register_exception<Error>(m, "DomcityError", PyExc_ValueError);

  py::class_<DomTree, std::shared_ptr<DomTree>>(m, "DomTree")
      .def("__len__", &DomTree::size)
      .def_property_readonly("max_depth", &DomTree::max_depth)
      .def("node", [](const DomTree& t, std::uint32_t id) { return node_dict(t, t.node(NodeId{id})); })
      .def("nodes",
           [](const DomTree& t) {
             py::list out;
             for (const auto& n : t.nodes()) out.append(node_dict(t, n));
             return out;
           })
      .def("node_path", [](const DomTree& t, std::uint32_t id) { return node_path(t, NodeId{id}).steps; })
      .def("resolve_path",
           [](const DomTree& t, const std::vector<std::uint32_t>& path) { return resolve_path(t, to_path(path)).value; })
      .def("serialize", [](const DomTree& t, std::uint32_t id) { return serialize_node(t, NodeId{id}).text; });

  m.def(
      "parse_html", [](const std::string& html) { return std::make_shared<DomTree>(parse_html(html)); },
      py::arg("html"));

  m.def(
      "synthetic_layout",
      [](const DomTree& tree, double w, double h) {
        GeometryMap g = synthetic_layout(tree, Viewport{w, h, 0, 0});
        py::dict rects;
        for (const auto& [path, r] : g.rects) {
          py::tuple key = py::cast(path.steps);
          rects[key] = py::make_tuple(r.x, r.y, r.w, r.h);
        }
        return rects;
      },
      py::arg("tree"), py::arg("width") = 1280.0, py::arg("height") = 800.0);

  m.def(
      "apply_filters",
      [](const DomTree& tree, const std::optional<std::string>& filter, double w, double h) {
        GeometryMap g = synthetic_layout(tree, Viewport{w, h, 0, 0});
        std::vector<std::uint32_t> ids;
        for (NodeId id : apply_filters(tree, g, filter_or_default(filter))) ids.push_back(id.value);
        return ids;
      },
      py::arg("tree"), py::arg("filter") = std::nullopt, py::arg("width") = 1280.0, py::arg("height") = 800.0);

  m.def(
      "match_search", [](const std::string& text, const std::string& query) { return match_search(MatchText{text}, query); },
      py::arg("text"), py::arg("query"));

  m.def(
      "color_for",
      [](const std::string& tag, std::uint32_t depth, const std::string& mode) {
        Rgb c = color_for(tag, depth, wire::parse_color_mode(mode));
        return py::make_tuple(c.r, c.g, c.b);
      },
      py::arg("tag"), py::arg("depth"), py::arg("mode") = "per-layer");

  m.def(
      "texture_uv",
      [](double x, double y, double w, double h, double page_w, double page_h) {
        UvRect uv = texture_uv(Rect{x, y, w, h}, page_w, page_h);
        return py::make_tuple(uv.u0, uv.v0, uv.u1, uv.v1);
      },
      py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("page_w"), py::arg("page_h"));

  m.def(
      "export_scene",
      [](const std::string& html, const std::optional<std::string>& style, const std::optional<std::string>& filter,
         double w, double h) {
        SessionOptions o;
        o.style = style_or_default(style);
        o.filter = filter_or_default(filter);
        o.default_viewport = Viewport{w, h, 0, 0};
        Session s(o);
        Snapshot snap;
        snap.html = html;
        s.handle_snapshot(snap);
        return wire::scene_to_json(*s.scene());
      },
      py::arg("html"), py::arg("style") = std::nullopt, py::arg("filter") = std::nullopt, py::arg("width") = 1280.0,
      py::arg("height") = 800.0);

  m.def(
      "diff_scenes",
      [](const std::string& old_scene, const std::string& new_scene) {
        return wire::diff_to_json(diff_scenes(wire::scene_from_json(old_scene), wire::scene_from_json(new_scene)));
      },
      py::arg("old_scene"), py::arg("new_scene"));

  m.def(
      "apply_diff",
      [](const std::string& scene, const std::string& diff) {
        return wire::scene_to_json(apply_diff(wire::scene_from_json(scene), wire::diff_from_json(diff)));
      },
      py::arg("scene"), py::arg("diff"));

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::optional<std::string>& style, const std::optional<std::string>& filter,
                       bool manual) {
             SessionOptions o;
             o.style = style_or_default(style);
             o.filter = filter_or_default(filter);
             o.update_mode = manual ? UpdateMode::kManual : UpdateMode::kContinuous;
             return std::make_unique<Session>(o);
           }),
           py::arg("style") = std::nullopt, py::arg("filter") = std::nullopt, py::arg("manual") = false)
      .def(
          "handle_snapshot",
          [](Session& s, const std::string& snapshot_json) -> std::optional<std::string> {
            auto d = s.handle_snapshot(wire::snapshot_from_json(snapshot_json));
            if (!d) return std::nullopt;
            return wire::diff_to_json(*d);
          },
          py::arg("snapshot"))
      .def("refresh", [](Session& s) { return wire::diff_to_json(s.refresh()); })
      .def(
          "set_filter", [](Session& s, const std::string& f) { return wire::diff_to_json(s.set_filter(wire::filter_from_json(f))); },
          py::arg("filter"))
      .def(
          "set_style", [](Session& s, const std::string& st) { return wire::diff_to_json(s.set_style(wire::style_from_json(st))); },
          py::arg("style"))
      .def_property_readonly("revision", [](const Session& s) { return s.scene()->revision; })
      .def("scene", [](const Session& s) { return wire::scene_to_json(*s.scene()); });

  m.attr("__version__") = "0.1.0";
  (void)base_error;
}
