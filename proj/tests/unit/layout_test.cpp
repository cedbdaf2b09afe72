#include <gtest/gtest.h>

#include <cmath>

#include "domcity/layout.hpp"
#include "generators.hpp"
#include "printers.hpp"

using namespace domcity;

namespace {

Measurement measure(NodePath path, Rect r, double sw = 0, double sh = 0, bool visible = true) {
  return {std::move(path), r, sw, sh, visible};
}

template <typename Fn>
ErrorCode error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

}  // namespace

TEST(IngestGeometry, OverflowExpandsBody) {
  auto t = parse_html("<p>x</p>");
  auto g = ingest_geometry(t, {measure({}, {0, 0, 1000, 800}), measure({1}, {0, 0, 1000, 800}, 0, 2400)},
                           Viewport{1000, 800, 0, 0});
  EXPECT_EQ(*g.find({1}), (Rect{0, 0, 1000, 2400}));
  EXPECT_EQ(g.page_h, 2400);
  EXPECT_EQ(g.source, GeometrySource::kMeasured);
}

TEST(IngestGeometry, HiddenElementGetsEpsilonAtParentCenter) {
  auto t = parse_html("<div><span>x</span></div>");
  auto g = ingest_geometry(t,
                           {measure({}, {0, 0, 1000, 800}), measure({1}, {0, 0, 1000, 800}),
                            measure({1, 0}, {100, 100, 200, 200}), measure({1, 0, 0}, {0, 0, 0, 0}, 0, 0, false)},
                           Viewport{1000, 800, 0, 0});
  EXPECT_EQ(*g.find({1, 0, 0}), (Rect{199.5, 199.5, 1, 1}));
}

TEST(IngestGeometry, MissingMeasurementsUseEpsilon) {
  auto t = parse_html("<p>x</p>");
  auto g = ingest_geometry(t, {measure({1}, {10, 10, 100, 100})}, Viewport{400, 300, 0, 0});
  // Root has no parent, so it centers on the viewport window.
  EXPECT_EQ(*g.find({}), (Rect{199.5, 149.5, 1, 1}));
  EXPECT_EQ(*g.find({0}), (Rect{199.5, 149.5, 1, 1}));
  EXPECT_EQ(*g.find({1, 0}), (Rect{59.5, 59.5, 1, 1}));
  EXPECT_EQ(g.rects.size(), t.size());
}

TEST(IngestGeometry, ZeroAreaMeasurementBecomesEpsilon) {
  auto t = parse_html("<p>x</p>");
  auto g = ingest_geometry(t, {measure({}, {0, 0, 100, 100}), measure({1}, {0, 0, 100, 0})}, Viewport{});
  EXPECT_EQ(*g.find({1}), (Rect{49.5, 49.5, 1, 1}));
}

TEST(IngestGeometry, UnresolvablePathsAreListed) {
  auto t = parse_html("<p>a</p><p>b</p>");
  try {
    ingest_geometry(t, {measure({1, 7, 3}, {0, 0, 1, 1}), measure({7, 3}, {0, 0, 1, 1})}, Viewport{});
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnresolvablePaths);
    EXPECT_NE(std::string(e.what()).find("[1,7,3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[7,3]"), std::string::npos);
  }
}

TEST(IngestGeometry, MalformedMeasurements) {
  auto t = parse_html("<p>x</p>");
  EXPECT_EQ(error_code([&] { ingest_geometry(t, {measure({1}, {0, 0, -1, 10})}, Viewport{}); }),
            ErrorCode::kMalformedMeasurement);
  EXPECT_EQ(error_code([&] { ingest_geometry(t, {measure({1}, {0, 0, 1, NAN})}, Viewport{}); }),
            ErrorCode::kMalformedMeasurement);
  EXPECT_EQ(error_code([&] { ingest_geometry(t, {measure({1}, {0, 0, 1, 1}, -5)}, Viewport{}); }),
            ErrorCode::kMalformedMeasurement);
  EXPECT_EQ(error_code([&] { ingest_geometry(t, {}, Viewport{0, 10, 0, 0}); }), ErrorCode::kMalformedMeasurement);
  EXPECT_EQ(error_code([&] {
              ingest_geometry(t, {measure({1}, {0, 0, 1, 1}), measure({1}, {0, 0, 2, 2})}, Viewport{});
            }),
            ErrorCode::kMalformedMeasurement);
}

TEST(IngestGeometry, NeverProducesEmptyRects) {
  testkit::Generator g(11);
  for (int i = 0; i < 100; ++i) {
    auto t = parse_html(testkit::render_document(*g.body(60)));
    std::vector<Measurement> ms;
    for (const auto& n : t.nodes()) {
      if (g.chance(0.3)) continue;
      ms.push_back(measure(node_path(t, n.id), {g.real(-50, 500), g.real(-50, 500), g.chance(0.2) ? 0 : g.real(0, 300),
                                                 g.real(0, 300)},
                           g.chance(0.2) ? g.real(0, 600) : 0, 0, g.chance(0.8)));
    }
    auto geom = ingest_geometry(t, ms, Viewport{});
    ASSERT_EQ(geom.rects.size(), t.size());
    for (const auto& [path, r] : geom.rects) {
      EXPECT_GT(r.w, 0);
      EXPECT_GT(r.h, 0);
      EXPECT_LE(r.right(), geom.page_w);
      EXPECT_LE(r.bottom(), geom.page_h);
    }
  }
}

TEST(SyntheticLayout, RootFillsViewport) {
  auto t = parse_html("");
  auto g = synthetic_layout(t, Viewport{1000, 800, 0, 0});
  EXPECT_EQ(*g.find({}), (Rect{0, 0, 1000, 800}));
  EXPECT_EQ(g.page_w, 1000);
  EXPECT_EQ(g.page_h, 800);
  EXPECT_EQ(g.source, GeometrySource::kSynthetic);
}

TEST(SyntheticLayout, TwoEqualLeavesSplitHorizontally) {
  // html has two leaf children (head, body) with equal weight 1.
  auto t = parse_html("");
  auto g = synthetic_layout(t, Viewport{1000, 800, 0, 0});
  EXPECT_EQ(*g.find({0}), (Rect{0, 0, 500, 800}));
  EXPECT_EQ(*g.find({1}), (Rect{500, 0, 500, 800}));
}

TEST(SyntheticLayout, WeightsAndAlternatingAxes) {
  // head weight 1, body weight 3 (body + p + b); body (depth 1) splits along y.
  auto t = parse_html("<p><b>x</b></p><i></i>");
  auto g = synthetic_layout(t, Viewport{800, 600, 0, 0});
  EXPECT_EQ(*g.find({0}), (Rect{0, 0, 160, 600}));
  EXPECT_EQ(*g.find({1}), (Rect{160, 0, 640, 600}));
  EXPECT_EQ(*g.find({1, 0}), (Rect{160, 0, 640, 400}));
  EXPECT_EQ(*g.find({1, 1}), (Rect{160, 400, 640, 200}));
  EXPECT_EQ(*g.find({1, 0, 0}), (Rect{160, 0, 640, 400}));
}

TEST(SyntheticLayout, Deterministic) {
  testkit::Generator g(3);
  for (int i = 0; i < 20; ++i) {
    auto t = parse_html(testkit::render_document(*g.body(100)));
    EXPECT_EQ(synthetic_layout(t, Viewport{}), synthetic_layout(t, Viewport{}));
  }
}

TEST(CropRect, PartialOverlap) {
  Viewport v{1000, 800, 0, 0};
  EXPECT_EQ(crop_rect({900, 0, 300, 100}, v, true), (Rect{900, 0, 100, 100}));
}

TEST(CropRect, Disjoint) {
  Viewport v{1000, 800, 0, 0};
  EXPECT_FALSE(crop_rect({1200, 0, 100, 100}, v, true).has_value());
  // Touching an edge leaves no area.
  EXPECT_FALSE(crop_rect({1000, 0, 100, 100}, v, true).has_value());
}

TEST(CropRect, OffIsIdentity) {
  Viewport v{1000, 800, 0, 0};
  for (Rect r : {Rect{1200, 0, 100, 100}, Rect{-5, -5, 1, 1}, Rect{0, 0, 0, 0}}) EXPECT_EQ(crop_rect(r, v, false), r);
}

TEST(CropRect, UsesScrolledWindow) {
  Viewport v{1000, 800, 0, 500};
  EXPECT_EQ(crop_rect({0, 0, 100, 600}, v, true), (Rect{0, 500, 100, 100}));
  EXPECT_FALSE(crop_rect({0, 0, 100, 400}, v, true).has_value());
}

TEST(CropRect, ResultLiesInWindow) {
  testkit::Generator g(5);
  for (int i = 0; i < 2000; ++i) {
    Viewport v{g.real(1, 2000), g.real(1, 2000), g.real(0, 500), g.real(0, 500)};
    Rect r{g.real(-1000, 3000), g.real(-1000, 3000), g.real(0, 2000), g.real(0, 2000)};
    auto c = crop_rect(r, v, true);
    if (!c) continue;
    const Rect w = v.window();
    EXPECT_GE(c->x, w.x);
    EXPECT_GE(c->y, w.y);
    EXPECT_LE(c->right(), w.right());
    EXPECT_LE(c->bottom(), w.bottom());
    EXPECT_GT(c->area(), 0);
  }
}
