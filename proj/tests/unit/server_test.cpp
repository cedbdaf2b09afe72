#include <gtest/gtest.h>

#include <future>

#include "domcity/server.hpp"
#include "domcity/wire.hpp"
#include "httplib.h"
#include "json.hpp"
#include "printers.hpp"

using namespace domcity;
using json = nlohmann::json;

namespace {

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<Server>(session_, ServerOptions{"127.0.0.1", 0});
    port_ = server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(5);
  }
  void TearDown() override { server_->stop(); }

  httplib::Result post(const std::string& path, const std::string& body) {
    return client_->Post(path, body, "application/json");
  }

  Session session_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

const std::string kSnapshot = R"({"html":"<p>hi</p>"})";

}  // namespace

TEST_F(ServerTest, BindsAnEphemeralPort) {
  EXPECT_GT(port_, 0);
  EXPECT_EQ(server_->port(), port_);
}

TEST_F(ServerTest, InitialSceneIsEmpty) {
  auto res = client_->Get("/scene");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(res->body, wire::scene_to_json(*session_.scene()));
  EXPECT_EQ(wire::scene_from_json(res->body).revision, 0u);
}

TEST_F(ServerTest, SnapshotReturnsDiffAndUpdatesScene) {
  auto res = post("/snapshot", kSnapshot);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  SceneDiff d = wire::diff_from_json(res->body);
  EXPECT_EQ(d.base_revision, 0u);
  EXPECT_EQ(d.target_revision, 1u);
  EXPECT_EQ(d.added.size(), 4u);
  auto scene = client_->Get("/scene");
  EXPECT_EQ(scene->body, wire::scene_to_json(*session_.scene()));
  EXPECT_EQ(session_.scene()->revision, 1u);
}

TEST_F(ServerTest, InvalidFilterIs400AndKeepsState) {
  post("/snapshot", kSnapshot);
  auto res = post("/filter", R"({"depth_min":3,"depth_max":1})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  auto body = json::parse(res->body);
  EXPECT_EQ(body["code"], "invalid_filter");
  EXPECT_TRUE(body["error"].is_string());
  EXPECT_EQ(session_.scene()->revision, 1u);
  EXPECT_EQ(session_.inputs().filter, FilterSpec{});
}

TEST_F(ServerTest, MalformedBodiesAre400) {
  for (const char* path : {"/snapshot", "/filter", "/style", "/mode", "/updates"}) {
    auto res = post(path, "{not json");
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 400) << path;
    EXPECT_EQ(json::parse(res->body)["code"], "schema") << path;
  }
}

TEST_F(ServerTest, FilterAndStyleReturnDiffs) {
  post("/snapshot", kSnapshot);
  auto res = post("/filter", R"({"subtree_root":[1,0]})");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(wire::diff_from_json(res->body).removed.size(), 3u);
  res = post("/style", R"({"layer_gap":3})");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(wire::diff_from_json(res->body).style.layer_gap, 3);
  EXPECT_EQ(session_.scene()->revision, 3u);
}

TEST_F(ServerTest, ManualModeAndRefresh) {
  auto res = post("/mode", R"({"update_mode":"manual"})");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["update_mode"], "manual");
  res = post("/snapshot", kSnapshot);
  EXPECT_EQ(res->status, 202);
  EXPECT_EQ(json::parse(res->body)["staged"], true);
  auto state = json::parse(client_->Get("/state")->body);
  EXPECT_EQ(state["staged"], true);
  EXPECT_EQ(state["revision"], 0);
  res = post("/refresh", "");
  EXPECT_EQ(wire::diff_from_json(res->body).added.size(), 4u);
  EXPECT_EQ(session_.scene()->revision, 1u);
  EXPECT_EQ(post("/mode", R"({"update_mode":"sometimes"})")->status, 400);
}

TEST_F(ServerTest, StateReportsFilterAndStyle) {
  auto state = json::parse(client_->Get("/state")->body);
  EXPECT_EQ(state["revision"], 0);
  EXPECT_EQ(state["update_mode"], "continuous");
  EXPECT_EQ(state["filter"]["cropping"], true);
  EXPECT_EQ(state["style"]["color_mode"], "per-layer");
}

TEST_F(ServerTest, ScreenshotEndpoint) {
  Snapshot snap;
  snap.html = "<p>hi</p>";
  snap.screenshot = Screenshot{std::string("\x89PNG\r\n\x1a\n\0", 9), 1280, 800};
  auto res = post("/snapshot", wire::snapshot_to_json(snap));
  ASSERT_EQ(res->status, 200);
  auto ref = wire::diff_from_json(res->body).screenshot_ref;
  ASSERT_TRUE(ref);
  auto png = client_->Get("/screenshot/" + *ref);
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(png->body, snap.screenshot->png);
  EXPECT_EQ(client_->Get("/screenshot/" + std::string(64, '0'))->status, 404);
}

TEST_F(ServerTest, UpdateFrames) {
  auto res = post("/updates", R"({"type":"snapshot","snapshot":{"html":"<p>hi</p>"}})");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(wire::diff_from_json(res->body).target_revision, 1u);
  res = post("/updates", R"({"type":"filter","filter":{"search":"<p"}})");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(session_.scene()->visible_count, 1u);
  res = post("/updates", R"({"type":"style","style":{"color_mode":"tag-hash"}})");
  ASSERT_EQ(res->status, 200);
  res = post("/updates", R"({"type":"mode","update_mode":"manual"})");
  ASSERT_EQ(res->status, 200);
  res = post("/updates", R"({"type":"refresh"})");
  ASSERT_EQ(res->status, 200);
  EXPECT_TRUE(wire::diff_from_json(res->body).empty());
  EXPECT_EQ(post("/updates", R"({"type":"teleport"})")->status, 400);
  EXPECT_EQ(post("/updates", R"({"type":"filter"})")->status, 400);
  EXPECT_EQ(session_.scene()->revision, 3u);
}

TEST_F(ServerTest, CorsHeaders) {
  auto res = client_->Get("/scene");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto pre = client_->Options("/filter");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(ServerTest, UpdateStreamSendsSceneThenDiffs) {
  post("/snapshot", kSnapshot);
  std::promise<void> got_scene;
  std::string received;
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10);
    bool signalled = false;
    c.Get("/updates", [&](const char* data, std::size_t n) {
      received.append(data, n);
      if (!signalled && received.find("\n\n") != std::string::npos) {
        signalled = true;
        got_scene.set_value();
      }
      // Stop once two diff events have arrived.
      std::size_t count = 0;
      for (std::size_t at = received.find("event: diff"); at != std::string::npos;
           at = received.find("event: diff", at + 1)) {
        ++count;
      }
      return count < 2 || received.rfind("\n\n") != received.size() - 2;
    });
  });
  ASSERT_EQ(got_scene.get_future().wait_for(std::chrono::seconds(5)), std::future_status::ready);
  post("/snapshot", R"({"html":"<p>hi</p><p>there</p>"})");
  post("/filter", R"({"search":"there"})");
  reader.join();

  const std::string scene_event = "event: scene\nid: 1\ndata: {\n";
  ASSERT_EQ(received.rfind(scene_event, 0), 0u) << received;
  const std::size_t d1 = received.find("event: diff\nid: 2\ndata: ");
  const std::size_t d2 = received.find("event: diff\nid: 3\ndata: ");
  ASSERT_NE(d1, std::string::npos) << received;
  ASSERT_NE(d2, std::string::npos) << received;
  EXPECT_LT(d1, d2);

  // Reassemble the data lines of the first event into the scene document.
  std::string body;
  std::size_t pos = received.find("data: ");
  const std::size_t end = received.find("\n\n");
  while (pos < end) {
    std::size_t eol = received.find('\n', pos);
    body += received.substr(pos + 6, eol - pos - 6) + "\n";
    pos = received.find("data: ", eol);
  }
  EXPECT_EQ(wire::scene_from_json(body).revision, 1u);
}

TEST(Server, PortInUseThrows) {
  Session s;
  Server a(s, {"127.0.0.1", 0});
  const int port = a.start();
  Server b(s, {"127.0.0.1", port});
  EXPECT_THROW(b.start(), Error);
}

TEST(FetchUrl, RejectsUnsupportedSchemes) {
  EXPECT_THROW(fetch_url("ftp://example.com/x"), Error);
  EXPECT_THROW(fetch_url("not a url"), Error);
}

TEST(FetchUrl, ReadsFromLocalServer) {
  Session s;
  s.handle_snapshot(Snapshot{"<p>hi</p>"});
  Server srv(s, {"127.0.0.1", 0});
  const int port = srv.start();
  EXPECT_EQ(fetch_url("http://127.0.0.1:" + std::to_string(port) + "/scene"), wire::scene_to_json(*s.scene()));
  EXPECT_THROW(fetch_url("http://127.0.0.1:" + std::to_string(port) + "/nowhere"), Error);
}
