#include "domcity/server.hpp"

#include <condition_variable>
#include <deque>
#include <list>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "domcity/wire.hpp"

namespace domcity {
namespace {

using json = nlohmann::json;

constexpr auto kStreamPoll = std::chrono::milliseconds(500);
constexpr int kPingEvery = 30;  // polls between keep-alive comments

std::string sse_event(const char* event, std::uint64_t revision, const std::string& body) {
  std::string out = std::string("event: ") + event + "\nid: " + std::to_string(revision) + "\n";
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    out += "data: ";
    out.append(body, start, end - start);
    out += '\n';
    start = end + 1;
  }
  out += '\n';
  return out;
}

void set_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_content(body, "application/json");
}

void set_error(httplib::Response& res, const std::string& message, const char* code, int status) {
  set_json(res, json{{"error", message}, {"code", code}}.dump() + "\n", status);
}

const char* to_string(UpdateMode mode) { return mode == UpdateMode::kManual ? "manual" : "continuous"; }

UpdateMode parse_update_mode(const json& j) {
  if (!j.is_object() || !j.contains("update_mode") || !j["update_mode"].is_string()) {
    throw Error(ErrorCode::kSchema, "schema error: expected {\"update_mode\": \"continuous\"|\"manual\"}");
  }
  const std::string m = j["update_mode"];
  if (m == "continuous") return UpdateMode::kContinuous;
  if (m == "manual") return UpdateMode::kManual;
  throw Error(ErrorCode::kSchema, "schema error: unknown update mode '" + m + "'");
}

}  // namespace

struct Server::Impl {
  // One connected /updates client.
  struct Stream {
    std::deque<std::string> frames;
  };

  Session& session;
  ServerOptions options;
  httplib::Server http;
  std::thread listener;
  int bound_port = 0;
  int subscription = -1;

  std::mutex hub_mutex;
  std::condition_variable hub_cv;
  std::list<std::shared_ptr<Stream>> streams;
  bool stopping = false;

  Impl(Session& s, ServerOptions o) : session(s), options(std::move(o)) {}

  void broadcast(const SceneDiff& diff) {
    const std::string frame = sse_event("diff", diff.target_revision, wire::diff_to_json(diff));
    {
      std::lock_guard lock(hub_mutex);
      for (auto& s : streams) s->frames.push_back(frame);
    }
    hub_cv.notify_all();
  }

  std::string state_json() {
    auto scene = session.scene();
    SessionInputs in = session.inputs();
    std::string out = "{\"revision\":" + std::to_string(scene->revision);
    out += ",\"filter\":" + wire::filter_to_json(in.filter);
    out.pop_back();
    out += ",\"style\":" + wire::style_to_json(in.style);
    out.pop_back();
    out += std::string(",\"update_mode\":\"") + to_string(session.update_mode()) + "\"";
    out += std::string(",\"staged\":") + (session.has_staged() ? "true" : "false") + "}\n";
    return out;
  }

  void reply_diff(httplib::Response& res, const SceneDiff& diff) { set_json(res, wire::diff_to_json(diff)); }

  void on_snapshot(const std::string& body, httplib::Response& res) {
    Snapshot snap = wire::snapshot_from_json(body);
    if (auto diff = session.handle_snapshot(snap)) {
      reply_diff(res, *diff);
    } else {
      set_json(res, "{\"staged\":true,\"revision\":" + std::to_string(session.scene()->revision) + "}\n", 202);
    }
  }

  void on_mode(const json& j, httplib::Response& res) {
    session.set_update_mode(parse_update_mode(j));
    set_json(res, state_json());
  }

  // Frames posted to /updates carry their payload under a key named after the type.
  void on_frame(const std::string& body, httplib::Response& res) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kSchema, std::string("schema error: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      throw Error(ErrorCode::kSchema, "schema error: frame needs a string 'type'");
    }
    const std::string type = j["type"];
    auto payload = [&](const char* key) {
      if (!j.contains(key)) throw Error(ErrorCode::kSchema, std::string("schema error: missing field '") + key + "'");
      return j[key].dump();
    };
    if (type == "snapshot") {
      on_snapshot(payload("snapshot"), res);
    } else if (type == "filter") {
      reply_diff(res, session.set_filter(wire::filter_from_json(payload("filter"))));
    } else if (type == "style") {
      reply_diff(res, session.set_style(wire::style_from_json(payload("style"))));
    } else if (type == "refresh") {
      reply_diff(res, session.refresh());
    } else if (type == "mode") {
      on_mode(j, res);
    } else {
      throw Error(ErrorCode::kSchema, "schema error: unknown frame type '" + type + "'");
    }
  }

  void open_stream(httplib::Response& res) {
    auto stream = std::make_shared<Stream>();
    {
      // Registering before reading the scene means no diff after it can be missed.
      std::lock_guard lock(hub_mutex);
      streams.push_back(stream);
      auto scene = session.scene();
      stream->frames.push_back(sse_event("scene", scene->revision, wire::scene_to_json(*scene)));
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, stream, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
          std::unique_lock lock(hub_mutex);
          hub_cv.wait_for(lock, kStreamPoll, [&] { return stopping || !stream->frames.empty(); });
          if (stopping) return false;
          std::deque<std::string> pending;
          pending.swap(stream->frames);
          lock.unlock();
          if (pending.empty() && ++idle >= kPingEvery) {
            idle = 0;
            pending.push_back(": ping\n\n");
          }
          for (const auto& f : pending) {
            if (!sink.write(f.data(), f.size())) return false;
          }
          return sink.is_writable();
        },
        [this, stream](bool) {
          std::lock_guard lock(hub_mutex);
          streams.remove(stream);
        });
  }

  void install_routes() {
    // httplib's default also sets SO_REUSEPORT, which would let a second server share a busy port.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        set_error(res, e.what(), code_name(e.code()), 400);
      } catch (const std::exception& e) {
        set_error(res, e.what(), "internal", 500);
      } catch (...) {
        set_error(res, "unknown failure", "internal", 500);
      }
    });
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Get("/scene", [this](const httplib::Request&, httplib::Response& res) {
      set_json(res, wire::scene_to_json(*session.scene()));
    });
    http.Get("/state", [this](const httplib::Request&, httplib::Response& res) { set_json(res, state_json()); });
    http.Get(R"(/screenshot/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto png = session.screenshot(req.matches[1]);
      if (!png) {
        set_error(res, "no such screenshot", "not_found", 404);
        return;
      }
      res.set_content(*png, "image/png");
    });
    http.Get("/updates", [this](const httplib::Request&, httplib::Response& res) { open_stream(res); });

    http.Post("/snapshot", [this](const httplib::Request& req, httplib::Response& res) { on_snapshot(req.body, res); });
    http.Post("/filter", [this](const httplib::Request& req, httplib::Response& res) {
      reply_diff(res, session.set_filter(wire::filter_from_json(req.body)));
    });
    http.Post("/style", [this](const httplib::Request& req, httplib::Response& res) {
      reply_diff(res, session.set_style(wire::style_from_json(req.body)));
    });
    http.Post("/refresh", [this](const httplib::Request&, httplib::Response& res) { reply_diff(res, session.refresh()); });
    http.Post("/mode", [this](const httplib::Request& req, httplib::Response& res) {
      json j;
      try {
        j = json::parse(req.body);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kSchema, std::string("schema error: invalid JSON: ") + e.what());
      }
      on_mode(j, res);
    });
    http.Post("/updates", [this](const httplib::Request& req, httplib::Response& res) { on_frame(req.body, res); });
  }
};

Server::Server(Session& session, ServerOptions options) : impl_(std::make_unique<Impl>(session, std::move(options))) {
  impl_->install_routes();
}

Server::~Server() { stop(); }

int Server::start() {
  Impl& im = *impl_;
  if (im.listener.joinable()) return im.bound_port;
  if (im.options.port == 0) {
    im.bound_port = im.http.bind_to_any_port(im.options.host);
    if (im.bound_port < 0) throw Error(ErrorCode::kIo, "cannot bind " + im.options.host);
  } else {
    if (!im.http.bind_to_port(im.options.host, im.options.port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + im.options.host + ":" + std::to_string(im.options.port));
    }
    im.bound_port = im.options.port;
  }
  {
    std::lock_guard lock(im.hub_mutex);
    im.stopping = false;
  }
  im.subscription = im.session.subscribe([&im](const SceneDiff& d) { im.broadcast(d); });
  im.listener = std::thread([&im] { im.http.listen_after_bind(); });
  im.http.wait_until_ready();
  return im.bound_port;
}

void Server::stop() {
  Impl& im = *impl_;
  {
    std::lock_guard lock(im.hub_mutex);
    im.stopping = true;
  }
  im.hub_cv.notify_all();
  im.http.stop();
  if (im.listener.joinable()) im.listener.join();
  if (im.subscription >= 0) {
    im.session.unsubscribe(im.subscription);
    im.subscription = -1;
  }
}

int Server::port() const { return impl_->bound_port; }

std::string fetch_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/?#]+)([^#]*))", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(url, m, kUrl)) throw Error(ErrorCode::kIo, "unsupported URL: " + url);
  httplib::Client client(m[1].str());
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  std::string path = m[2].str();
  if (path.empty()) path = "/";
  auto res = client.Get(path);
  if (!res) throw Error(ErrorCode::kIo, "cannot fetch " + url + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kIo, "cannot fetch " + url + ": HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace domcity
