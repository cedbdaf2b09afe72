#pragma once

#include <memory>
#include <string>

#include "domcity/session.hpp"

namespace domcity {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
};

// HTTP front end of a Session.
//
//   GET  /scene              current scene document
//   GET  /state              revision, filter, style, update mode
//   GET  /screenshot/<hash>  PNG bytes
//   GET  /updates            server-sent events: one "scene" event, then "diff" events
//   POST /snapshot /filter /style /refresh /mode
//   POST /updates            a typed frame: {"type": "snapshot"|"filter"|"style"|"refresh"|"mode", ...}
//
// Failures answer 400 with {"error": message, "code": name}.
class Server {
 public:
  explicit Server(Session& session, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on a background thread; returns the bound port.
  int start();
  void stop();

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Plain GET of an http(s) URL, following redirects. Throws Error(kIo).
std::string fetch_url(const std::string& url);

}  // namespace domcity
