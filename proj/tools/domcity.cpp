// domcity: serve a live DOM city or export one scene as JSON.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "domcity/server.hpp"
#include "domcity/session.hpp"
#include "domcity/watcher.hpp"
#include "domcity/wire.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnreadable = 2;

std::atomic<bool> g_interrupted{false};

struct SceneFlags {
  double layer_gap = domcity::StyleConfig{}.layer_gap;
  double box_height = domcity::StyleConfig{}.box_height;
  double world_scale = domcity::StyleConfig{}.world_scale;
  std::string color_mode = "per-layer";
  std::string texture_mode = "none";
  bool no_crop = false;
  std::string query;
  unsigned depth_min = 0;
  std::optional<unsigned> depth_max;
  std::string subtree;
  std::string viewport = "1280x800";
};

void add_scene_flags(CLI::App* cmd, SceneFlags& f) {
  cmd->add_option("--layer-gap", f.layer_gap, "World units between depth layers")->check(CLI::PositiveNumber);
  cmd->add_option("--box-height", f.box_height, "Box height in world units")->check(CLI::PositiveNumber);
  cmd->add_option("--world-scale", f.world_scale, "World units per CSS pixel")->check(CLI::PositiveNumber);
  cmd->add_option("--color-mode", f.color_mode, "per-layer or tag-hash")
      ->check(CLI::IsMember({"per-layer", "tag-hash"}));
  cmd->add_option("--texture-mode", f.texture_mode, "none, leaves or all")
      ->check(CLI::IsMember({"none", "leaves", "all"}));
  cmd->add_flag("--no-crop", f.no_crop, "Keep elements outside the viewport");
  cmd->add_option("--query", f.query, "Case-insensitive text search");
  cmd->add_option("--depth-min", f.depth_min, "Lowest depth shown");
  cmd->add_option("--depth-max", f.depth_max, "Highest depth shown");
  cmd->add_option("--subtree", f.subtree, "Isolate the subtree at a path such as 1,0");
  cmd->add_option("--viewport", f.viewport, "Viewport for synthetic layout, WxH");
}

domcity::NodePath parse_path(const std::string& text) {
  domcity::NodePath p;
  std::stringstream ss(text);
  std::string step;
  while (std::getline(ss, step, ',')) {
    if (step.empty() || step.find_first_not_of("0123456789") != std::string::npos) {
      throw CLI::ValidationError("--subtree", "expected comma-separated indices, got '" + text + "'");
    }
    p.steps.push_back(static_cast<std::uint32_t>(std::stoul(step)));
  }
  return p;
}

domcity::Viewport parse_viewport(const std::string& text) {
  double w = 0, h = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || !in.eof() || w <= 0 || h <= 0) {
    throw CLI::ValidationError("--viewport", "expected WxH, got '" + text + "'");
  }
  return {w, h, 0, 0};
}

domcity::SessionOptions session_options(const SceneFlags& f) {
  domcity::SessionOptions o;
  o.style.layer_gap = f.layer_gap;
  o.style.box_height = f.box_height;
  o.style.world_scale = f.world_scale;
  o.style.color_mode = domcity::wire::parse_color_mode(f.color_mode);
  o.style.texture_mode = domcity::wire::parse_texture_mode(f.texture_mode);
  o.filter.cropping = !f.no_crop;
  o.filter.search = f.query;
  o.filter.depth_min = f.depth_min;
  o.filter.depth_max = f.depth_max;
  if (!f.subtree.empty()) o.filter.subtree_root = parse_path(f.subtree);
  o.default_viewport = parse_viewport(f.viewport);
  return o;
}

domcity::Snapshot file_snapshot(std::string html) {
  domcity::Snapshot s;
  s.html = std::move(html);
  s.origin = domcity::SnapshotOrigin::kFile;
  return s;
}

int run_export(const SceneFlags& flags, const std::string& input, const std::string& out_path) {
  std::string html;
  try {
    html = domcity::read_file(input);
  } catch (const domcity::Error& e) {
    std::cerr << "domcity: " << e.what() << '\n';
    return kExitUnreadable;
  }
  const domcity::SessionOptions options = session_options(flags);
  domcity::Session session(options);
  session.handle_snapshot(file_snapshot(std::move(html)));
  if (options.filter.subtree_root && !session.inputs().filter.subtree_root) {
    throw domcity::Error(domcity::ErrorCode::kInvalidFilter,
                         "--subtree " + options.filter.subtree_root->to_string() + " is not in the document");
  }
  const std::string doc = domcity::wire::scene_to_json(*session.scene());
  if (out_path == "-") {
    std::cout << doc;
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << doc;
  out.close();
  if (!out) {
    std::cerr << "domcity: cannot write " << out_path << '\n';
    return kExitUnreadable;
  }
  return kExitOk;
}

int run_serve(const SceneFlags& flags, const std::string& host, int port, const std::string& input,
              const std::string& url, bool watch, bool manual) {
  domcity::Session session(session_options(flags));
  std::unique_ptr<domcity::FileWatcher> watcher;
  try {
    if (!input.empty()) {
      if (watch) {
        watcher = std::make_unique<domcity::FileWatcher>(input, [&session](const std::string& html) {
          if (auto d = session.handle_snapshot(file_snapshot(html))) {
            std::cerr << "revision " << d->target_revision << ": +" << d->added.size() << " -" << d->removed.size()
                      << " ~" << d->changed.size() << '\n';
          }
        });
        session.handle_snapshot(file_snapshot(watcher->initial_content()));
      } else {
        session.handle_snapshot(file_snapshot(domcity::read_file(input)));
      }
    } else if (!url.empty()) {
      domcity::Snapshot s;
      s.html = domcity::fetch_url(url);
      s.origin = domcity::SnapshotOrigin::kUrl;
      session.handle_snapshot(s);
    }
  } catch (const domcity::Error& e) {
    std::cerr << "domcity: " << e.what() << '\n';
    return e.code() == domcity::ErrorCode::kIo ? kExitUnreadable : kExitUsage;
  }
  if (manual) session.set_update_mode(domcity::UpdateMode::kManual);

  domcity::Server server(session, {host, port});
  int bound = 0;
  try {
    bound = server.start();
  } catch (const domcity::Error& e) {
    std::cerr << "domcity: " << e.what() << '\n';
    return kExitUsage;
  }
  std::cerr << "serving on http://" << host << ':' << bound << '\n';
  if (watcher) watcher->start();

  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  if (watcher) watcher->stop();
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DOM city: HTML documents as layered 3D scenes"};
  app.require_subcommand(1);

  SceneFlags serve_flags;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_input, url;
  bool watch = false, manual = false;
  auto* serve = app.add_subcommand("serve", "Run the scene service");
  serve->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Address to bind");
  auto* input_opt = serve->add_option("--input", serve_input, "HTML file to load");
  auto* url_opt = serve->add_option("--url", url, "Fetch HTML from a URL (no scripts, synthetic layout)");
  input_opt->excludes(url_opt);
  serve->add_flag("--watch", watch, "Reload the input file when it changes")->needs(input_opt);
  serve->add_flag("--manual-refresh", manual, "Stage snapshots until POST /refresh");
  add_scene_flags(serve, serve_flags);

  SceneFlags export_flags;
  std::string export_input, out_path;
  auto* exp = app.add_subcommand("export", "Write the scene for an HTML file");
  exp->add_option("--input", export_input, "HTML file")->required();
  exp->add_option("--out", out_path, "Output path, - for stdout")->required();
  add_scene_flags(exp, export_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve) return run_serve(serve_flags, host, port, serve_input, url, watch, manual);
    return run_export(export_flags, export_input, out_path);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const domcity::Error& e) {
    std::cerr << "domcity: " << e.what() << '\n';
    return e.code() == domcity::ErrorCode::kIo ? kExitUnreadable : kExitUsage;
  }
}
