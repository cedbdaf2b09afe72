#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "domcity/scene.hpp"
#include "domcity/snapshot.hpp"

namespace domcity {

enum class UpdateMode { kContinuous, kManual };

struct SessionOptions {
  StyleConfig style;
  FilterSpec filter;
  UpdateMode update_mode = UpdateMode::kContinuous;
  Viewport default_viewport;  // used for synthetic layout when a snapshot has none
};

// Everything the current scene is derived from.
struct SessionInputs {
  std::shared_ptr<const DomTree> tree;  // null before the first snapshot
  std::shared_ptr<const GeometryMap> geometry;
  std::optional<TextureSource> texture;
  FilterSpec filter;
  StyleConfig style;
};

// Holds the current page and publishes revisioned scenes.
//
// Mutating calls are serialized; readers (scene(), inputs()) may run on any
// thread and always see a fully published state. Subscribers are invoked in
// publication order on the mutating thread and must not call mutating
// methods themselves.
class Session {
 public:
  using Subscriber = std::function<void(const SceneDiff&)>;

  explicit Session(SessionOptions options = {});

  // Returns the published diff, or nullopt when the snapshot was staged
  // (manual mode). Throws on malformed input; the state is left untouched.
  std::optional<SceneDiff> handle_snapshot(const Snapshot& snapshot);

  // Publishes the staged snapshot. Without one, returns an empty diff whose
  // base and target are the current revision.
  SceneDiff refresh();

  SceneDiff set_filter(const FilterSpec& filter);
  SceneDiff set_style(const StyleConfig& style);
  void set_update_mode(UpdateMode mode);

  std::shared_ptr<const Scene> scene() const;
  SessionInputs inputs() const;
  UpdateMode update_mode() const;
  bool has_staged() const;

  // PNG bytes of a recently published screenshot.
  std::optional<std::string> screenshot(const std::string& hash) const;

  int subscribe(Subscriber subscriber);
  void unsubscribe(int token);

  static constexpr std::size_t kScreenshotsKept = 8;

 private:
  struct Page {
    std::shared_ptr<const DomTree> tree;
    std::shared_ptr<const GeometryMap> geometry;
    std::optional<TextureSource> texture;
    std::optional<std::string> png;
  };

  Page prepare(const Snapshot& snapshot) const;
  SceneDiff publish(const SessionInputs& next, const std::optional<std::string>& png);
  SceneDiff noop_diff() const;

  Viewport default_viewport_;

  std::mutex write_mutex_;  // serializes mutations and subscriber calls
  mutable std::mutex state_mutex_;
  SessionInputs inputs_;
  std::shared_ptr<const Scene> scene_;
  UpdateMode mode_;
  std::optional<Page> staged_;
  std::deque<std::pair<std::string, std::string>> screenshots_;  // (hash, png), newest last

  std::mutex subscriber_mutex_;
  std::map<int, Subscriber> subscribers_;
  int next_token_ = 0;
};

}  // namespace domcity
