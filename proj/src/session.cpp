#include "domcity/session.hpp"

#include <algorithm>

namespace domcity {
namespace {

Scene empty_scene(const StyleConfig& style) {
  Scene s;
  s.style = style;
  return s;
}

// A subtree root from an earlier page may not exist in the new one.
FilterSpec adapt_filter(FilterSpec filter, const DomTree& tree) {
  if (filter.subtree_root && !try_resolve_path(tree, *filter.subtree_root)) filter.subtree_root.reset();
  return filter;
}

}  // namespace

Session::Session(SessionOptions options)
    : default_viewport_(options.default_viewport), mode_(options.update_mode) {
  validate(options.style);
  validate(options.filter);
  validate(default_viewport_);
  inputs_.filter = std::move(options.filter);
  inputs_.style = options.style;
  scene_ = std::make_shared<const Scene>(empty_scene(inputs_.style));
}

Session::Page Session::prepare(const Snapshot& snapshot) const {
  if (snapshot.measurements && !snapshot.viewport) {
    throw Error(ErrorCode::kMalformedMeasurement, "malformed measurement: measurements require a viewport");
  }
  Page page;
  auto tree = std::make_shared<const DomTree>(parse_html(snapshot.html));
  if (snapshot.measurements) {
    page.geometry = std::make_shared<const GeometryMap>(ingest_geometry(*tree, *snapshot.measurements, *snapshot.viewport));
  } else {
    page.geometry = std::make_shared<const GeometryMap>(synthetic_layout(*tree, snapshot.viewport.value_or(default_viewport_)));
  }
  page.tree = std::move(tree);
  if (snapshot.screenshot) {
    const Screenshot& shot = *snapshot.screenshot;
    if (!(shot.page_w > 0 && shot.page_h > 0)) {
      throw Error(ErrorCode::kDegenerateTexture, "degenerate texture region: screenshot page size must be positive");
    }
    page.texture = TextureSource{content_hash(shot.png), shot.page_w, shot.page_h};
    page.png = shot.png;
  }
  return page;
}

SceneDiff Session::publish(const SessionInputs& next, const std::optional<std::string>& png) {
  std::shared_ptr<const Scene> current = scene();
  Scene built = next.tree ? build_scene(*next.tree, *next.geometry, next.filter, next.style, next.texture,
                                        current->revision + 1)
                          : empty_scene(next.style);
  built.revision = current->revision + 1;
  SceneDiff diff = diff_scenes(*current, built);
  {
    std::lock_guard lock(state_mutex_);
    inputs_ = next;
    scene_ = std::make_shared<const Scene>(std::move(built));
    if (png && next.texture) {
      const std::string& hash = next.texture->ref;
      auto it = std::find_if(screenshots_.begin(), screenshots_.end(), [&](const auto& e) { return e.first == hash; });
      if (it != screenshots_.end()) screenshots_.erase(it);
      screenshots_.emplace_back(hash, *png);
      while (screenshots_.size() > kScreenshotsKept) screenshots_.pop_front();
    }
  }
  std::lock_guard lock(subscriber_mutex_);
  for (auto& [token, subscriber] : subscribers_) subscriber(diff);
  return diff;
}

SceneDiff Session::noop_diff() const {
  std::shared_ptr<const Scene> current = scene();
  SceneDiff d;
  d.base_revision = d.target_revision = current->revision;
  d.style = current->style;
  d.visible_count = current->visible_count;
  d.max_depth = current->max_depth;
  d.screenshot_ref = current->screenshot_ref;
  return d;
}

std::optional<SceneDiff> Session::handle_snapshot(const Snapshot& snapshot) {
  std::lock_guard write(write_mutex_);
  Page page = prepare(snapshot);
  if (update_mode() == UpdateMode::kManual) {
    std::lock_guard lock(state_mutex_);
    staged_ = std::move(page);
    return std::nullopt;
  }
  SessionInputs next = inputs();
  next.filter = adapt_filter(next.filter, *page.tree);
  next.tree = page.tree;
  next.geometry = page.geometry;
  next.texture = page.texture;
  return publish(next, page.png);
}

SceneDiff Session::refresh() {
  std::lock_guard write(write_mutex_);
  std::optional<Page> page;
  {
    std::lock_guard lock(state_mutex_);
    page.swap(staged_);
  }
  if (!page) return noop_diff();
  SessionInputs next = inputs();
  next.filter = adapt_filter(next.filter, *page->tree);
  next.tree = page->tree;
  next.geometry = page->geometry;
  next.texture = page->texture;
  return publish(next, page->png);
}

SceneDiff Session::set_filter(const FilterSpec& filter) {
  std::lock_guard write(write_mutex_);
  SessionInputs next = inputs();
  validate(filter, next.tree.get());
  if (filter == next.filter) return noop_diff();
  next.filter = filter;
  return publish(next, std::nullopt);
}

SceneDiff Session::set_style(const StyleConfig& style) {
  std::lock_guard write(write_mutex_);
  validate(style);
  SessionInputs next = inputs();
  if (style == next.style) return noop_diff();
  next.style = style;
  return publish(next, std::nullopt);
}

void Session::set_update_mode(UpdateMode mode) {
  std::lock_guard lock(state_mutex_);
  mode_ = mode;
}

std::shared_ptr<const Scene> Session::scene() const {
  std::lock_guard lock(state_mutex_);
  return scene_;
}

SessionInputs Session::inputs() const {
  std::lock_guard lock(state_mutex_);
  return inputs_;
}

UpdateMode Session::update_mode() const {
  std::lock_guard lock(state_mutex_);
  return mode_;
}

bool Session::has_staged() const {
  std::lock_guard lock(state_mutex_);
  return staged_.has_value();
}

std::optional<std::string> Session::screenshot(const std::string& hash) const {
  std::lock_guard lock(state_mutex_);
  for (const auto& [h, png] : screenshots_) {
    if (h == hash) return png;
  }
  return std::nullopt;
}

int Session::subscribe(Subscriber subscriber) {
  std::lock_guard lock(subscriber_mutex_);
  subscribers_.emplace(next_token_, std::move(subscriber));
  return next_token_++;
}

void Session::unsubscribe(int token) {
  std::lock_guard lock(subscriber_mutex_);
  subscribers_.erase(token);
}

}  // namespace domcity
