#include "domcity/watcher.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "domcity/error.hpp"

namespace domcity {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return ss.str();
}

FileWatcher::FileWatcher(std::filesystem::path path, Handler on_change, std::chrono::milliseconds interval,
                         Logger warn)
    : path_(std::move(path)), on_change_(std::move(on_change)), interval_(interval), warn_(std::move(warn)) {
  if (!warn_) warn_ = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
  last_ = stamp();
  if (!last_ || std::filesystem::is_directory(path_)) throw Error(ErrorCode::kIo, "cannot read " + path_.string());
  initial_content_ = read_file(path_);
}

FileWatcher::~FileWatcher() { stop(); }

std::optional<FileWatcher::Stamp> FileWatcher::stamp() const {
  std::error_code ec;
  auto mtime = std::filesystem::last_write_time(path_, ec);
  if (ec) return std::nullopt;
  auto size = std::filesystem::file_size(path_, ec);
  if (ec) return std::nullopt;
  return Stamp{mtime, size};
}

bool FileWatcher::poll_once() {
  auto now = stamp();
  if (!now) {
    if (!missing_) warn_(path_.string() + " is gone; keeping the last scene");
    missing_ = true;
    return false;
  }
  if (!missing_ && now == last_) return false;
  missing_ = false;
  last_ = now;
  std::string content;
  try {
    content = read_file(path_);
  } catch (const std::exception& e) {
    warn_(e.what());
    return false;
  }
  try {
    on_change_(content);
  } catch (const std::exception& e) {
    warn_(std::string("update from ") + path_.string() + " failed: " + e.what());
  }
  return true;
}

void FileWatcher::start() {
  if (thread_.joinable()) return;
  {
    std::lock_guard lock(mutex_);
    stopping_ = false;
  }
  thread_ = std::jthread([this] {
    std::unique_lock lock(mutex_);
    while (!cv_.wait_for(lock, interval_, [this] { return stopping_; })) {
      lock.unlock();
      poll_once();
      lock.lock();
    }
  });
}

void FileWatcher::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace domcity
