#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace domcity {

// Polls a file and hands its content to `on_change` whenever its size or
// modification time changes. A deleted file produces one warning and is
// picked up again if it reappears.
class FileWatcher {
 public:
  using Handler = std::function<void(const std::string& content)>;
  using Logger = std::function<void(const std::string& message)>;

  static constexpr std::chrono::milliseconds kDefaultInterval{500};

  // Throws Error(kIo) if the file cannot be read now.
  FileWatcher(std::filesystem::path path, Handler on_change,
              std::chrono::milliseconds interval = kDefaultInterval, Logger warn = {});
  ~FileWatcher();

  FileWatcher(const FileWatcher&) = delete;
  FileWatcher& operator=(const FileWatcher&) = delete;

  void start();
  void stop();

  // One poll step. Returns true if on_change was called.
  bool poll_once();

  const std::string& initial_content() const { return initial_content_; }

 private:
  struct Stamp {
    std::filesystem::file_time_type mtime;
    std::uintmax_t size = 0;
    friend bool operator==(const Stamp&, const Stamp&) = default;
  };

  std::optional<Stamp> stamp() const;

  std::filesystem::path path_;
  Handler on_change_;
  std::chrono::milliseconds interval_;
  Logger warn_;
  std::string initial_content_;
  std::optional<Stamp> last_;
  bool missing_ = false;

  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::jthread thread_;
};

// Reads a whole file; throws Error(kIo) when it cannot.
std::string read_file(const std::filesystem::path& path);

}  // namespace domcity
