#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include <unistd.h>

#include "domcity/session.hpp"
#include "domcity/watcher.hpp"
#include "printers.hpp"

using namespace domcity;
namespace fs = std::filesystem;

namespace {

class WatcherTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("domcity_watch_" + std::to_string(getpid()) + "_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    file_ = dir_ / "page.html";
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Writes content and pushes the mtime forward so the change is visible
  // even within the filesystem's timestamp granularity.
  void write(const std::string& content) {
    std::ofstream(file_, std::ios::binary) << content;
    fs::last_write_time(file_, fs::file_time_type::clock::now() + std::chrono::seconds(++bumps_));
  }

  fs::path dir_;
  fs::path file_;
  int bumps_ = 0;
};

}  // namespace

TEST_F(WatcherTest, UnreadableAtStartupThrows) {
  try {
    FileWatcher w(dir_ / "absent.html", [](const std::string&) {});
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_THROW(FileWatcher(dir_, [](const std::string&) {}), Error);
}

TEST_F(WatcherTest, ReadsInitialContent) {
  write("<p>a</p>");
  FileWatcher w(file_, [](const std::string&) {});
  EXPECT_EQ(w.initial_content(), "<p>a</p>");
}

TEST_F(WatcherTest, UnchangedFileIsNotFed) {
  write("<p>a</p>");
  int calls = 0;
  FileWatcher w(file_, [&](const std::string&) { ++calls; });
  EXPECT_FALSE(w.poll_once());
  EXPECT_EQ(calls, 0);
}

TEST_F(WatcherTest, ChangesDriveTheSession) {
  write("<p>a</p>");
  Session s;
  FileWatcher w(file_, [&](const std::string& html) { s.handle_snapshot(Snapshot{html}); });
  s.handle_snapshot(Snapshot{w.initial_content()});
  EXPECT_EQ(s.scene()->revision, 1u);

  write("<p>a</p><p>b</p>");
  EXPECT_TRUE(w.poll_once());
  EXPECT_EQ(s.scene()->revision, 2u);
  EXPECT_EQ(s.scene()->boxes.size(), 5u);

  // Touched but identical content: a new revision with nothing changed.
  std::vector<SceneDiff> seen;
  s.subscribe([&](const SceneDiff& d) { seen.push_back(d); });
  write("<p>a</p><p>b</p>");
  EXPECT_TRUE(w.poll_once());
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_TRUE(seen[0].empty());
  EXPECT_EQ(seen[0].target_revision, 3u);
}

TEST_F(WatcherTest, DeletionWarnsOnceAndRecovers) {
  write("<p>a</p>");
  std::vector<std::string> warnings;
  std::vector<std::string> fed;
  FileWatcher w(
      file_, [&](const std::string& c) { fed.push_back(c); }, FileWatcher::kDefaultInterval,
      [&](const std::string& m) { warnings.push_back(m); });
  fs::remove(file_);
  EXPECT_FALSE(w.poll_once());
  EXPECT_FALSE(w.poll_once());
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(fed.empty());
  write("<p>back</p>");
  EXPECT_TRUE(w.poll_once());
  EXPECT_EQ(fed, std::vector<std::string>{"<p>back</p>"});
}

TEST_F(WatcherTest, HandlerFailureBecomesWarning) {
  write("<p>a</p>");
  std::vector<std::string> warnings;
  FileWatcher w(
      file_, [](const std::string&) { throw Error(ErrorCode::kSchema, "nope"); }, FileWatcher::kDefaultInterval,
      [&](const std::string& m) { warnings.push_back(m); });
  write("<p>b</p>");
  EXPECT_TRUE(w.poll_once());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("nope"), std::string::npos);
}

TEST_F(WatcherTest, BackgroundThreadPicksUpChanges) {
  write("<p>a</p>");
  std::atomic<int> calls{0};
  FileWatcher w(file_, [&](const std::string&) { ++calls; }, std::chrono::milliseconds(10));
  w.start();
  write("<p>b</p>");
  for (int i = 0; i < 300 && calls == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  w.stop();
  EXPECT_EQ(calls, 1);
}
