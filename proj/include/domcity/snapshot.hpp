#pragma once

#include <optional>
#include <string>
#include <vector>

#include "domcity/layout.hpp"

namespace domcity {

enum class SnapshotOrigin { kFile, kUrl, kLivePush };

struct Screenshot {
  std::string png;  // raw PNG bytes
  double page_w = 0;
  double page_h = 0;

  friend bool operator==(const Screenshot&, const Screenshot&) = default;
};

// One captured state of a page.
struct Snapshot {
  std::string html;
  std::optional<std::vector<Measurement>> measurements;
  std::optional<Viewport> viewport;  // required when measurements are present
  std::optional<Screenshot> screenshot;
  SnapshotOrigin origin = SnapshotOrigin::kFile;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Hex SHA-256 of the bytes; used as the screenshot reference.
std::string content_hash(std::string_view bytes);

}  // namespace domcity
