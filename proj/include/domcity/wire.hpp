#pragma once

// JSON documents exchanged with viewers and written by `domcity export`.
//
// Output is canonical: fixed key order, integers printed as integers, every
// other number printed with "%.6g". Parsing a document and writing it again
// reproduces it byte for byte. Parse failures throw Error(kSchema).

#include <string>
#include <string_view>

#include "domcity/query.hpp"
#include "domcity/scene.hpp"
#include "domcity/snapshot.hpp"

namespace domcity::wire {

std::string format_number(double value);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(std::string_view text);

std::string diff_to_json(const SceneDiff& diff);
SceneDiff diff_from_json(std::string_view text);

std::string filter_to_json(const FilterSpec& filter);
FilterSpec filter_from_json(std::string_view text);

std::string style_to_json(const StyleConfig& style);
StyleConfig style_from_json(std::string_view text);

std::string snapshot_to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(std::string_view text);

const char* to_string(ColorMode mode);
const char* to_string(TextureMode mode);
const char* to_string(SnapshotOrigin origin);
ColorMode parse_color_mode(std::string_view text);
TextureMode parse_texture_mode(std::string_view text);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace domcity::wire
