#pragma once

#include <ostream>

#include "domcity/wire.hpp"

// Readable gtest output for the types tests compare most.
namespace domcity {

inline void PrintTo(const NodePath& p, std::ostream* os) { *os << p.to_string(); }
inline void PrintTo(const Scene& s, std::ostream* os) { *os << '\n' << wire::scene_to_json(s); }
inline void PrintTo(const SceneDiff& d, std::ostream* os) { *os << '\n' << wire::diff_to_json(d); }

}  // namespace domcity
