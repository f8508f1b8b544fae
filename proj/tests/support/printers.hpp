#pragma once

// Readable GoogleTest failure output for library types.

#include <ostream>

#include "patternmine/json_io.hpp"
#include "patternmine/miner.hpp"

namespace patternmine {

inline void PrintTo(const MinedExample& ex, std::ostream* os) { *os << nlohmann::json(ex).dump(); }
inline void PrintTo(const ExampleRef& ref, std::ostream* os) { *os << nlohmann::json(ref).dump(); }

}  // namespace patternmine
