#pragma once

#include <cstdint>

namespace pref {

// Process-wide monotonically increasing stamp for cache invalidation.
std::uint64_t next_revision();

}  // namespace pref
