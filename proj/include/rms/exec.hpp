#pragma once

#include <cstddef>

namespace rms {

// Every data-parallel kernel comes in two flavours selected by this tag: a plain
// serial loop and an OpenMP version. Both must produce bit-identical results, so
// floating-point reductions are accumulated over fixed-size blocks in both paths.
enum class Exec { Serial, Parallel };

inline constexpr std::size_t kReduceBlock = 4096;

} // namespace rms
