#pragma once

#include <limits>

namespace qdist {

using QubitId = int;
using NodeId = int;
using MemoryId = int;
using GateId = int;
using EpId = int;

// All latencies and durations are in microseconds.
using Micros = double;

inline constexpr Micros kInfiniteLatency = std::numeric_limits<Micros>::infinity();

}  // namespace qdist
