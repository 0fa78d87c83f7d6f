#pragma once

#include <cstdint>

namespace hetplace {

using NodeId = std::int32_t;
using DeviceId = std::int32_t;
using Bytes = std::uint64_t;
using Seconds = double;

// Absolute tolerance on constraint satisfaction and integrality.
inline constexpr double kTolerance = 1e-6;

}  // namespace hetplace
