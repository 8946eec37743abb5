#pragma once

#include <cstddef>
#include <cstdint>

namespace gridcurio {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a, chainable through `h`.
inline std::uint64_t fnv1a64(const std::uint8_t* bytes, std::size_t n, std::uint64_t h = kFnvOffset) {
  for (std::size_t i = 0; i < n; ++i) h = (h ^ bytes[i]) * 0x100000001b3ULL;
  return h;
}

inline std::uint64_t fnv1a64_u32(std::uint32_t v, std::uint64_t h) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  return fnv1a64(b, 4, h);
}

}  // namespace gridcurio
