#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace defsim {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// 64-bit FNV-1a over the raw bytes of `data`, continuing from `seed`.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = kFnvOffsetBasis) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

/// Lowercase, zero-padded, 16 hex digits.
std::string to_hex(std::uint64_t value);

inline std::string content_hash(std::string_view data) {
  return to_hex(fnv1a64(data));
}

}  // namespace defsim
