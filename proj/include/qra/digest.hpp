#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qra {

/// FNV-1a 64-bit content hash; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace qra
