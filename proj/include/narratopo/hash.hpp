#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ntp {

// FNV-1a, optionally seeded. Stable across platforms; used for token
// hashing and seed forking, never for artifact identity.
uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xCBF29CE484222325ULL);

// Avalanche finalizer (splitmix64). FNV-1a alone barely diffuses short
// inputs into the high bits; run it through this before taking bits.
uint64_t mix64(uint64_t x);

// Lowercase hex SHA-256. Artifact identity: cache keys, config hashes.
std::string sha256_hex(std::string_view data);

} // namespace ntp
