#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

namespace aee {

inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Unseeded 64-bit digest of a flow id. Row, set and fingerprint hashes are
/// all derived from it with seeded_hash.
inline std::uint64_t key_digest(std::string_view key) noexcept {
    return std::hash<std::string_view>{}(key);
}

/// Seeded 64-bit hash. Distinct seeds stand in for independent hash functions.
inline std::uint64_t seeded_hash(std::uint64_t digest, std::uint64_t seed) noexcept {
    return mix64(digest ^ (seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t seeded_hash(std::string_view key, std::uint64_t seed) noexcept {
    return seeded_hash(key_digest(key), seed);
}

} // namespace aee
