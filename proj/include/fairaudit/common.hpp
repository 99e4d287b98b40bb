#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

/// Input data or configuration could not be used. Maps to CLI exit code 1.
class DataError : public std::runtime_error {
 public:
  enum class Kind {
    MissingColumn,
    ParseError,
    EmptyFile,
    NonBinaryLabel,
    InvalidSchema,
    InvalidConfig,
    DimensionMismatch,
    RangeError,
    Misaligned,
    SplitMismatch,
    Io,
  };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline DataError missing_column(std::string_view name) {
  return {DataError::Kind::MissingColumn, "MissingColumn(\"" + std::string(name) + "\")"};
}

/// Degeneracies are data, not failures: operations collect them here.
using Flags = std::vector<std::string>;

inline void add_flag(Flags& flags, std::string flag) {
  for (const auto& f : flags)
    if (f == flag) return;
  flags.push_back(std::move(flag));
}

// splitmix64 finalizer; used for seed derivation and cheap hashing.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `seed` (per-run splits, validation splits).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over bytes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_indices(std::span<const std::size_t> idx) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto i : idx) h = mix64(h ^ static_cast<std::uint64_t>(i));
  return h;
}

/// Uniform integer in [0, bound) by rejection; portable across standard
/// libraries, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

/// Deterministic random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace fairaudit
