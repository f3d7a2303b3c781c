#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace jsl {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a, used to turn stream labels into keys.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Key of the stream named `label` under `master_seed`. Different labels give
/// statistically independent streams, so adding a stream never shifts another.
std::uint64_t derive_stream(std::uint64_t master_seed, std::string_view label) noexcept;

/// Counter-based random streams stored by value inside the simulation state.
/// The n-th draw of a stream is a pure function of (key, n).
class RngStreams {
 public:
  /// Uniform in [0, 1).
  double uniform(std::uint64_t key);
  /// Raw 64 random bits.
  std::uint64_t bits(std::uint64_t key);
  std::uint64_t draws(std::uint64_t key) const;

  bool operator==(const RngStreams&) const = default;

 private:
  std::uint64_t& counter(std::uint64_t key);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> counters_;  // sorted by key
};

}  // namespace jsl
