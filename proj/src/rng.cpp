#include "jobshoplab/rng.hpp"

#include <algorithm>

namespace jsl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_stream(std::uint64_t master_seed, std::string_view label) noexcept {
  return splitmix64(splitmix64(master_seed) ^ hash_label(label));
}

std::uint64_t& RngStreams::counter(std::uint64_t key) {
  auto it = std::lower_bound(counters_.begin(), counters_.end(), key,
                             [](const auto& p, std::uint64_t k) { return p.first < k; });
  if (it == counters_.end() || it->first != key) it = counters_.insert(it, {key, 0});
  return it->second;
}

std::uint64_t RngStreams::bits(std::uint64_t key) {
  auto& n = counter(key);
  const std::uint64_t out = splitmix64(key ^ splitmix64(n));
  ++n;
  return out;
}

double RngStreams::uniform(std::uint64_t key) { return static_cast<double>(bits(key) >> 11) * 0x1.0p-53; }

std::uint64_t RngStreams::draws(std::uint64_t key) const {
  auto it = std::lower_bound(counters_.begin(), counters_.end(), key,
                             [](const auto& p, std::uint64_t k) { return p.first < k; });
  return it != counters_.end() && it->first == key ? it->second : 0;
}

}  // namespace jsl
