#pragma once

#include <cstdint>
#include <string_view>

namespace neosleep {

/// SplitMix64 finalizer; used as the mixing core of seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed from a master seed and a stage label. The derivation
/// is a fixed function of (master, label), so adding stages never perturbs
/// the randomness of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::string_view label) {
  // FNV-1a over the label, folded into the master via splitmix.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(master ^ h);
}

/// Indexed variant for per-record / per-fold / per-candidate streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::string_view label,
                                    std::uint64_t index) {
  return splitmix64(derive_seed(master, label) ^
                    (index * 0xd1342543de82ef95ULL + 1));
}

} // namespace neosleep
