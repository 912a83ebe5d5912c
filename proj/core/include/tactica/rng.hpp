#pragma once

#include <cstdint>
#include <string_view>

namespace tactica {

/// Name of the generator, recorded in run manifests. Runs are reproducible
/// only when replayed with the same generator.
inline constexpr std::string_view kGeneratorName = "splitmix64";

/// Splittable counter-based pseudorandom generator (splitmix64 core).
///
/// Substreams are derived by hashing a (seed, salt) pair, so independent
/// channels (one per player, per probe, per purpose) never share state and
/// can be recreated in any order. Draws within a stream are sequential.
class splitmix64 {
public:
  explicit splitmix64(std::uint64_t seed) : state_(seed) {}

  /// Next raw 64-bit value.
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Independent substream for (this stream's seed, salt).
  splitmix64 split(std::uint64_t salt) const {
    splitmix64 mixer(state_ ^ (0xD1B54A32D192ED03ULL * (salt + 1)));
    return splitmix64(mixer.next_u64());
  }

private:
  std::uint64_t state_;
};

/// Stable 64-bit content hash (FNV-1a) used for scenario and trace hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Formats a hash as it appears in manifests: "fnv1a64:<16 hex digits>".
std::string format_hash(std::uint64_t h);

}  // namespace tactica
