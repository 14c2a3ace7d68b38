#pragma once

// Counter-based random streams.
//
// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC 2011). A stream is identified
// by (seed, stream_id): the 64-bit seed is the key, the 64-bit stream id fills
// counter words 2..3 and the block index fills counter words 0..1. Any stream
// can therefore be reproduced independently of every other one, which is what
// makes replicate loops deterministic under arbitrary scheduling.
//
// Draw layout (fixed, so ports in other languages reproduce samples):
//   block b = philox(key = {lo32(seed), hi32(seed)},
//                    ctr = {lo32(b), hi32(b), lo32(id), hi32(id)}) -> w0..w3
//   uniform 2b   = ((w0 >> 6) * 2^26 + (w1 >> 6) + 0.5) * 2^-52
//   uniform 2b+1 = ((w2 >> 6) * 2^26 + (w3 >> 6) + 0.5) * 2^-52
// Uniforms lie strictly inside (0, 1).
//   normal 2b, 2b+1 = Box-Muller of (uniform 2b, uniform 2b+1):
//     r = sqrt(-2 log u0), normals r cos(2 pi u1), r sin(2 pi u1)
// A stream hands out either uniforms or normals; mixing them on one stream is
// allowed but consumes a fresh block for the first normal after a uniform.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace mixclt {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept {
    return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
  }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of Philox blocks consumed so far.
  std::uint64_t blocks_used() const noexcept { return block_; }

  PhiloxCounter next_block() noexcept {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(stream_id_),
                            static_cast<std::uint32_t>(stream_id_ >> 32)};
    ++block_;
    return philox4x32_10(ctr, key_);
  }

  double next_uniform() noexcept {
    if (uniform_pending_) {
      uniform_pending_ = false;
      return pending_uniform_;
    }
    const PhiloxCounter w = next_block();
    normal_pending_ = false;
    uniform_pending_ = true;
    pending_uniform_ = to_unit(w[2], w[3]);
    return to_unit(w[0], w[1]);
  }

  double next_normal() noexcept {
    if (normal_pending_) {
      normal_pending_ = false;
      return pending_normal_;
    }
    const PhiloxCounter w = next_block();
    uniform_pending_ = false;
    const double u0 = to_unit(w[0], w[1]);
    const double u1 = to_unit(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u0));
    const double angle = 2.0 * std::numbers::pi * u1;
    normal_pending_ = true;
    pending_normal_ = r * std::sin(angle);
    return r * std::cos(angle);
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi >> 6) << 26) | (lo >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

 private:
  PhiloxKey key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  bool uniform_pending_ = false;
  bool normal_pending_ = false;
  double pending_uniform_ = 0.0;
  double pending_normal_ = 0.0;
};

/// Mixes several 64-bit words into one stream id (splitmix64 finalizer chain).
/// Used where a stream is keyed by more than a single index.
inline std::uint64_t mix_stream_id(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (std::uint64_t w : words) {
    h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    h = z ^ (z >> 31);
  }
  return h;
}

}  // namespace mixclt
