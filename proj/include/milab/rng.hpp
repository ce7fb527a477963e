#pragma once

#include <array>
#include <cstdint>

namespace milab {

// Counter-based random stream (Philox 4x32, 10 rounds).
//
// A stream is identified by (seed, stream_id): the seed keys the generator
// and the stream id fills the high half of the 128-bit counter, so streams
// with distinct ids never overlap and advancing one stream cannot perturb
// another. The same (seed, stream_id) therefore yields a bit-identical
// sequence on any thread and for any number of workers.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept {
    if (word_ == 4) {
      block_ = philox_block(block_index_++);
      word_ = 0;
    }
    const std::uint64_t lo = block_[word_];
    const std::uint64_t hi = block_[word_ + 1];
    word_ += 2;
    return lo | (hi << 32);
  }

  // uniform on [0, 1), 53-bit resolution
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on the open interval (0, 1); safe input for log() or an
  // inverse CDF
  double uniform_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // uniform integer on [0, n); n > 0
  std::uint64_t uniform_below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // one 128-bit Philox block; exposed for the known-answer tests
  std::array<std::uint32_t, 4> philox_block(std::uint64_t block) const noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::uint32_t c0 = static_cast<std::uint32_t>(block);
    std::uint32_t c1 = static_cast<std::uint32_t>(block >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_id_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_id_ >> 32);
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];

    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
      const std::uint32_t t0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t t1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t t2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      const std::uint32_t t3 = static_cast<std::uint32_t>(p0);
      c0 = t0;
      c1 = t1;
      c2 = t2;
      c3 = t3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
  }

private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t seed_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int word_ = 4;
};

inline RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

// splitmix64 finalizer; used to derive sub-seeds from configuration fields
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

} // namespace milab
