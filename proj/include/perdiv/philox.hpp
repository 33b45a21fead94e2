#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace perdiv {

__extension__ using uint128_t = unsigned __int128;

// Philox4x64-10 (Salmon et al., Random123).
class Philox4x64 {
 public:
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  explicit Philox4x64(std::uint64_t seed, std::uint64_t key_hi = 0) : key_{seed, key_hi} {}

  Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += 0x9E3779B97F4A7C15ULL;
        k[1] += 0xBB67AE8584CAA73BULL;
      }
      const uint128_t p0 = static_cast<uint128_t>(0xD2E7470EE14C6C93ULL) * ctr[0];
      const uint128_t p1 = static_cast<uint128_t>(0xCA5A826395121157ULL) * ctr[2];
      ctr = {static_cast<std::uint64_t>(p1 >> 64) ^ ctr[1] ^ k[0], static_cast<std::uint64_t>(p1),
             static_cast<std::uint64_t>(p0 >> 64) ^ ctr[3] ^ k[1], static_cast<std::uint64_t>(p0)};
    }
    return ctr;
  }

 private:
  Key key_;
};

// Substream for one path: counter = (draw index, path index, 0, 0). Satisfies
// UniformRandomBitGenerator so Boost distributions can draw from it.
class PathStream {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  PathStream(const Philox4x64& gen, std::uint64_t path) : gen_(&gen), path_(path) {}

  result_type operator()() {
    if (avail_ == 0) refill();
    return buf_[4 - avail_--];
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  void refill() {
    buf_ = (*gen_)({draw_, path_, 0, 0});
    ++draw_;
    avail_ = 4;
  }

  const Philox4x64* gen_;
  std::uint64_t path_;
  std::uint64_t draw_ = 0;
  Philox4x64::Counter buf_{};
  int avail_ = 0;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace perdiv
