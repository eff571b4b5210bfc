#pragma once

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

#include <array>
#include <cstdint>
#include <limits>

namespace mdbmlab {

/// Philox4x32-10 counter-based bit generator (Salmon et al., SC'11), exposed
/// as a 64-bit UniformRandomBitGenerator. Output depends only on (key,
/// counter), which is what makes parallel Monte Carlo order-independent.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() = default;
  Philox4x32(Key key, std::uint64_t stream_word) : key_(key) {
    ctr_[2] = static_cast<std::uint32_t>(stream_word);
    ctr_[3] = static_cast<std::uint32_t>(stream_word >> 32);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  /// One Philox4x32-10 block.
  static Counter block(Counter c, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t{M0} * c[0];
      const std::uint64_t p1 = std::uint64_t{M1} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += W0;
      k[1] += W1;
    }
    return c;
  }

 private:
  void refill() {
    const Counter out = block(ctr_, key_);
    buf_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buf_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  Key key_{};
  Counter ctr_{};
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

/// Reproducible noise source owned by a single path. Gaussian draws use the
/// Boost ziggurat on top of the Philox stream, so the sequence is identical
/// across platforms and runs.
class NoiseStream {
 public:
  NoiseStream() = default;
  explicit NoiseStream(Philox4x32 engine) : engine_(engine) {}

  double normal() { return boost::random::normal_distribution<double>()(engine_); }
  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double gamma(double shape);
  /// Chi-distributed variable with `dof` degrees of freedom.
  double chi(double dof);

  template <typename Derived>
  void fill_normal(Eigen::DenseBase<Derived>& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out.derived().coeffRef(i) = normal();
  }

  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
};

/// Stream for (master_seed, stream_id, path_index). Distinct (stream_id,
/// path_index) pairs use disjoint Philox (key, counter) ranges.
NoiseStream derive_noise_stream(std::uint64_t master_seed, std::uint64_t stream_id,
                                std::uint64_t path_index);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mdbmlab
