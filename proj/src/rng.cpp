#include "mdbmlab/rng.hpp"

#include <boost/random/gamma_distribution.hpp>

#include <cmath>

namespace mdbmlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double NoiseStream::gamma(double shape) {
  boost::random::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double NoiseStream::chi(double dof) { return std::sqrt(2.0 * gamma(0.5 * dof)); }

NoiseStream derive_noise_stream(std::uint64_t master_seed, std::uint64_t stream_id,
                                std::uint64_t path_index) {
  const std::uint64_t k = splitmix64(master_seed ^ splitmix64(stream_id));
  const Philox4x32::Key key{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return NoiseStream(Philox4x32(key, path_index));
}

}  // namespace mdbmlab
