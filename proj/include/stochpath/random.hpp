#pragma once

// Deterministic random-number foundation.
//
// Generator: xoshiro256** (Blackman & Vigna). Each stream is keyed by
// (seed, stream_index, lane); the key is folded through the splitmix64
// finalizer and then expanded into the 256-bit xoshiro state with the
// splitmix64 sequence. Streams never share state, so path i of a run
// produces the same variates no matter which thread generates it.
//
// Normal variates: Marsaglia polar method on 53-bit uniforms, caching the
// second variate of each accepted pair. Changing either of these rules
// changes every regression number in the test suite.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "stochpath/errors.hpp"

namespace stochpath {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Advances a splitmix64 counter and returns the next output.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += kGoldenGamma;
  return mix64(state);
}

// Substream key for (seed, stream_index, lane). Each component is offset by a
// distinct odd constant before mixing so that swapping components does not
// collide.
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream_index,
                                      std::uint64_t lane) noexcept {
  std::uint64_t k = mix64(seed + 0x6A09E667F3BCC909ULL);
  k = mix64(k ^ (stream_index * kGoldenGamma + 0xBB67AE8584CAA73BULL));
  k = mix64(k ^ (lane * 0xD1B54A32D192ED03ULL + 0x3C6EF372FE94F82BULL));
  return k;
}

template <class S>
concept NormalSource = requires(S& s) {
  { s.next_standard_normal() } -> std::convertible_to<double>;
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_index, std::uint64_t lane = 0) noexcept
      : seed_(seed), stream_index_(stream_index), lane_(lane) {
    std::uint64_t sm = substream_key(seed, stream_index, lane);
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }
  std::uint64_t lane() const noexcept { return lane_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_standard_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::uint64_t lane_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double next_standard_normal(RandomStream& stream) noexcept {
  return stream.next_standard_normal();
}

// Replays a fixed list of variates; lets tests force draws such as z = 0.
class ReplayNormals {
 public:
  explicit ReplayNormals(std::vector<double> values) : values_(std::move(values)) {}

  double next_standard_normal() {
    if (next_ >= values_.size()) throw DomainError("replay source exhausted");
    return values_[next_++];
  }

  std::size_t consumed() const noexcept { return next_; }

 private:
  std::vector<double> values_;
  std::size_t next_ = 0;
};

// Returns the same value forever.
struct ConstantNormals {
  double value = 0.0;
  double next_standard_normal() const noexcept { return value; }
};

// Records every variate drawn from an underlying source.
template <NormalSource Source>
class RecordingNormals {
 public:
  explicit RecordingNormals(Source& inner) : inner_(&inner) {}

  double next_standard_normal() {
    const double z = inner_->next_standard_normal();
    drawn_.push_back(z);
    return z;
  }

  const std::vector<double>& drawn() const noexcept { return drawn_; }

 private:
  Source* inner_;
  std::vector<double> drawn_;
};

struct CorrelatedPair {
  double z1 = 0.0;
  double z2 = 0.0;
};

// z1 = g1, z2 = rho*g1 + sqrt(1 - rho^2)*g2. rho = +-1 is allowed and exact.
inline CorrelatedPair correlated_pair(double rho, double g1, double g2) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    std::ostringstream msg;
    msg << "correlation must lie in [-1, 1], got " << rho;
    throw DomainError(msg.str());
  }
  return {g1, rho * g1 + std::sqrt(1.0 - rho * rho) * g2};
}

// sqrt(dt) * z, the Brownian increment over a step of length dt.
inline double wiener_increment(double dt, double z) {
  if (!(dt > 0.0)) {
    std::ostringstream msg;
    msg << "time step must be positive, got " << dt;
    throw DomainError(msg.str());
  }
  return std::sqrt(dt) * z;
}

}  // namespace stochpath
