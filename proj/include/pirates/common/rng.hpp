#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>

#include "pirates/common/bytes.hpp"

namespace pirates {

// ChaCha20 keystream generator. Seed it from the OS for protocol use or from
// a fixed value for reproducible tests. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;
  using Seed = std::array<std::uint8_t, 32>;

  explicit Rng(const Seed& seed);
  explicit Rng(std::uint64_t seed);
  static Rng from_os();

  Rng(Rng&&) noexcept;
  Rng& operator=(Rng&&) noexcept;
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;
  ~Rng();

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

  std::uint64_t next_u64();
  // Uniform in [0, bound). bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform double in [0, 1).
  double unit();
  // Independent child generator; useful for handing a stream to a subsystem.
  Rng fork();

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  void refill();

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pirates
