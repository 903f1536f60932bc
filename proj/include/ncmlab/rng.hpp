// Deterministic random numbers: xoshiro256++ seeded through splitmix64.
// std::normal_distribution is implementation-defined, so the Gaussian sampler
// (Box-Muller) is spelled out here; identical seeds give identical streams on
// every platform.
#pragma once

#include <array>
#include <cstdint>

#include "ncmlab/complex_matrix.hpp"

namespace ncm {

std::uint64_t splitmix64(std::uint64_t& state);
// Stable child seed for (seed, tag); used to split one run seed across grid
// cells and restarts without correlating the streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // standard normal
  Complex gaussian_complex();  // E|z|^2 = 1

  Rng split(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_;
  double cached_gauss_;
  bool has_cached_;
};

ComplexMatrix random_gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols);
ComplexMatrix random_hermitian_matrix(Rng& rng, std::size_t n);

}  // namespace ncm
