#include "ncmlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace ncm {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), cached_gauss_(0.0), has_cached_(false) {
  std::uint64_t s = seed;
  for (auto& w : s_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_gauss_;
  }
  // Box-Muller on (0,1] uniforms to keep log() finite.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_gauss_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

Complex Rng::gaussian_complex() {
  const double re = gaussian();
  const double im = gaussian();
  return Complex(re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0);
}

ComplexMatrix random_gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.gaussian_complex();
  return m;
}

ComplexMatrix random_hermitian_matrix(Rng& rng, std::size_t n) {
  ComplexMatrix g = random_gaussian_matrix(rng, n, n);
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
  return m;
}

}  // namespace ncm
