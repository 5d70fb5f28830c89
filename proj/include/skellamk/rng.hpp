#pragma once

// Random streams and the exact variate generators used by the simulators.
//
// Every sampler takes its generator explicitly. Streams for Monte Carlo
// replicates are derived from (seed, replicate index) so results do not depend
// on how replicates are spread over worker threads.

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "skellamk/errors.hpp"

namespace skellamk {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// xoshiro256** engine; satisfies std::uniform_random_bit_generator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  /// Independent stream keyed by (seed, replicate).
  static Stream for_replicate(std::uint64_t seed, std::uint64_t replicate) {
    std::uint64_t key = seed;
    const std::uint64_t a = detail::splitmix64(key);
    std::uint64_t ctr = replicate ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t b = detail::splitmix64(ctr);
    return Stream(a ^ detail::rotl(b, 17) ^ (replicate * 0x9E3779B97F4A7C15ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  friend bool operator==(const Stream&, const Stream&) = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Generators producing the full 64-bit range.
template <class G>
concept BitGenerator64 = std::uniform_random_bit_generator<G> &&
                         G::min() == 0 && G::max() == std::numeric_limits<std::uint64_t>::max();

/// Uniform on the open interval (0, 1).
template <BitGenerator64 G>
double uniform_open(G& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform on [0, 1).
template <BitGenerator64 G>
double uniform_closed_open(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform on {1, ..., k} from a single draw.
template <BitGenerator64 G>
int uniform_jump(G& g, int k) {
  const int j = 1 + static_cast<int>(uniform_closed_open(g) * k);
  return j > k ? k : j;
}

template <BitGenerator64 G>
double exponential(G& g, double rate) {
  return -std::log(uniform_open(g)) / rate;
}

/// Standard normal via Box-Muller (one value per call).
template <BitGenerator64 G>
double standard_normal(G& g) {
  const double u = uniform_open(g);
  const double v = uniform_open(g);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

/// Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 uses the power boost.
template <BitGenerator64 G>
double gamma_variate(G& g, double shape, double rate) {
  if (shape < 1.0) {
    const double x = gamma_variate(g, shape + 1.0, 1.0);
    return x * std::pow(uniform_open(g), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open(g);
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

/// Poisson(mean). Inversion below 10, Hormann's PTRS rejection above; means
/// beyond 2^52 (where integers stop being exact doubles) use the normal limit.
template <BitGenerator64 G>
std::int64_t poisson(G& g, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson: mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double u = uniform_open(g);
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  if (mean > 0x1.0p52) {
    const double x = std::round(mean + std::sqrt(mean) * standard_normal(g));
    if (x >= 9.0e18) throw OverflowError("poisson: count exceeds the int64 range");
    return x < 0 ? 0 : static_cast<std::int64_t>(x);
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform_closed_open(g) - 0.5;
    const double v = uniform_open(g);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - boost::math::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

/// Inverse Gaussian with mean m and shape s (Michael-Schucany-Haas).
template <BitGenerator64 G>
double inverse_gaussian(G& g, double m, double s) {
  const double z = standard_normal(g);
  const double y = z * z;
  const double my = m * y;
  // m - m/(2s) (sqrt(4 m s y + m^2 y^2) - m y), rearranged to avoid cancellation.
  const double x = m - 2.0 * m * my / (std::sqrt(4.0 * m * s * y + my * my) + my);
  if (uniform_open(g) * (m + x) <= m) return x;
  return m * m / x;
}

/// Positive alpha-stable variable with Laplace transform exp(-s^alpha)
/// (Kanter's two-uniform representation).
template <BitGenerator64 G>
double stable_unit(G& g, double alpha) {
  for (;;) {
    const double u = uniform_open(g);
    const double v = uniform_open(g);
    const double pu = std::numbers::pi * u;
    const double num =
        std::sin(alpha * pu) * std::pow(std::sin((1.0 - alpha) * pu), 1.0 / alpha - 1.0);
    const double den =
        std::pow(std::sin(pu), 1.0 / alpha) * std::pow(-std::log(v), 1.0 / alpha - 1.0);
    const double x = num / den;
    // Draws that leave the double range are redrawn; their probability is
    // far below anything a simulation can resolve.
    if (std::isfinite(x) && x > 0.0) return x;
  }
}

}  // namespace skellamk
