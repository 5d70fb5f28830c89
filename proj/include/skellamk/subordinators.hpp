#pragma once

// Driftless Levy subordinators: gamma, tempered stable, inverse Gaussian and
// stable. Each family is described by its Bernstein (Laplace) exponent f with
// E[exp(-s D(t))] = exp(-t f(s)).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "skellamk/errors.hpp"
#include "skellamk/rng.hpp"
#include "skellamk/specfun.hpp"

namespace skellamk {

struct GammaSubordinator {
  double p = 1.0;      // shape per unit time
  double alpha = 1.0;  // rate
  friend bool operator==(const GammaSubordinator&, const GammaSubordinator&) = default;
};

struct TemperedStableSubordinator {
  double alpha = 0.5;
  double mu = 1.0;
  friend bool operator==(const TemperedStableSubordinator&,
                         const TemperedStableSubordinator&) = default;
};

struct InverseGaussianSubordinator {
  double gamma = 1.0;
  double delta = 1.0;
  friend bool operator==(const InverseGaussianSubordinator&,
                         const InverseGaussianSubordinator&) = default;
};

struct StableSubordinator {
  double alpha = 0.5;
  friend bool operator==(const StableSubordinator&, const StableSubordinator&) = default;
};

using SubordinatorSpec = std::variant<GammaSubordinator, TemperedStableSubordinator,
                                      InverseGaussianSubordinator, StableSubordinator>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::string family_name(const SubordinatorSpec& spec) {
  return std::visit(Overloaded{[](const GammaSubordinator&) { return std::string("gamma"); },
                               [](const TemperedStableSubordinator&) {
                                 return std::string("tempered_stable");
                               },
                               [](const InverseGaussianSubordinator&) {
                                 return std::string("inverse_gaussian");
                               },
                               [](const StableSubordinator&) { return std::string("stable"); }},
                    spec);
}

inline void validate(const SubordinatorSpec& spec) {
  auto fail = [](const std::string& what) { throw DomainError("subordinator: " + what); };
  std::visit(Overloaded{[&](const GammaSubordinator& s) {
                          if (!(s.p > 0.0) || !(s.alpha > 0.0)) fail("gamma needs p > 0, alpha > 0");
                        },
                        [&](const TemperedStableSubordinator& s) {
                          if (!(s.alpha > 0.0 && s.alpha < 1.0) || !(s.mu > 0.0)) {
                            fail("tempered stable needs 0 < alpha < 1, mu > 0");
                          }
                        },
                        [&](const InverseGaussianSubordinator& s) {
                          if (!(s.gamma > 0.0) || !(s.delta > 0.0)) {
                            fail("inverse Gaussian needs gamma > 0, delta > 0");
                          }
                        },
                        [&](const StableSubordinator& s) {
                          if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("stable needs 0 < alpha < 1");
                        }},
             spec);
}

namespace detail {

/// f(s) on the largest real interval where the Laplace transform is finite
/// (s may be negative); nullopt outside it.
inline std::optional<double> laplace_exponent_extended(const SubordinatorSpec& spec, double s) {
  return std::visit(
      Overloaded{[&](const GammaSubordinator& g) -> std::optional<double> {
                   if (s <= -g.alpha) return std::nullopt;
                   return g.p * std::log1p(s / g.alpha);
                 },
                 [&](const TemperedStableSubordinator& g) -> std::optional<double> {
                   if (s < -g.mu) return std::nullopt;
                   return std::pow(s + g.mu, g.alpha) - std::pow(g.mu, g.alpha);
                 },
                 [&](const InverseGaussianSubordinator& g) -> std::optional<double> {
                   const double a = 2.0 * s + g.gamma * g.gamma;
                   if (a < 0.0) return std::nullopt;
                   return g.delta * (std::sqrt(a) - g.gamma);
                 },
                 [&](const StableSubordinator& g) -> std::optional<double> {
                   if (s < 0.0) return std::nullopt;
                   return std::pow(s, g.alpha);
                 }},
      spec);
}

}  // namespace detail

/// Bernstein exponent f(s), s >= 0.
inline double laplace_exponent(const SubordinatorSpec& spec, double s) {
  if (!(s >= 0.0)) throw DomainError("laplace_exponent: s must be non-negative");
  return *detail::laplace_exponent_extended(spec, s);
}

/// f(s) continued to Re(s) >= 0 along the principal branch.
inline std::complex<double> laplace_exponent(const SubordinatorSpec& spec,
                                             std::complex<double> s) {
  using C = std::complex<double>;
  return std::visit(
      Overloaded{[&](const GammaSubordinator& g) { return g.p * std::log(C(1.0) + s / g.alpha); },
                 [&](const TemperedStableSubordinator& g) {
                   return std::pow(s + g.mu, g.alpha) - std::pow(g.mu, g.alpha);
                 },
                 [&](const InverseGaussianSubordinator& g) {
                   return g.delta * (std::sqrt(2.0 * s + g.gamma * g.gamma) - g.gamma);
                 },
                 [&](const StableSubordinator& g) {
                   return s == C(0.0) ? C(0.0) : std::pow(s, g.alpha);
                 }},
      spec);
}

/// Taylor-coefficient magnitudes c_j = (-1)^(j-1) f^(j)(s) / j!, j = 1..n
/// (index 0 unused). All are non-negative because f is Bernstein.
inline std::vector<double> bernstein_coefficients(const SubordinatorSpec& spec, double s,
                                                  int n) {
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  std::visit(Overloaded{[&](const GammaSubordinator& g) {
                          const double x = g.alpha + s;
                          double pw = 1.0;
                          for (int j = 1; j <= n; ++j) {
                            pw /= x;
                            c[j] = g.p * pw / j;
                          }
                        },
                        [&](const TemperedStableSubordinator& g) {
                          const double x = s + g.mu;
                          double b = 1.0;
                          double pw = std::pow(x, g.alpha);
                          for (int j = 1; j <= n; ++j) {
                            b *= (g.alpha - (j - 1)) / j;
                            pw /= x;
                            c[j] = std::abs(b) * pw;
                          }
                        },
                        [&](const InverseGaussianSubordinator& g) {
                          const double x = 2.0 * s + g.gamma * g.gamma;
                          double b = 1.0;
                          double pw = std::sqrt(x);
                          for (int j = 1; j <= n; ++j) {
                            b *= (0.5 - (j - 1)) / j;
                            pw *= 2.0 / x;
                            c[j] = g.delta * std::abs(b) * pw;
                          }
                        },
                        [&](const StableSubordinator& g) {
                          if (!(s > 0.0)) throw DomainError("stable: derivatives need s > 0");
                          double b = 1.0;
                          double pw = std::pow(s, g.alpha);
                          for (int j = 1; j <= n; ++j) {
                            b *= (g.alpha - (j - 1)) / j;
                            pw /= s;
                            c[j] = std::abs(b) * pw;
                          }
                        }},
             spec);
  return c;
}

/// Jump masses of the Poisson process with rate `rate` run on the clock D:
/// nu({n}) = integral of P(Poisson(rate*y) = n) over the Levy measure of D,
/// which equals c_n rate^n. Index 0 unused.
inline std::vector<double> subordinated_poisson_atoms(const SubordinatorSpec& spec, double rate,
                                                      int n) {
  std::vector<double> nu(static_cast<std::size_t>(n) + 1, 0.0);
  std::visit(Overloaded{[&](const GammaSubordinator& g) {
                          const double q = rate / (g.alpha + rate);
                          double pw = 1.0;
                          for (int j = 1; j <= n; ++j) {
                            pw *= q;
                            nu[j] = g.p * pw / j;
                          }
                        },
                        [&](const TemperedStableSubordinator& g) {
                          const double q = rate / (g.mu + rate);
                          const double scale = std::pow(g.mu + rate, g.alpha);
                          double b = 1.0;
                          double pw = 1.0;
                          for (int j = 1; j <= n; ++j) {
                            b *= (g.alpha - (j - 1)) / j;
                            pw *= q;
                            nu[j] = std::abs(b) * scale * pw;
                          }
                        },
                        [&](const InverseGaussianSubordinator& g) {
                          const double x = 2.0 * rate + g.gamma * g.gamma;
                          const double q = 2.0 * rate / x;
                          const double scale = g.delta * std::sqrt(x);
                          double b = 1.0;
                          double pw = 1.0;
                          for (int j = 1; j <= n; ++j) {
                            b *= (0.5 - (j - 1)) / j;
                            pw *= q;
                            nu[j] = std::abs(b) * scale * pw;
                          }
                        },
                        [&](const StableSubordinator& g) {
                          const double scale = std::pow(rate, g.alpha);
                          double b = 1.0;
                          for (int j = 1; j <= n; ++j) {
                            b *= (g.alpha - (j - 1)) / j;
                            nu[j] = std::abs(b) * scale;
                          }
                        }},
             spec);
  return nu;
}

/// Diagnostics of the tempered-stable rejection sampler.
struct SamplerStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  [[nodiscard]] double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

/// One draw of the increment D(t + dt) - D(t), which is distributed as D(dt).
///
/// The stable family scales a unit draw by dt^(1/alpha). The tempered family
/// proposes stable increments and keeps one with probability exp(-mu x), so the
/// expected number of proposals is exp(mu^alpha dt).
template <BitGenerator64 G>
double sample_increment(const SubordinatorSpec& spec, double dt, G& g,
                        SamplerStats* stats = nullptr) {
  if (!(dt > 0.0)) throw DomainError("sample_increment: dt must be positive");
  constexpr double tiny = std::numeric_limits<double>::min();
  return std::visit(
      Overloaded{[&](const GammaSubordinator& s) {
                   return std::max(gamma_variate(g, s.p * dt, s.alpha), tiny);
                 },
                 [&](const TemperedStableSubordinator& s) {
                   const double scale = std::pow(dt, 1.0 / s.alpha);
                   for (;;) {
                     const double x = scale * stable_unit(g, s.alpha);
                     const double w = uniform_open(g);
                     if (stats) ++stats->proposals;
                     if (w <= std::exp(-s.mu * x)) {
                       if (stats) ++stats->accepted;
                       return x;
                     }
                   }
                 },
                 [&](const InverseGaussianSubordinator& s) {
                   const double mean = dt * s.delta / s.gamma;
                   const double shape = (dt * s.delta) * (dt * s.delta);
                   return std::max(inverse_gaussian(g, mean, shape), tiny);
                 },
                 [&](const StableSubordinator& s) {
                   return std::pow(dt, 1.0 / s.alpha) * stable_unit(g, s.alpha);
                 }},
      spec);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of D(t). The stable family has infinite moments.
inline Moments subordinator_moments(const SubordinatorSpec& spec, double t) {
  if (!(t > 0.0)) throw DomainError("subordinator_moments: t must be positive");
  return std::visit(
      Overloaded{[&](const GammaSubordinator& s) {
                   return Moments{s.p * t / s.alpha, s.p * t / (s.alpha * s.alpha)};
                 },
                 [&](const TemperedStableSubordinator& s) {
                   return Moments{t * s.alpha * std::pow(s.mu, s.alpha - 1.0),
                                  t * s.alpha * (1.0 - s.alpha) * std::pow(s.mu, s.alpha - 2.0)};
                 },
                 [&](const InverseGaussianSubordinator& s) {
                   return Moments{t * s.delta / s.gamma,
                                  t * s.delta / (s.gamma * s.gamma * s.gamma)};
                 },
                 [&](const StableSubordinator&) -> Moments {
                   throw UnsupportedFamily("stable subordinator has infinite moments");
                 }},
      spec);
}

/// Normalized tilted moments b_n = E[exp(-c D(t)) D(t)^n] / (n! E[exp(-c D(t))]),
/// n = 0..n_max.
///
/// The tilted law has cumulants kappa_j = t (-1)^(j-1) f^(j)(c), and moments
/// follow from n b_n = sum_j t j c_j b_(n-j). Every term is non-negative.
inline std::vector<double> tilted_moment_coefficients(const SubordinatorSpec& spec, double c,
                                                      double t, int n_max) {
  const auto coef = bernstein_coefficients(spec, c, n_max);
  std::vector<double> b(static_cast<std::size_t>(n_max) + 1, 0.0);
  b[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    CompensatedSum acc;
    for (int j = 1; j <= n; ++j) acc.add(t * j * coef[j] * b[n - j]);
    b[n] = acc.value() / n;
  }
  return b;
}

/// E[exp(-c D(t)) D(t)^n] = (-1)^n d^n/ds^n exp(-t f(s)) at s = c, exact.
inline double lt_derivative_moment(const SubordinatorSpec& spec, double c, int n, double t) {
  if (!(c > 0.0)) throw DomainError("lt_derivative_moment: c must be positive");
  if (!(t > 0.0)) throw DomainError("lt_derivative_moment: t must be positive");
  if (n < 0) throw DomainError("lt_derivative_moment: n must be non-negative");
  const double base = -t * laplace_exponent(spec, c);
  if (n == 0) return std::exp(base);
  const auto b = tilted_moment_coefficients(spec, c, t, n);
  const double log_value = base + boost::math::lgamma(n + 1.0) + std::log(b[n]);
  const double value = std::exp(log_value);
  if (!std::isfinite(value)) throw OverflowError("lt_derivative_moment: result overflows");
  return value;
}

struct DerivativeEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

/// Distance from s to the nearest singularity of f in the complex plane.
inline double singularity_distance(const SubordinatorSpec& spec, double s) {
  return std::visit(Overloaded{[&](const GammaSubordinator& g) { return s + g.alpha; },
                               [&](const TemperedStableSubordinator& g) { return s + g.mu; },
                               [&](const InverseGaussianSubordinator& g) {
                                 return s + 0.5 * g.gamma * g.gamma;
                               },
                               [&](const StableSubordinator&) { return s; }},
                    spec);
}

}  // namespace detail

/// Same functional from the Cauchy integral
/// n!/(2 pi r^n) * integral of exp(-t f(c + r e^{iu})) e^{-inu} du,
/// trapezoid rule on a circle of radius half the distance to the nearest
/// singularity. Independent of the cumulant route; limited to n <= 6.
/// error_estimate is the change between 64 and 128 nodes.
inline DerivativeEstimate lt_derivative_moment_numeric(const SubordinatorSpec& spec, double c,
                                                       int n, double t) {
  if (n < 0 || n > 6) throw DomainError("lt_derivative_moment_numeric: needs 0 <= n <= 6");
  if (!(c > 0.0)) throw DomainError("lt_derivative_moment_numeric: c must be positive");
  if (!(t > 0.0)) throw DomainError("lt_derivative_moment_numeric: t must be positive");
  using C = std::complex<double>;
  const double r = 0.5 * detail::singularity_distance(spec, c);
  auto contour = [&](int nodes) {
    C acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double u = 2.0 * std::numbers::pi * j / nodes;
      const C z = c + r * std::polar(1.0, u);
      acc += std::exp(-t * laplace_exponent(spec, z)) * std::polar(1.0, -n * u);
    }
    return (acc / static_cast<double>(nodes)).real() * std::tgamma(n + 1.0) / std::pow(r, n);
  };
  const double coarse = contour(64);
  const double fine = contour(128);
  const double err = std::abs(fine - coarse);
  if (err > 1e-6 * std::abs(fine)) {
    throw PrecisionLoss("lt_derivative_moment_numeric: contour error " + std::to_string(err) +
                        " exceeds 1e-6 relative");
  }
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return {sign * fine, err};
}

/// Monte Carlo estimate of E[exp(-c D(t)) D(t)^n] with its standard error.
struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

inline McEstimate lt_derivative_moment_mc(const SubordinatorSpec& spec, double c, int n, double t,
                                          std::int64_t draws, std::uint64_t seed) {
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    auto g = Stream::for_replicate(seed, static_cast<std::uint64_t>(i));
    const double d = sample_increment(spec, t, g);
    const double v = std::exp(-c * d) * std::pow(d, n);
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / static_cast<double>(draws);
  const double var = std::max(0.0, sum2 / static_cast<double>(draws) - m * m);
  return {m, std::sqrt(var / static_cast<double>(draws))};
}

}  // namespace skellamk
