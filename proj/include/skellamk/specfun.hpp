#pragma once

// Special functions shared by the analytic formulas: log-gamma, reciprocal
// gamma, integer-order modified Bessel I, generalized binomial coefficients
// and the Fox-Wright 1psi1 series.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "skellamk/errors.hpp"

namespace skellamk {

/// Partial sum of a series together with a bound on the omitted tail.
struct SeriesResult {
  double value = 0.0;
  std::int64_t terms_used = 1;
  double truncation_bound = 0.0;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

/// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) {
  if (x == std::floor(x)) return 0.0;
  double r = std::fmod(x, 2.0);  // exact
  if (r < 0) r += 2.0;
  if (r > 1.0) return -std::sin(std::numbers::pi * (r - 1.0));
  return std::sin(std::numbers::pi * r);
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

/// 1/Gamma(x) split as sign * exp(log_abs). sign is 0 at the poles of Gamma.
struct RecipGammaParts {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();
};

inline RecipGammaParts recip_gamma_parts(double x) {
  if (is_nonpositive_integer(x)) return {};
  if (x > 0.0) return {1, -boost::math::lgamma(x)};
  // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi.
  const double s = sin_pi(x);
  return {s > 0 ? 1 : -1,
          std::log(std::abs(s)) + boost::math::lgamma(1.0 - x) - std::log(std::numbers::pi)};
}

/// Upper bound for log|1/Gamma(x)| that is finite at the poles.
inline double recip_gamma_log_envelope(double x) {
  if (x > 0.0) return -boost::math::lgamma(x);
  return boost::math::lgamma(1.0 - x) - std::log(std::numbers::pi);
}

/// log|Gamma(x)| and its sign; throws at the poles.
inline double log_abs_gamma(double x, int* sign) {
  if (is_nonpositive_integer(x)) {
    throw DomainError("Gamma has a pole at " + std::to_string(x));
  }
  return boost::math::lgamma(x, sign);
}

/// Modified Bessel I_n(z) as exp(log_lead) * sum with a relative tail bound.
struct BesselSeries {
  double log_lead = 0.0;
  double sum = 1.0;
  double relative_bound = 0.0;
  std::int64_t terms = 1;
};

inline BesselSeries bessel_i_series(int n, double z, double tol) {
  BesselSeries out;
  if (z == 0.0) {
    out.log_lead = n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return out;
  }
  const double half = 0.5 * z;
  const double q2 = half * half;
  out.log_lead = n * std::log(half) - boost::math::lgamma(n + 1.0);
  CompensatedSum sum;
  double term = 1.0;
  sum.add(term);
  for (std::int64_t j = 0;; ++j) {
    const double next = term * q2 / ((j + 1.0) * (j + 1.0 + n));
    const double after = q2 / ((j + 2.0) * (j + 2.0 + n));  // ratio beyond next
    const double s = sum.value();
    if (!std::isfinite(s) || !std::isfinite(next)) {
      throw OverflowError("bessel_i: series overflow at z=" + std::to_string(z));
    }
    if (next < tol * s && after < 1.0) {
      out.sum = s;
      out.relative_bound = next / (1.0 - after) / s;
      out.terms = j + 1;
      return out;
    }
    sum.add(next);
    term = next;
    if (j > 10'000'000) throw ConvergenceError("bessel_i: too many terms");
  }
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: x must be positive, got " + std::to_string(x));
  return boost::math::lgamma(x);
}

/// 1/Gamma(x); exactly zero at 0, -1, -2, ...
inline double recip_gamma(double x) {
  const auto p = detail::recip_gamma_parts(x);
  if (p.sign == 0) return 0.0;
  return p.sign * std::exp(p.log_abs);
}

/// Modified Bessel function of the first kind I_n(z), summed from its power
/// series until the next term drops below tol times the partial sum.
inline SeriesResult bessel_i(int n, double z, double tol) {
  if (n < 0) throw DomainError("bessel_i: order must be non-negative");
  if (z < 0.0) throw DomainError("bessel_i: argument must be non-negative");
  if (!(tol > 0.0)) throw DomainError("bessel_i: tol must be positive");
  if (z == 0.0) return {n == 0 ? 1.0 : 0.0, 1, 0.0};
  const auto s = detail::bessel_i_series(n, z, tol);
  const double lead = std::exp(s.log_lead);
  const double value = lead * s.sum;
  if (!std::isfinite(value)) {
    throw OverflowError("bessel_i: I_" + std::to_string(n) + "(" + std::to_string(z) +
                        ") exceeds the double range");
  }
  return {value, s.terms, value * s.relative_bound};
}

/// Generalized binomial coefficient alpha(alpha-1)...(alpha-n+1)/n!.
inline double gen_binomial(double alpha, std::int64_t n) {
  if (n < 0) throw DomainError("gen_binomial: n must be non-negative");
  double c = 1.0;
  for (std::int64_t j = 0; j < n; ++j) {
    c *= (alpha - static_cast<double>(j)) / static_cast<double>(j + 1);
    if (c == 0.0) break;
  }
  return c;
}

namespace detail {

/// exp(-log_scale) * 1psi1[(a,A);(b,B)](z). The scale keeps the partial sums
/// in range when the caller divides by a large factor (such as k!).
inline SeriesResult fox_wright_scaled(double a, double A, double b, double B, double z, double tol,
                                      double log_scale) {
  if (!(tol > 0.0)) throw DomainError("fox_wright_1psi1: tol must be positive");
  if (!(A > 0.0) || !(B > 0.0)) throw DomainError("fox_wright_1psi1: A and B must be positive");
  constexpr std::int64_t max_terms = 1'000'000;
  // Radius of convergence: infinite for A < B + 1, B^B A^-A for A = B + 1.
  if (A > B + 1.0) throw ConvergenceError("fox_wright_1psi1: zero radius of convergence (A > B + 1)");
  if (A == B + 1.0 && std::log(std::abs(z)) >= B * std::log(B) - A * std::log(A)) {
    throw ConvergenceError("fox_wright_1psi1: |z| outside the radius of convergence");
  }

  if (z == 0.0) {
    int sg = 1;
    const double num = log_abs_gamma(a, &sg);
    const auto rg = recip_gamma_parts(b);
    return {rg.sign == 0 ? 0.0 : sg * rg.sign * std::exp(num + rg.log_abs - log_scale), 1, 0.0};
  }

  const double log_abs_z = std::log(std::abs(z));
  struct Term {
    int num_sign = 1;
    double log_num = 0.0;
    double log_rest = 0.0;  // r log|z| - log r! - log_scale
    double log_env = 0.0;
  };
  auto make_term = [&](std::int64_t r) {
    const double rr = static_cast<double>(r);
    Term t;
    t.log_num = log_abs_gamma(a + A * rr, &t.num_sign);
    t.log_rest = rr * log_abs_z - boost::math::lgamma(rr + 1.0) - log_scale;
    t.log_env = t.log_num + recip_gamma_log_envelope(b + B * rr) + t.log_rest;
    return t;
  };

  CompensatedSum sum;
  /// Each exp(log term) carries relative rounding of about eps times the
  /// magnitudes of the logs that built it.
  double rounding = 0.0;
  Term cur = make_term(0);
  for (std::int64_t r = 0; r < max_terms; ++r) {
    const auto rg = recip_gamma_parts(b + B * static_cast<double>(r));
    if (rg.sign != 0) {
      int sign = cur.num_sign * rg.sign;
      if (z < 0.0 && (r % 2 == 1)) sign = -sign;
      const double lt = cur.log_num + rg.log_abs + cur.log_rest;
      const double mag = std::exp(lt);
      sum.add(sign * mag);
      const double logs = std::abs(cur.log_num) + std::abs(rg.log_abs) +
                          static_cast<double>(r) * std::abs(log_abs_z) +
                          std::abs(log_scale) + 1.0;
      rounding += 2.0 * std::numeric_limits<double>::epsilon() * logs * mag;
    }
    const Term next = make_term(r + 1);
    const double s = sum.value();
    if (!std::isfinite(s)) throw OverflowError("fox_wright_1psi1: partial sum overflow");
    const double env_next = std::exp(next.log_env);
    const double ratio = std::exp(next.log_env - cur.log_env);
    if (r >= 1 && env_next < tol * std::max(1.0, std::abs(s)) && ratio < 0.5) {
      return {s, r + 1, 2.0 * env_next + rounding};
    }
    cur = next;
  }
  throw ConvergenceError("fox_wright_1psi1: no convergence within 1e6 terms (z=" +
                         std::to_string(z) + ")");
}

}  // namespace detail

/// Fox-Wright function 1psi1[(a,A);(b,B)](z) = sum_r Gamma(a+Ar)/Gamma(b+Br) z^r/r!.
///
/// Terms whose denominator Gamma sits at a pole vanish exactly. The series is
/// accumulated with compensation; it stops once an envelope of the remaining
/// terms (which is finite even where individual terms vanish) falls below
/// tol * max(1, |sum|) and decays at least geometrically with ratio 1/2.
inline SeriesResult fox_wright_1psi1(double a, double A, double b, double B, double z,
                                     double tol) {
  return detail::fox_wright_scaled(a, A, b, B, z, tol, 0.0);
}

}  // namespace skellamk
