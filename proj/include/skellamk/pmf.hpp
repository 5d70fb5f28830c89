#pragma once

// Point probabilities for every integer-valued family, the compound Poisson
// recursion used for whole tables, and rigorous tail bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "skellamk/errors.hpp"
#include "skellamk/levy.hpp"
#include "skellamk/process.hpp"
#include "skellamk/rng.hpp"
#include "skellamk/specfun.hpp"
#include "skellamk/subordinators.hpp"
#include "skellamk/transforms.hpp"

namespace skellamk {

namespace detail {

inline void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive and finite");
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace detail

/// Poisson(mean) probability of n.
inline double poisson_pmf(double mean, std::int64_t n) {
  if (n < 0) return 0.0;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  return std::exp(nn * std::log(mean) - mean - boost::math::lgamma(nn + 1.0));
}

/// Skellam probability P(N1(t) - N2(t) = m); l2 = 0 gives the Poisson limit.
inline double skellam_pmf(double l1, double l2, double t, std::int64_t m) {
  detail::require_time(t);
  if (!(l1 > 0.0) || !(l2 >= 0.0)) throw DomainError("skellam_pmf: needs l1 > 0, l2 >= 0");
  if (l2 == 0.0) return poisson_pmf(l1 * t, m);
  const int order = static_cast<int>(std::abs(m));
  const auto s = detail::bessel_i_series(order, 2.0 * t * std::sqrt(l1 * l2), 1e-17);
  const double log_value = -t * (l1 + l2) + 0.5 * static_cast<double>(m) * std::log(l1 / l2) +
                           s.log_lead + std::log(s.sum);
  return std::exp(log_value);
}

// ---------------------------------------------------------------------------
// Compound Poisson recursion

/// PMF on {0..n_max} of a compound Poisson variable with non-negative integer
/// jumps: p_0 = exp(-t total), p_n = (t/n) sum_j j nu_j p_{n-j}, where nu_j
/// (index 0 unused) are the jump intensities and `total` is their full sum
/// (atoms beyond nu.size() may exist; they do not affect p_n for n < nu.size()).
///
/// Every term is non-negative, so the recursion is stable. Values are carried
/// with a running scale so p_0 may underflow without losing the rest.
struct CompoundTable {
  std::vector<double> probs;
  double relative_error = 0.0;  // bound on the relative rounding error of each entry
};

inline CompoundTable compound_poisson_pmf(const std::vector<double>& nu, double total, double t,
                                          std::int64_t n_max) {
  if (n_max < 0) throw DomainError("compound_poisson_pmf: n_max must be >= 0");
  const auto size = static_cast<std::size_t>(n_max) + 1;
  const std::size_t jmax = nu.empty() ? 0 : nu.size() - 1;
  std::vector<double> w(std::min(size, jmax + 1), 0.0);
  for (std::size_t j = 1; j < w.size(); ++j) w[j] = static_cast<double>(j) * nu[j] * t;
  std::vector<double> p(size, 0.0);
  double log_scale = -t * total;
  p[0] = 1.0;
  constexpr double big = 1e280;
  for (std::size_t n = 1; n < size; ++n) {
    const std::size_t J = std::min(n, w.size() - 1);
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t j = 1;
    for (; j + 3 <= J; j += 4) {
      a0 += w[j] * p[n - j];
      a1 += w[j + 1] * p[n - j - 1];
      a2 += w[j + 2] * p[n - j - 2];
      a3 += w[j + 3] * p[n - j - 3];
    }
    for (; j <= J; ++j) a0 += w[j] * p[n - j];
    p[n] = ((a0 + a1) + (a2 + a3)) / static_cast<double>(n);
    if (p[n] > big) {
      for (std::size_t i = 0; i <= n; ++i) p[i] /= big;
      log_scale += std::log(big);
    }
  }
  double max_log = 0.0;
  for (auto& v : p) {
    if (v > 0.0) {
      const double lv = std::log(v) + log_scale;
      max_log = std::max(max_log, std::abs(lv));
      v = std::exp(lv);
    }
  }
  CompoundTable out;
  out.probs = std::move(p);
  // Each level adds at most (J + 3) roundings to the error of its inputs.
  const double levels = static_cast<double>(size);
  const double width = static_cast<double>(std::min(size, w.size())) + 3.0;
  out.relative_error = detail::kEps * (levels * width + 2.0 * max_log + 4.0);
  return out;
}

/// PPoK probabilities P(N(t) = n), n = 0..n_max.
inline std::vector<double> ppok_pmf_vector(int k, double lambda, double t, std::int64_t n_max) {
  detail::require_time(t);
  if (k < 1 || !(lambda > 0.0)) throw DomainError("ppok_pmf: needs k >= 1, lambda > 0");
  std::vector<double> nu(static_cast<std::size_t>(k) + 1, lambda);
  nu[0] = 0.0;
  return compound_poisson_pmf(nu, k * lambda, t, n_max).probs;
}

/// PPoK probability by the recursion p_n = (lambda t / n) sum_{j <= min(k, n)} j p_{n-j}.
inline double ppok_pmf(int k, double lambda, double t, std::int64_t n) {
  if (n < 0) return 0.0;
  return ppok_pmf_vector(k, lambda, t, n).back();
}

/// PPoK probability by enumerating x_1 + 2 x_2 + ... + k x_k = n.
inline double ppok_pmf_enumerate(int k, double lambda, double t, std::int64_t n) {
  detail::require_time(t);
  if (k < 1 || !(lambda > 0.0)) throw DomainError("ppok_pmf_enumerate: needs k >= 1, lambda > 0");
  if (n > 30 || k > 6) throw SizeError("ppok_pmf_enumerate: limited to n <= 30, k <= 6");
  if (n < 0) return 0.0;
  const double log_lt = std::log(lambda * t);
  CompensatedSum sum;
  // Depth-first over x_k, x_{k-1}, ..., x_1 with remaining weight r.
  std::function<void(int, std::int64_t, double, double)> walk = [&](int size, std::int64_t r,
                                                                    double zeta, double log_fact) {
    if (size == 1) {
      const double x = static_cast<double>(r);
      sum.add(std::exp((zeta + x) * log_lt - log_fact - boost::math::lgamma(x + 1.0) -
                       k * lambda * t));
      return;
    }
    for (std::int64_t x = 0; x * size <= r; ++x) {
      const double xd = static_cast<double>(x);
      walk(size - 1, r - x * size, zeta + xd, log_fact + boost::math::lgamma(xd + 1.0));
    }
  };
  walk(k, n, 0.0, 0.0);
  return sum.value();
}

// ---------------------------------------------------------------------------
// Tail bounds

namespace detail {

/// inf over theta in (0, theta_max) of exp(log_m(theta) - theta a), using
/// convexity of the exponent; returns 1 when no theta improves on it.
inline double chernoff(const std::function<std::optional<double>(double)>& log_m, double a,
                       double theta_max) {
  auto h = [&](double th) {
    const auto v = log_m(th);
    if (!v || !std::isfinite(*v)) return std::numeric_limits<double>::infinity();
    return *v - th * a;
  };
  double hi = theta_max;
  if (!std::isfinite(hi)) {
    hi = 1.0;
    while (hi < 700.0 && h(2.0 * hi) < h(hi)) hi *= 2.0;
    hi *= 2.0;
  } else {
    hi *= 1.0 - 1e-12;
  }
  for (int i = 0; i < 200 && !std::isfinite(h(hi)); ++i) hi *= 0.5;
  if (!(hi > 0.0) || !std::isfinite(h(hi))) return 1.0;
  const auto r = boost::math::tools::brent_find_minima(h, 0.0, hi, 52);
  const double best = std::min(r.second, h(hi));
  return std::min(1.0, std::exp(best));
}

/// P(X > hi) and P(X < lo) for a light-tailed family from its log-MGF.
inline double light_upper_tail(const ProcessSpec& spec, double t, std::int64_t hi,
                               double theta_max) {
  return chernoff([&](double th) { return log_mgf(spec, t, th); }, static_cast<double>(hi) + 1.0,
                  theta_max);
}

inline double light_lower_tail(const ProcessSpec& spec, double t, std::int64_t lo,
                               double theta_max) {
  return chernoff([&](double th) { return log_mgf(spec, t, -th); }, 1.0 - static_cast<double>(lo),
                  theta_max);
}

/// P(X > n) for X = SFPP(alpha, lambda) at t. Smaller of two bounds:
///  - P(X > n) <= (1 - G(u)) / (1 - u^(n+1)) for u in (0, 1), G the PGF;
///  - union bound over the Poisson(lambda^alpha t) number of jumps M:
///    P(X > n) <= sum_m P(M = m) min(1, m P(J > n/m)), with
///    P(J > x) = |binom(alpha - 1, floor x)|.
inline double sfpp_upper_tail(double alpha, double lambda, double t, std::int64_t n) {
  if (n < 0) return 1.0;
  if (alpha >= 1.0) {
    return chernoff([&](double th) { return std::optional<double>(t * lambda * std::expm1(th)); },
                    static_cast<double>(n) + 1.0, std::numeric_limits<double>::infinity());
  }
  const double rate = std::pow(lambda, alpha) * t;
  const double nn = static_cast<double>(n) + 1.0;
  auto pgf_bound = [&](double c) {
    // u = 1 - c / nn
    const double x = c / nn;
    const double num = -std::expm1(-rate * std::pow(x, alpha));
    const double den = -std::expm1(nn * std::log1p(-x));
    return num / den;
  };
  const auto r = boost::math::tools::brent_find_minima(pgf_bound, 1e-6, std::min(60.0, nn * 0.999), 40);
  double best = std::min(1.0, r.second);

  CompensatedSum u;
  double cdf = 0.0;
  for (std::int64_t m = 1; m <= n; ++m) {
    const double pm = poisson_pmf(rate, m);
    cdf += pm;
    const double x = std::floor(static_cast<double>(n) / static_cast<double>(m));
    const double tail_j = std::abs(gen_binomial(alpha - 1.0, static_cast<std::int64_t>(x)));
    u.add(pm * std::min(1.0, static_cast<double>(m) * tail_j));
    if (m > rate && pm < 1e-18) break;
  }
  // Remaining m contribute at most P(M > m_last).
  const double rest = std::max(0.0, 1.0 - std::exp(-rate) - cdf);
  best = std::min(best, u.value() + rest + 1e-16);
  return best;
}

/// sup_{j >= n} P(X = j) for X = SFPP(alpha, lambda) at t, n >= 1. With M
/// jumps, S_M = j needs one jump of size >= j/M, and P(J = i) = |binom(alpha, i)|
/// decreases in i, so P(S_m = j) <= m |binom(alpha, ceil(j/m))|.
inline double sfpp_point_bound(double alpha, double lambda, double t, std::int64_t n) {
  if (n < 1) return 1.0;
  if (alpha >= 1.0) {
    return static_cast<double>(n) >= lambda * t ? poisson_pmf(lambda * t, n) : 1.0;
  }
  const double rate = std::pow(lambda, alpha) * t;
  CompensatedSum u;
  double cdf = std::exp(-rate);
  for (std::int64_t m = 1; m <= n; ++m) {
    const double pm = poisson_pmf(rate, m);
    cdf += pm;
    const std::int64_t j = (n + m - 1) / m;
    u.add(pm * std::min(1.0, static_cast<double>(m) * std::abs(gen_binomial(alpha, j))));
    if (m > rate && pm < 1e-18) break;
  }
  return std::min(1.0, u.value() + std::max(0.0, 1.0 - cdf) + 1e-16);
}

inline double tsfpp_theta_max(double alpha, double mu, double lambda) {
  if (alpha >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log1p(mu / lambda);
}

}  // namespace detail

/// Rigorous bound on P(X(t) > hi).
inline double upper_tail_bound(const ProcessSpec& spec, double t, std::int64_t hi) {
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{[&](const SFPP& s) { return detail::sfpp_upper_tail(s.alpha, s.lambda, t, hi); },
                 [&](const SFSP& s) {
                   // X > hi >= 0 forces X1 > hi.
                   if (hi < 0) return 1.0;
                   return detail::sfpp_upper_tail(s.alpha1, s.lambda1, t, hi);
                 },
                 [&](const TSFPP& s) {
                   return detail::light_upper_tail(spec, t, hi,
                                                   detail::tsfpp_theta_max(s.alpha, s.mu, s.lambda));
                 },
                 [&](const TSFSP& s) {
                   return detail::light_upper_tail(
                       spec, t, hi, detail::tsfpp_theta_max(s.alpha1, s.mu1, s.lambda1));
                 },
                 [&](const auto&) { return detail::light_upper_tail(spec, t, hi, inf); }},
      spec);
}

/// Rigorous bound on P(X(t) < lo).
inline double lower_tail_bound(const ProcessSpec& spec, double t, std::int64_t lo) {
  const double inf = std::numeric_limits<double>::infinity();
  const bool nonneg = std::holds_alternative<PPoK>(spec) || std::holds_alternative<SFPP>(spec) ||
                      std::holds_alternative<TSFPP>(spec);
  if (nonneg && lo <= 0) return 0.0;
  return std::visit(
      Overloaded{[&](const SFPP&) { return 1.0; },
                 [&](const SFSP& s) {
                   if (lo > 0) return 1.0;
                   return detail::sfpp_upper_tail(s.alpha2, s.lambda2, t, -lo);
                 },
                 [&](const TSFPP&) { return 1.0; },
                 [&](const TSFSP& s) {
                   return detail::light_lower_tail(
                       spec, t, lo, detail::tsfpp_theta_max(s.alpha2, s.mu2, s.lambda2));
                 },
                 [&](const auto&) { return detail::light_lower_tail(spec, t, lo, inf); }},
      spec);
}

// ---------------------------------------------------------------------------
// SPoK

namespace detail {

/// Smallest n >= start (doubling) with upper tail of PPoK below tol.
inline std::int64_t ppok_cutoff(int k, double lambda, double t, double tol, std::int64_t start) {
  std::int64_t n = std::max<std::int64_t>(start, 16);
  const ProcessSpec s = PPoK{k, lambda};
  while (upper_tail_bound(s, t, n) >= tol) {
    if (n > (std::int64_t{1} << 40)) throw ConvergenceError("ppok tail: window too large");
    n *= 2;
  }
  return n;
}

}  // namespace detail

/// SPoK probability from the definition, sum_n P(N1 = n + m) P(N2 = n),
/// truncated where the omitted part is provably below tol.
inline SeriesResult spok_pmf_conv_series(int k, double l1, double l2, double t, std::int64_t m,
                                         double tol) {
  detail::require_time(t);
  validate(SPoK{k, l1, l2});
  if (!(tol > 0.0)) throw DomainError("spok_pmf_conv: tol must be positive");
  if (l2 == 0.0) return {m >= 0 ? ppok_pmf(k, l1, t, m) : 0.0, 1, 0.0};
  // The sum runs over the count of the process that sits at the lower value.
  const double l_lo = m >= 0 ? l2 : l1;
  const double l_hi = m >= 0 ? l1 : l2;
  const std::int64_t shift = std::abs(m);
  const std::int64_t start =
      static_cast<std::int64_t>(std::ceil(detail::s1(k) * l_lo * t + 10.0));
  const std::int64_t n = detail::ppok_cutoff(k, l_lo, t, tol, start);
  const auto a = ppok_pmf_vector(k, l_hi, t, n + shift);
  const auto b = ppok_pmf_vector(k, l_lo, t, n);
  CompensatedSum sum;
  for (std::int64_t i = 0; i <= n; ++i) sum.add(a[static_cast<std::size_t>(i + shift)] * b[i]);
  // Omitted terms: sum_{i > n} a[i + shift] b[i] <= P(N_lo > n).
  return {sum.value(), n + 1, upper_tail_bound(PPoK{k, l_lo}, t, n)};
}

inline double spok_pmf_conv(int k, double l1, double l2, double t, std::int64_t m, double tol) {
  return spok_pmf_conv_series(k, l1, l2, t, m, tol).value;
}

/// The closed form e^{-kt(l1+l2)} (l1/l2)^{m/2} I_|m|(2tk sqrt(l1 l2)). It is the
/// Skellam law with rates k l1 and k l2.
inline double spok_pmf_closedform(int k, double l1, double l2, double t, std::int64_t m) {
  if (!(l2 > 0.0)) throw DomainError("spok_pmf_closedform: needs l2 > 0");
  if (k < 1) throw DomainError("spok_pmf_closedform: needs k >= 1");
  return skellam_pmf(k * l1, k * l2, t, m);
}

// ---------------------------------------------------------------------------
// Space-fractional families

/// SFPP probability ((-1)^n / n!) 1psi1[(1,a);(1-n,a)](-l^a t). alpha = 1 is
/// the Poisson law.
inline SeriesResult sfpp_pmf_series(double alpha, double lambda, double t, std::int64_t n,
                                    double tol) {
  detail::require_time(t);
  validate(SFPP{alpha, lambda});
  if (n < 0) return {0.0, 1, 0.0};
  if (alpha >= 1.0) return {poisson_pmf(lambda * t, n), 1, 0.0};
  if (n == 0) return {std::exp(-std::pow(lambda, alpha) * t), 1, 0.0};
  const double nn = static_cast<double>(n);
  const auto r = detail::fox_wright_scaled(1.0, alpha, 1.0 - nn, alpha,
                                           -std::pow(lambda, alpha) * t, tol,
                                           boost::math::lgamma(nn + 1.0));
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return {sign * r.value, r.terms_used, r.truncation_bound};
}

inline double sfpp_pmf(double alpha, double lambda, double t, std::int64_t n, double tol = 1e-14) {
  return sfpp_pmf_series(alpha, lambda, t, n, tol).value;
}

/// SFPP probabilities 0..n_max by the compound Poisson recursion with jump
/// intensities l^a |binom(a, j)|.
inline CompoundTable sfpp_pmf_vector(double alpha, double lambda, double t, std::int64_t n_max) {
  detail::require_time(t);
  validate(SFPP{alpha, lambda});
  if (alpha >= 1.0) {
    return compound_poisson_pmf({0.0, lambda}, lambda, t, n_max);
  }
  const auto [nu, rest] = detail::sfpp_atoms(alpha, lambda, static_cast<int>(std::max<std::int64_t>(n_max, 1)));
  (void)rest;
  return compound_poisson_pmf(nu, std::pow(lambda, alpha), t, n_max);
}

/// TSFPP probability. Exponential tilting of the stable clock gives
/// P(n) = exp(mu^a t) (l/(l+mu))^n P_SFPP(n; a, l + mu), which is evaluated with
/// the Fox-Wright series.
inline SeriesResult tsfpp_pmf_series(double alpha, double mu, double lambda, double t,
                                     std::int64_t n, double tol) {
  detail::require_time(t);
  validate(TSFPP{alpha, mu, lambda});
  if (n < 0) return {0.0, 1, 0.0};
  if (alpha >= 1.0) return {poisson_pmf(lambda * t, n), 1, 0.0};
  const double log_tilt =
      std::pow(mu, alpha) * t + static_cast<double>(n) * std::log(lambda / (lambda + mu));
  const double scale = std::exp(log_tilt);
  // Requested accuracy applies after tilting.
  const auto base = sfpp_pmf_series(alpha, lambda + mu, t, n, tol / std::max(scale, 1e-300));
  return {scale * base.value, base.terms_used, scale * base.truncation_bound};
}

inline double tsfpp_pmf(double alpha, double mu, double lambda, double t, std::int64_t n,
                        double tol = 1e-14) {
  return tsfpp_pmf_series(alpha, mu, lambda, t, n, tol).value;
}

/// The double series exp(t mu^a) ((-1)^n / n!) sum_m (mu/l)^m / m!
/// 1psi1[(1,a);(1-n-m,a)](-l^a t). Its terms behave like (mu/l)^m m^(n-1-a),
/// so it converges only for mu < l.
inline SeriesResult tsfpp_pmf_double_series(double alpha, double mu, double lambda, double t,
                                            std::int64_t n, double tol) {
  detail::require_time(t);
  validate(TSFPP{alpha, mu, lambda});
  if (!(mu < lambda)) {
    throw ConvergenceError("tsfpp_pmf_double_series: diverges unless mu < lambda");
  }
  const double z = -std::pow(lambda, alpha) * t;
  const double log_pref = std::pow(mu, alpha) * t;
  const double log_ratio = std::log(mu / lambda);
  CompensatedSum sum;
  double prev = std::numeric_limits<double>::infinity();
  double abs_sum = 0.0;
  for (std::int64_t m = 0; m < 100000; ++m) {
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    // ((-1)^n / n!) (mu/l)^m / m! psi = (-1)^m binom(n+m, m) (mu/l)^m P_SFPP(n+m)
    const double log_scale = boost::math::lgamma(nd + 1.0) + boost::math::lgamma(md + 1.0) -
                             md * log_ratio - log_pref;
    const auto r = detail::fox_wright_scaled(1.0, alpha, 1.0 - nd - md, alpha, z, tol * 1e-3,
                                             log_scale);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double term = sign * r.value;
    sum.add(term);
    const double mag = std::abs(term);
    abs_sum += mag;
    if (m > 2 && mag < tol * std::max(1e-300, std::abs(sum.value())) && mag <= prev) {
      /// Terms alternate in sign; each carries relative rounding of a few ulps.
      const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * abs_sum;
      if (rounding > std::max(tol, 1e-3 * std::abs(sum.value()))) {
        throw PrecisionLoss("tsfpp_pmf_double_series: cancellation swamps the sum at n = " +
                            std::to_string(n));
      }
      return {sum.value(), m + 1, mag * mu / (lambda - mu) + r.truncation_bound + rounding};
    }
    prev = mag;
  }
  throw ConvergenceError("tsfpp_pmf_double_series: no convergence");
}

/// TSFPP probabilities 0..n_max by the compound Poisson recursion.
inline CompoundTable tsfpp_pmf_vector(double alpha, double mu, double lambda, double t,
                                      std::int64_t n_max) {
  detail::require_time(t);
  validate(TSFPP{alpha, mu, lambda});
  if (alpha >= 1.0) return compound_poisson_pmf({0.0, lambda}, lambda, t, n_max);
  const auto [nu, rest] =
      detail::tsfpp_atoms(alpha, mu, lambda, static_cast<int>(std::max<std::int64_t>(n_max, 1)));
  (void)rest;
  return compound_poisson_pmf(nu, std::pow(lambda + mu, alpha) - std::pow(mu, alpha), t, n_max);
}

/// Partial sum over n < n_terms of the SFSP series
/// sum_n (-1)^m / (n! (n+m)!) psi(1-n-m; l1) psi(1-n; l2) (mirrored for m < 0).
inline double sfsp_pmf_partial(double a1, double a2, double l1, double l2, double t,
                               std::int64_t m, std::int64_t n_terms, double tol = 1e-15) {
  detail::require_time(t);
  validate(SFSP{a1, a2, l1, l2});
  const std::int64_t am = std::abs(m);
  const double z1 = -std::pow(l1, a1) * t;
  const double z2 = -std::pow(l2, a2) * t;
  auto psi = [&](double a, double z, std::int64_t shift, double log_scale) {
    return detail::fox_wright_scaled(1.0, a, 1.0 - static_cast<double>(shift), a, z, tol,
                                     log_scale)
        .value;
  };
  CompensatedSum sum;
  for (std::int64_t n = 0; n < n_terms; ++n) {
    const double ln_n = boost::math::lgamma(static_cast<double>(n) + 1.0);
    const double ln_nm = boost::math::lgamma(static_cast<double>(n + am) + 1.0);
    const double sign = (am % 2 == 0) ? 1.0 : -1.0;
    double a = 0.0;
    double b = 0.0;
    if (m >= 0) {
      a = psi(a1, z1, n + am, ln_nm);
      b = psi(a2, z2, n, ln_n);
    } else {
      a = psi(a1, z1, n, ln_n);
      b = psi(a2, z2, n + am, ln_nm);
    }
    sum.add(sign * a * b);
  }
  return sum.value();
}

/// Partial sum over n < n_terms of P1(n + m) P2(n) (mirrored for m < 0) with
/// both TSFPP factors from the double series (needs mu_i < lambda_i).
inline double tsfsp_pmf_partial(const TSFSP& s, double t, std::int64_t m, std::int64_t n_terms,
                                double tol = 1e-13) {
  validate(s);
  const std::int64_t am = std::abs(m);
  CompensatedSum sum;
  for (std::int64_t n = 0; n < n_terms; ++n) {
    const std::int64_t n1 = m >= 0 ? n + am : n;
    const std::int64_t n2 = m >= 0 ? n : n + am;
    sum.add(tsfpp_pmf_double_series(s.alpha1, s.mu1, s.lambda1, t, n1, tol).value *
            tsfpp_pmf_double_series(s.alpha2, s.mu2, s.lambda2, t, n2, tol).value);
  }
  return sum.value();
}

// ---------------------------------------------------------------------------
// Time-changed SPoK

namespace detail {

inline void require_tcspok(const TimeChangedSPoK& s) {
  validate(ProcessSpec{s});
  if (std::holds_alternative<StableSubordinator>(s.sub)) {
    throw UnsupportedFamily("tcspok_pmf: the stable clock has no finite moments");
  }
  if (!(s.lambda2 > 0.0)) throw DomainError("tcspok_pmf: needs l2 > 0");
}

}  // namespace detail

/// P(Z(t) = m) from the series
///   sum_x (k l1)^(m+x) (k l2)^x / ((m+x)! x!) E[exp(-k(l1+l2) D) D^(2x+m)],
/// x >= max(0, -m), i.e. the closed-form SPoK law mixed over the clock. Term x
/// is P(P1 = m + x, P2 = x) for P_i Poisson(k l_i D), so the omitted part is at
/// most P(P2 > x_last), bounded through the clock's Laplace exponent.
inline SeriesResult tcspok_pmf_series(int k, double l1, double l2, const SubordinatorSpec& sub,
                                      double t, std::int64_t m, double tol) {
  detail::require_time(t);
  const TimeChangedSPoK spec{k, l1, l2, sub};
  detail::require_tcspok(spec);
  if (!(tol > 0.0)) throw DomainError("tcspok_pmf: tol must be positive");
  const double big_k = k * (l1 + l2);
  const double kl1 = k * l1;
  const double kl2 = k * l2;
  const double base = -t * laplace_exponent(sub, big_k);
  const std::int64_t x0 = std::max<std::int64_t>(0, -m);

  // P(P2 > x) via E[exp(theta P2)] = exp(-t f(-k l2 (e^theta - 1))).
  const auto log_m2 = [&](double th) -> std::optional<double> {
    const auto f = detail::laplace_exponent_extended(sub, -kl2 * std::expm1(th));
    if (!f) return std::nullopt;
    return -t * *f;
  };
  const double theta_cap = std::visit(
      Overloaded{[&](const GammaSubordinator& g) { return std::log1p(g.alpha / kl2); },
                 [&](const TemperedStableSubordinator& g) { return std::log1p(g.mu / kl2); },
                 [&](const InverseGaussianSubordinator& g) {
                   return std::log1p(g.gamma * g.gamma / (2.0 * kl2));
                 },
                 [&](const StableSubordinator&) { return 0.0; }},
      sub);

  int n_max = static_cast<int>(std::min<std::int64_t>(2 * x0 + m + 128, 1 << 20));
  for (;;) {
    const auto b = tilted_moment_coefficients(sub, big_k, t, n_max);
    CompensatedSum sum;
    for (std::int64_t x = x0;; ++x) {
      const std::int64_t order = 2 * x + m;
      if (order > n_max) break;
      const double xd = static_cast<double>(x);
      const double mx = static_cast<double>(m + x);
      const double bn = b[static_cast<std::size_t>(order)];
      if (bn > 0.0) {
        const double log_term = base + mx * std::log(kl1) + xd * std::log(kl2) +
                                boost::math::lgamma(static_cast<double>(order) + 1.0) -
                                boost::math::lgamma(mx + 1.0) - boost::math::lgamma(xd + 1.0) +
                                std::log(bn);
        sum.add(std::exp(log_term));
      }
      const double tail =
          detail::chernoff(log_m2, xd + 1.0, theta_cap > 0 ? theta_cap : 1e-300);
      if (tail < tol) return {sum.value(), x - x0 + 1, tail};
    }
    if (n_max >= (1 << 20)) throw ConvergenceError("tcspok_pmf: series did not converge");
    n_max *= 2;
  }
}

inline double tcspok_pmf(int k, double l1, double l2, const SubordinatorSpec& sub, double t,
                         std::int64_t m, double tol = 1e-12) {
  return tcspok_pmf_series(k, l1, l2, sub, t, m, tol).value;
}

/// Monte Carlo version of the same mixture: the closed-form SPoK probability
/// averaged over draws of D(t).
inline McEstimate tcspok_pmf_mc(int k, double l1, double l2, const SubordinatorSpec& sub,
                                double t, std::int64_t m, std::int64_t draws, std::uint64_t seed) {
  detail::require_time(t);
  detail::require_tcspok(TimeChangedSPoK{k, l1, l2, sub});
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    auto g = Stream::for_replicate(seed, static_cast<std::uint64_t>(i));
    const double d = sample_increment(sub, t, g);
    const double v = spok_pmf_closedform(k, l1, l2, d, m);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n)};
}

}  // namespace skellamk
