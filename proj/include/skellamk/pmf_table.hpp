#pragma once

// Whole probability tables over an integer window, with a rigorous bound on
// the probability mass they leave out.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skellamk/errors.hpp"
#include "skellamk/moments.hpp"
#include "skellamk/pmf.hpp"
#include "skellamk/process.hpp"

namespace skellamk {

enum class SpokForm { convolution, closed_form };

struct PmfOptions {
  double tol = 1e-12;
  /// Fixed support [first, second]; otherwise chosen from the moments.
  std::optional<std::pair<std::int64_t, std::int64_t>> window;
  /// Cap on the half-width of automatically chosen windows; 0 picks a
  /// per-family default (2^16 one-sided, 2^14 two-sided).
  std::int64_t max_half_width = 0;
  SpokForm spok_form = SpokForm::convolution;
  /// Fixed truncation of the inner sum for convolution-built tables.
  std::optional<std::int64_t> inner_cutoff;
};

struct PmfTable {
  ProcessSpec spec;
  double t = 0.0;
  std::int64_t m_lo = 0;
  std::int64_t m_hi = -1;
  std::vector<double> probs;
  double truncation_bound = 0.0;
  /// "default", or "closed_form" for tables built from the Bessel closed form.
  std::string form = "default";
  /// Entries in (-1e-12, 0) that were set to zero.
  std::int64_t clamped = 0;
  bool nonnegative_support = false;

  [[nodiscard]] bool covers(std::int64_t m) const {
    return (m >= m_lo && m <= m_hi) || (nonnegative_support && m < 0);
  }
  /// P(X = m); outside the window only the known zeros below 0 are available.
  [[nodiscard]] double at(std::int64_t m) const {
    if (m >= m_lo && m <= m_hi) return probs[static_cast<std::size_t>(m - m_lo)];
    if (nonnegative_support && m < 0) return 0.0;
    throw SupportError("PmfTable: m = " + std::to_string(m) + " outside [" +
                       std::to_string(m_lo) + ", " + std::to_string(m_hi) + "]");
  }
  [[nodiscard]] double total() const {
    CompensatedSum s;
    for (double p : probs) s.add(p);
    return s.value();
  }
  friend bool operator==(const PmfTable&, const PmfTable&) = default;
};

namespace detail {

inline bool nonnegative_family(const ProcessSpec& spec) {
  return std::holds_alternative<PPoK>(spec) || std::holds_alternative<SFPP>(spec) ||
         std::holds_alternative<TSFPP>(spec);
}

inline bool heavy_tailed(const ProcessSpec& spec) {
  if (const auto* s = std::get_if<SFPP>(&spec)) return s->alpha < 1.0;
  if (const auto* s = std::get_if<SFSP>(&spec)) return s->alpha1 < 1.0 || s->alpha2 < 1.0;
  return false;
}

/// out[m - lo] = sum_n a[n + m] b[n] for m in [lo, hi]; a must reach hi + b.size() - 1.
inline std::vector<double> cross_convolve(const std::vector<double>& a, const std::vector<double>& b,
                                          std::int64_t lo, std::int64_t hi) {
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1), 0.0);
  const auto nb = static_cast<std::int64_t>(b.size());
  const auto na = static_cast<std::int64_t>(a.size());
  for (std::int64_t m = lo; m <= hi; ++m) {
    const std::int64_t n0 = std::max<std::int64_t>(0, -m);
    const std::int64_t n1 = std::min(nb - 1, na - 1 - m);
    double s0 = 0.0, s1 = 0.0;
    std::int64_t n = n0;
    for (; n + 1 <= n1; n += 2) {
      s0 += a[static_cast<std::size_t>(n + m)] * b[static_cast<std::size_t>(n)];
      s1 += a[static_cast<std::size_t>(n + m + 1)] * b[static_cast<std::size_t>(n + 1)];
    }
    if (n <= n1) s0 += a[static_cast<std::size_t>(n + m)] * b[static_cast<std::size_t>(n)];
    out[static_cast<std::size_t>(m - lo)] = s0 + s1;
  }
  return out;
}

/// One-sided component of a two-sided family, as a process of its own.
inline ProcessSpec component(const ProcessSpec& spec, int side) {
  if (const auto* s = std::get_if<SPoK>(&spec)) {
    return PPoK{s->k, side == 1 ? s->lambda1 : s->lambda2};
  }
  if (const auto* s = std::get_if<Skellam>(&spec)) {
    return PPoK{1, side == 1 ? s->lambda1 : s->lambda2};
  }
  if (const auto* s = std::get_if<SFSP>(&spec)) {
    return side == 1 ? SFPP{s->alpha1, s->lambda1} : SFPP{s->alpha2, s->lambda2};
  }
  if (const auto* s = std::get_if<TSFSP>(&spec)) {
    return side == 1 ? TSFPP{s->alpha1, s->mu1, s->lambda1} : TSFPP{s->alpha2, s->mu2, s->lambda2};
  }
  throw UnsupportedFamily("component: not a two-sided family");
}

/// P(X = 0..n_max) for a one-sided family.
inline std::vector<double> one_sided_vector(const ProcessSpec& spec, double t, std::int64_t n_max) {
  if (n_max < 0) return {};
  if (const auto* s = std::get_if<PPoK>(&spec)) return ppok_pmf_vector(s->k, s->lambda, t, n_max);
  if (const auto* s = std::get_if<SFPP>(&spec)) return sfpp_pmf_vector(s->alpha, s->lambda, t, n_max).probs;
  if (const auto* s = std::get_if<TSFPP>(&spec)) {
    return tsfpp_pmf_vector(s->alpha, s->mu, s->lambda, t, n_max).probs;
  }
  throw UnsupportedFamily("one_sided_vector: not a one-sided family");
}

/// Smallest power-of-two multiple of `start` with P(X > n) < tol, capped.
inline std::int64_t tail_cutoff(const ProcessSpec& one_sided, double t, double tol,
                                std::int64_t start, std::int64_t cap) {
  std::int64_t n = std::max<std::int64_t>(start, 16);
  while (n < cap && upper_tail_bound(one_sided, t, n) >= tol) n *= 2;
  return std::min(n, std::max(cap, start));
}

struct Entries {
  std::vector<double> probs;
  double internal_bound = 0.0;  // mass lost inside the window
};

/// SPoK law in the closed form, i.e. Skellam(k l1, k l2).
inline Skellam closed_form_law(const SPoK& s) { return {s.k * s.lambda1, s.k * s.lambda2}; }

inline Entries tcspok_entries(const TimeChangedSPoK& s, double t, std::int64_t lo, std::int64_t hi,
                              double tol) {
  require_tcspok(s);
  const double big_k = s.k * (s.lambda1 + s.lambda2);
  const double kl1 = s.k * s.lambda1;
  const double kl2 = s.k * s.lambda2;
  // P2 ~ Poisson(k l2 D): pick x_max with P(P2 > x_max) < tol.
  const auto log_m2 = [&](double th) -> std::optional<double> {
    const auto f = laplace_exponent_extended(s.sub, -kl2 * std::expm1(th));
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
      s.sub);
  std::int64_t x_max = 8;
  double p2_tail = 1.0;
  for (;;) {
    p2_tail = chernoff(log_m2, static_cast<double>(x_max) + 1.0, theta_cap);
    if (p2_tail < tol || x_max > (1 << 18)) break;
    x_max *= 2;
  }
  const std::int64_t n_max = 2 * x_max + std::max<std::int64_t>(hi, 0);
  const auto b = tilted_moment_coefficients(s.sub, big_k, t, static_cast<int>(n_max));
  const double base = -t * laplace_exponent(s.sub, big_k);
  std::vector<double> log_fact(static_cast<std::size_t>(n_max) + 1);
  for (std::size_t i = 0; i < log_fact.size(); ++i) {
    log_fact[i] = boost::math::lgamma(static_cast<double>(i) + 1.0);
  }
  const double ll1 = std::log(kl1);
  const double ll2 = std::log(kl2);
  Entries e;
  e.probs.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::int64_t m = lo; m <= hi; ++m) {
    CompensatedSum sum;
    for (std::int64_t x = std::max<std::int64_t>(0, -m); x <= x_max; ++x) {
      const auto order = static_cast<std::size_t>(2 * x + m);
      if (!(b[order] > 0.0)) continue;
      const double lt = base + static_cast<double>(m + x) * ll1 + static_cast<double>(x) * ll2 +
                        log_fact[order] - log_fact[static_cast<std::size_t>(m + x)] -
                        log_fact[static_cast<std::size_t>(x)] + std::log(b[order]);
      sum.add(std::exp(lt));
    }
    e.probs[static_cast<std::size_t>(m - lo)] = sum.value();
  }
  e.internal_bound = p2_tail;
  return e;
}

inline Entries entries(const ProcessSpec& spec, double t, std::int64_t lo, std::int64_t hi,
                       const PmfOptions& opt, std::int64_t cap) {
  Entries e;
  const auto width = static_cast<std::size_t>(hi - lo + 1);
  if (nonnegative_family(spec)) {
    e.probs.assign(width, 0.0);
    if (hi < 0) return e;
    const auto v = one_sided_vector(spec, t, hi);
    for (std::int64_t m = std::max<std::int64_t>(lo, 0); m <= hi; ++m) {
      e.probs[static_cast<std::size_t>(m - lo)] = v[static_cast<std::size_t>(m)];
    }
    return e;
  }
  if (const auto* s = std::get_if<Skellam>(&spec)) {
    e.probs.resize(width);
    for (std::int64_t m = lo; m <= hi; ++m) {
      e.probs[static_cast<std::size_t>(m - lo)] = skellam_pmf(s->lambda1, s->lambda2, t, m);
    }
    return e;
  }
  if (const auto* s = std::get_if<SPoK>(&spec); s && opt.spok_form == SpokForm::closed_form) {
    const auto law = closed_form_law(*s);
    e.probs.resize(width);
    for (std::int64_t m = lo; m <= hi; ++m) {
      e.probs[static_cast<std::size_t>(m - lo)] = skellam_pmf(law.lambda1, law.lambda2, t, m);
    }
    return e;
  }
  if (const auto* s = std::get_if<TimeChangedSPoK>(&spec)) {
    return tcspok_entries(*s, t, lo, hi, opt.tol / 4.0);
  }
  if (const auto* s = std::get_if<SPoK>(&spec); s && s->lambda2 == 0.0) {
    e.probs.assign(width, 0.0);
    if (hi < 0) return e;
    const auto v = ppok_pmf_vector(s->k, s->lambda1, t, hi);
    for (std::int64_t m = std::max<std::int64_t>(lo, 0); m <= hi; ++m) {
      e.probs[static_cast<std::size_t>(m - lo)] = v[static_cast<std::size_t>(m)];
    }
    return e;
  }
  // Two-sided: P(X = m) = sum_n P(X1 = n + m) P(X2 = n), n <= n2.
  const auto c1 = component(spec, 1);
  const auto c2 = component(spec, 2);
  std::int64_t n2 = opt.inner_cutoff ? *opt.inner_cutoff : tail_cutoff(c2, t, opt.tol / 4.0, 16, cap);
  n2 = std::max(n2, -lo);
  const auto b = one_sided_vector(c2, t, n2);
  const auto a = one_sided_vector(c1, t, std::max<std::int64_t>(hi, 0) + n2);
  e.probs = cross_convolve(a, b, lo, hi);
  e.internal_bound = upper_tail_bound(c2, t, n2);
  return e;
}

/// Log-MGF family used for the tails of a table.
inline ProcessSpec tail_law(const ProcessSpec& spec, const PmfOptions& opt) {
  if (const auto* s = std::get_if<SPoK>(&spec); s && opt.spok_form == SpokForm::closed_form) {
    return closed_form_law(*s);
  }
  return spec;
}

inline double window_tails(const ProcessSpec& law, double t, std::int64_t lo, std::int64_t hi) {
  return lower_tail_bound(law, t, lo) + upper_tail_bound(law, t, hi);
}

inline std::pair<double, double> center_and_spread(const ProcessSpec& spec, double t,
                                                   const PmfOptions& opt) {
  if (const auto* s = std::get_if<SPoK>(&spec); s && opt.spok_form == SpokForm::closed_form) {
    const auto m = moments(closed_form_law(*s), t);
    return {m.mean, std::sqrt(m.variance)};
  }
  if (heavy_tailed(spec)) return {0.0, 2.0};
  const auto m = moments(spec, t);
  return {m.mean, std::sqrt(m.variance)};
}

inline std::int64_t default_cap(const ProcessSpec& spec, const PmfOptions& opt) {
  if (opt.max_half_width > 0) return opt.max_half_width;
  return nonnegative_family(spec) ? (std::int64_t{1} << 16) : (std::int64_t{1} << 14);
}

}  // namespace detail

/// Probability table of X(t). Without an explicit window the support is
/// centred at round(mean) with half-width max(10, ceil(8 sd)), doubled until the
/// bounded tail mass is below tol or the cap is reached; in the latter case the
/// table carries the (larger) bound it actually achieves.
inline PmfTable pmf_table(const ProcessSpec& spec, double t, const PmfOptions& opt = {}) {
  validate(spec);
  detail::require_time(t);
  if (!is_integer_valued(spec)) {
    throw UnsupportedFamily("pmf_table: " + family_name(spec) + " is not integer valued");
  }
  if (!(opt.tol > 0.0)) throw DomainError("pmf_table: tol must be positive");
  const bool nonneg = detail::nonnegative_family(spec);
  const auto law = detail::tail_law(spec, opt);
  const std::int64_t cap = detail::default_cap(spec, opt);

  std::int64_t lo = 0;
  std::int64_t hi = 0;
  double tails = 0.0;
  if (opt.window) {
    lo = opt.window->first;
    hi = opt.window->second;
    if (hi < lo) throw DomainError("pmf_table: empty window");
    tails = detail::window_tails(law, t, lo, hi);
  } else {
    const auto [mean, sd] = detail::center_and_spread(spec, t, opt);
    const auto c = static_cast<std::int64_t>(std::llround(mean));
    auto hw = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::ceil(8.0 * sd)));
    for (;;) {
      lo = nonneg ? std::max<std::int64_t>(0, c - hw) : c - hw;
      hi = c + hw;
      tails = detail::window_tails(law, t, lo, hi);
      if (tails < opt.tol / 2.0 || hw >= cap) break;
      hw = std::min(cap, 2 * hw);
    }
  }

  auto e = detail::entries(spec, t, lo, hi, opt, cap);
  PmfTable table;
  table.spec = spec;
  table.t = t;
  table.m_lo = lo;
  table.m_hi = hi;
  table.nonnegative_support = nonneg;
  for (auto& p : e.probs) {
    if (p < 0.0) {
      if (p < -1e-12) throw PrecisionLoss("pmf_table: negative probability " + std::to_string(p));
      p = 0.0;
      ++table.clamped;
    }
  }
  table.probs = std::move(e.probs);
  table.truncation_bound = std::min(1.0, tails + e.internal_bound);
  if (std::holds_alternative<SPoK>(spec) && opt.spok_form == SpokForm::closed_form) {
    table.form = "closed_form";
  }
  if (const auto* s = std::get_if<TimeChangedSPoK>(&spec); s && s->k >= 2) {
    table.form = "closed_form";
  }
  return table;
}

/// SFSP probability P(X1(t) - X2(t) = m) from the two component laws.
inline SeriesResult sfsp_pmf_series(double a1, double a2, double l1, double l2, double t,
                                    std::int64_t m, double tol) {
  detail::require_time(t);
  const SFSP s{a1, a2, l1, l2};
  validate(s);
  if (!(tol > 0.0)) throw DomainError("sfsp_pmf: tol must be positive");
  const ProcessSpec c2 = SFPP{a2, l2};
  const std::int64_t cap = std::int64_t{1} << 16;
  std::int64_t n2 = std::max<std::int64_t>(64, -m);
  for (;;) {
    // Omitted: sum_{n > n2} P(X1 = n + m) P(X2 = n) <= sup_{j > n2 + m} P(X1 = j) P(X2 > n2).
    const double bound = upper_tail_bound(c2, t, n2) *
                         detail::sfpp_point_bound(a1, l1, t, std::max<std::int64_t>(1, n2 + m + 1));
    if (bound < tol) {
      const auto b = sfpp_pmf_vector(a2, l2, t, n2).probs;
      const auto a = sfpp_pmf_vector(a1, l1, t, std::max<std::int64_t>(0, n2 + m)).probs;
      const auto v = detail::cross_convolve(a, b, m, m);
      return {v[0], n2 + 1, bound};
    }
    if (n2 >= cap) throw ConvergenceError("sfsp_pmf: tolerance not reachable within 2^16 terms");
    n2 *= 2;
  }
}

inline double sfsp_pmf(double a1, double a2, double l1, double l2, double t, std::int64_t m,
                       double tol = 1e-10) {
  return sfsp_pmf_series(a1, a2, l1, l2, t, m, tol).value;
}

/// TSFSP probability from the two tempered component laws.
inline SeriesResult tsfsp_pmf_series(const TSFSP& s, double t, std::int64_t m, double tol) {
  detail::require_time(t);
  validate(s);
  if (!(tol > 0.0)) throw DomainError("tsfsp_pmf: tol must be positive");
  const ProcessSpec c2 = TSFPP{s.alpha2, s.mu2, s.lambda2};
  const std::int64_t n2 =
      std::max(detail::tail_cutoff(c2, t, tol, 16, std::int64_t{1} << 20), -m);
  const auto b = tsfpp_pmf_vector(s.alpha2, s.mu2, s.lambda2, t, n2).probs;
  const auto a =
      tsfpp_pmf_vector(s.alpha1, s.mu1, s.lambda1, t, std::max<std::int64_t>(0, n2 + m)).probs;
  return {detail::cross_convolve(a, b, m, m)[0], n2 + 1, upper_tail_bound(c2, t, n2)};
}

inline double tsfsp_pmf(const TSFSP& s, double t, std::int64_t m, double tol = 1e-12) {
  return tsfsp_pmf_series(s, t, m, tol).value;
}

}  // namespace skellamk
