#pragma once

// Fractional difference operators and residuals of the difference-differential
// equations satisfied by the probability tables.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "skellamk/errors.hpp"
#include "skellamk/levy.hpp"
#include "skellamk/pmf_table.hpp"
#include "skellamk/process.hpp"
#include "skellamk/specfun.hpp"
#include "skellamk/transforms.hpp"

namespace skellamk {

enum class ShiftDirection { backward, forward };

/// (1 - B)^order or (1 - F)^order, expanded to `truncation` + 1 terms.
struct FracDiffSpec {
  double order = 1.0;
  ShiftDirection direction = ShiftDirection::backward;
  int truncation = 200;
};

/// Coefficients binom(order, j) (-1)^j, j = 0..n.
inline std::vector<double> frac_diff_coefficients(double order, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) + 1);
  double b = 1.0;
  c[0] = 1.0;
  for (int j = 1; j <= n; ++j) {
    b *= -(order - (j - 1)) / j;
    c[static_cast<std::size_t>(j)] = b;
  }
  return c;
}

/// sum_{j <= truncation} binom(order, j) (-1)^j p(m -/+ j). The bound covers
/// the omitted terms: |c_j| decreases for j >= 1, so they contribute at most
/// |c_{J+1}| times the mass at the omitted indices (the table's own tail
/// bound included).
inline SeriesResult frac_diff(const FracDiffSpec& op, const PmfTable& pmf, std::int64_t m) {
  if (!(op.order > 0.0 && op.order <= 1.0)) throw DomainError("frac_diff: order must be in (0, 1]");
  if (op.truncation < 1) throw DomainError("frac_diff: truncation must be >= 1");
  const int sign = op.direction == ShiftDirection::backward ? -1 : 1;
  const std::int64_t last = m + sign * static_cast<std::int64_t>(op.truncation);
  if (!pmf.covers(m) || !pmf.covers(last)) {
    throw SupportError("frac_diff: table does not cover [" + std::to_string(std::min(m, last)) +
                       ", " + std::to_string(std::max(m, last)) + "]");
  }
  const auto c = frac_diff_coefficients(op.order, op.truncation + 1);
  CompensatedSum sum;
  for (int j = 0; j <= op.truncation; ++j) {
    sum.add(c[static_cast<std::size_t>(j)] * pmf.at(m + sign * j));
  }
  const double next = std::abs(c.back());
  double bound = 0.0;
  if (next > 0.0) {
    CompensatedSum rest;
    for (std::int64_t i = last + sign; i >= pmf.m_lo && i <= pmf.m_hi; i += sign) rest.add(pmf.at(i));
    bound = next * (rest.value() + pmf.truncation_bound);
  }
  return {sum.value(), op.truncation + 1, bound};
}

struct GoverningOptions {
  /// Time step of the central difference; 0 means 1e-4 t.
  double dt = 0.0;
  /// Terms kept in fractional operators and Levy sums.
  int truncation = 200;
  PmfOptions table;
};

namespace detail {

/// Tables on one fixed support so every time point uses the same algorithm.
struct TableSet {
  std::vector<PmfTable> tables;  // t - h, t + h, t - h/2, t + h/2, t
};

inline std::int64_t jump_reach(const ProcessSpec& spec, int truncation) {
  return std::visit(Overloaded{[](const Skellam&) -> std::int64_t { return 1; },
                               [](const PPoK& s) -> std::int64_t { return s.k; },
                               [](const SPoK& s) -> std::int64_t { return s.k; },
                               [&](const auto&) -> std::int64_t { return truncation; }},
                    spec);
}

/// Right side of the equation at index m, from the table at time t.
inline double governing_rhs(const ProcessSpec& spec, const PmfTable& p, std::int64_t m,
                            int truncation, const LevyMeasure* levy) {
  return std::visit(
      Overloaded{
          [&](const Skellam& s) {
            return s.lambda1 * (p.at(m - 1) - p.at(m)) + s.lambda2 * (p.at(m + 1) - p.at(m));
          },
          [&](const PPoK& s) {
            CompensatedSum acc;
            acc.add(-s.k * s.lambda * p.at(m));
            for (int j = 1; j <= s.k; ++j) acc.add(s.lambda * p.at(m - j));
            return acc.value();
          },
          [&](const SPoK& s) {
            CompensatedSum acc;
            acc.add(-s.k * (s.lambda1 + s.lambda2) * p.at(m));
            for (int j = 1; j <= s.k; ++j) {
              acc.add(s.lambda1 * p.at(m - j));
              acc.add(s.lambda2 * p.at(m + j));
            }
            return acc.value();
          },
          [&](const SFPP& s) {
            const FracDiffSpec op{s.alpha, ShiftDirection::backward, truncation};
            return -std::pow(s.lambda, s.alpha) * frac_diff(op, p, m).value;
          },
          [&](const SFSP& s) {
            const FracDiffSpec b{s.alpha1, ShiftDirection::backward, truncation};
            const FracDiffSpec f{s.alpha2, ShiftDirection::forward, truncation};
            return -std::pow(s.lambda1, s.alpha1) * frac_diff(b, p, m).value -
                   std::pow(s.lambda2, s.alpha2) * frac_diff(f, p, m).value;
          },
          [&](const auto&) {
            // Tempered families: sum over Levy atoms nu_l (P(m - l) - P(m)).
            CompensatedSum acc;
            for (const auto& a : levy->atoms) {
              acc.add(a.mass * (p.at(m - a.location) - p.at(m)));
            }
            return acc.value();
          }},
      spec);
}

inline void require_governed(const ProcessSpec& spec) {
  const bool ok = std::visit(Overloaded{[](const Skellam&) { return true; },
                                        [](const PPoK&) { return true; },
                                        [](const SPoK&) { return true; },
                                        [](const SFPP&) { return true; },
                                        [](const TSFPP&) { return true; },
                                        [](const SFSP&) { return true; },
                                        [](const TSFSP&) { return true; },
                                        [](const auto&) { return false; }},
                             spec);
  if (!ok) {
    throw UnsupportedFamily("governing_residual: no difference-differential equation for " +
                            family_name(spec));
  }
}

}  // namespace detail

/// |d/dt P(m) - (right side)(m)| for m in window, with d/dt from central
/// differences at steps h and h/2 combined by Richardson extrapolation.
inline std::vector<double> governing_residuals(const ProcessSpec& spec, double t,
                                               std::pair<std::int64_t, std::int64_t> window,
                                               const GoverningOptions& opt = {}) {
  validate(spec);
  detail::require_governed(spec);
  detail::require_time(t);
  if (window.second < window.first) throw DomainError("governing_residual: empty window");
  if (opt.truncation < 1) throw DomainError("governing_residual: truncation must be >= 1");
  const double h = opt.dt > 0.0 ? opt.dt : 1e-4 * t;
  if (!(h < t)) throw DomainError("governing_residual: dt must be below t");

  const std::int64_t reach = detail::jump_reach(spec, opt.truncation);
  PmfOptions topt = opt.table;
  const bool nonneg = detail::nonnegative_family(spec);
  const std::int64_t lo = nonneg ? std::max<std::int64_t>(0, window.first - reach) : window.first - reach;
  topt.window = std::make_pair(lo, window.second + reach);
  if (!detail::nonnegative_family(spec) && !std::holds_alternative<Skellam>(spec) &&
      !topt.inner_cutoff) {
    // Same inner truncation at every time point, chosen at the latest one.
    if (!std::holds_alternative<SPoK>(spec) || opt.table.spok_form == SpokForm::convolution) {
      const auto c2 = detail::component(spec, 2);
      topt.inner_cutoff = detail::tail_cutoff(c2, t + h, topt.tol / 4.0, 16,
                                              detail::default_cap(spec, topt));
    }
  }

  std::optional<LevyMeasure> levy;
  if (std::holds_alternative<TSFPP>(spec) || std::holds_alternative<TSFSP>(spec)) {
    levy = levy_measure(spec, opt.truncation);
  }
  const auto at = [&](double s) { return pmf_table(spec, s, topt); };
  const PmfTable m2 = at(t - h);
  const PmfTable p2 = at(t + h);
  const PmfTable m1 = at(t - h / 2);
  const PmfTable p1 = at(t + h / 2);
  const PmfTable p0 = at(t);

  std::vector<double> out;
  for (std::int64_t m = window.first; m <= window.second; ++m) {
    const double d_h = (p2.at(m) - m2.at(m)) / (2.0 * h);
    const double d_h2 = (p1.at(m) - m1.at(m)) / h;
    const double deriv = (4.0 * d_h2 - d_h) / 3.0;
    const double rhs = detail::governing_rhs(spec, p0, m, opt.truncation, levy ? &*levy : nullptr);
    out.push_back(std::abs(deriv - rhs));
  }
  return out;
}

inline double governing_residual(const ProcessSpec& spec, double t,
                                 std::pair<std::int64_t, std::int64_t> window,
                                 const GoverningOptions& opt = {}) {
  const auto r = governing_residuals(spec, t, window, opt);
  return *std::max_element(r.begin(), r.end());
}

/// Relative residual of dM/dt = -M (l1^a1 (1-e^th)^a1 + l2^a2 (1-e^-th)^a2)
/// for the SFSP moment generating function, d/dt by Richardson-extrapolated
/// central differences.
inline double sfsp_mgf_ode_residual(const SFSP& s, double t, Complex theta, double dt = 0.0) {
  detail::require_time(t);
  const double h = dt > 0.0 ? dt : 1e-3 * t;
  const auto m = [&](double u) { return sfsp_mgf(s, u, theta); };
  const Complex d_h = (m(t + h) - m(t - h)) / (2.0 * h);
  const Complex d_h2 = (m(t + h / 2) - m(t - h / 2)) / h;
  const Complex deriv = (4.0 * d_h2 - d_h) / 3.0;
  const Complex e = std::exp(theta);
  const Complex rate = std::pow(s.lambda1, s.alpha1) * std::pow(1.0 - e, s.alpha1) +
                       std::pow(s.lambda2, s.alpha2) * std::pow(1.0 - 1.0 / e, s.alpha2);
  const Complex rhs = -m(t) * rate;
  return std::abs(deriv - rhs) / std::max(std::abs(rhs), 1e-300);
}

}  // namespace skellamk
