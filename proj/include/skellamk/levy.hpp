#pragma once

// Atomic Levy measures and the Levy-Khintchine consistency check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "skellamk/errors.hpp"
#include "skellamk/process.hpp"
#include "skellamk/specfun.hpp"
#include "skellamk/subordinators.hpp"
#include "skellamk/transforms.hpp"

namespace skellamk {

struct LevyAtom {
  std::int64_t location = 0;
  double mass = 0.0;
  friend bool operator==(const LevyAtom&, const LevyAtom&) = default;
};

/// Atoms sorted by location. truncation_bound bounds
/// |sum over omitted atoms of (1 - e^{i theta x}) mass| for every theta.
struct LevyMeasure {
  std::vector<LevyAtom> atoms;
  double truncation_bound = 0.0;

  [[nodiscard]] double total_mass() const {
    CompensatedSum s;
    for (const auto& a : atoms) s.add(a.mass);
    return s.value();
  }
  [[nodiscard]] double mass_at(std::int64_t x) const {
    const auto it = std::lower_bound(atoms.begin(), atoms.end(), x,
                                     [](const LevyAtom& a, std::int64_t v) { return a.location < v; });
    return (it != atoms.end() && it->location == x) ? it->mass : 0.0;
  }
  friend bool operator==(const LevyMeasure&, const LevyMeasure&) = default;
};

namespace detail {

/// |binom(alpha, n)| for n = 1..n_max (index 0 unused), alpha in (0, 1).
inline std::vector<double> abs_binomials(double alpha, int n_max) {
  std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
  double b = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    b *= (alpha - (n - 1)) / n;
    c[n] = std::abs(b);
  }
  return c;
}

/// sum_{n > N} |binom(alpha, n)| = |binom(alpha - 1, N)| for alpha in (0, 1).
inline double abs_binomial_tail(double alpha, std::int64_t n) {
  return std::abs(gen_binomial(alpha - 1.0, n));
}

/// SFPP atoms l^a |binom(a, n)|, n = 1..N; omitted mass l^a |binom(a-1, N)|.
inline std::pair<std::vector<double>, double> sfpp_atoms(double alpha, double lambda, int n) {
  if (alpha >= 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v[1] = lambda;
    return {v, 0.0};
  }
  auto c = abs_binomials(alpha, n);
  const double scale = std::pow(lambda, alpha);
  for (auto& x : c) x *= scale;
  return {c, scale * abs_binomial_tail(alpha, n)};
}

/// TSFPP atoms (l+mu)^a q^n |binom(a, n)| with q = l/(l+mu), n = 1..N, and a
/// bound on the omitted mass.
inline std::pair<std::vector<double>, double> tsfpp_atoms(double alpha, double mu, double lambda,
                                                          int n) {
  if (alpha >= 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    v[1] = lambda;
    return {v, 0.0};
  }
  auto v = subordinated_poisson_atoms(TemperedStableSubordinator{alpha, mu}, lambda, n);
  const double q = lambda / (lambda + mu);
  // Tail terms decrease in |binom| and geometrically in q.
  const double next = std::pow(lambda + mu, alpha) * std::pow(q, n + 1.0) *
                      std::abs(gen_binomial(alpha, n + 1));
  const double total = std::pow(lambda + mu, alpha) - std::pow(mu, alpha);
  CompensatedSum kept;
  for (int j = 1; j <= n; ++j) kept.add(v[j]);
  const double by_difference = std::max(0.0, total - kept.value());
  return {v, std::min(by_difference, next / (1.0 - q))};
}

inline void push_side(std::map<std::int64_t, double>& acc, const std::vector<double>& atoms,
                      int sign) {
  for (std::size_t j = 1; j < atoms.size(); ++j) {
    if (atoms[j] > 0.0) acc[sign * static_cast<std::int64_t>(j)] += atoms[j];
  }
}

inline LevyMeasure from_map(const std::map<std::int64_t, double>& acc, double omitted_mass) {
  LevyMeasure m;
  for (const auto& [x, w] : acc) {
    if (x != 0 && w > 0.0) m.atoms.push_back({x, w});
  }
  // |1 - e^{i theta x}| <= 2.
  m.truncation_bound = 2.0 * omitted_mass;
  return m;
}

}  // namespace detail

/// Levy measure of X(1). `truncation` is the number of atoms kept per side for
/// the infinite atomic families and the number of subordinated jump counts for
/// the time-changed SPoK. Running averages have no atomic Levy measure.
inline LevyMeasure levy_measure(const ProcessSpec& spec, int truncation = 200) {
  validate(spec);
  if (truncation < 1) throw DomainError("levy_measure: truncation must be >= 1");
  std::map<std::int64_t, double> acc;
  return std::visit(
      Overloaded{
          [&](const Skellam& s) {
            acc[1] += s.lambda1;
            acc[-1] += s.lambda2;
            return detail::from_map(acc, 0.0);
          },
          [&](const PPoK& s) {
            for (int j = 1; j <= s.k; ++j) acc[j] += s.lambda;
            return detail::from_map(acc, 0.0);
          },
          [&](const SPoK& s) {
            for (int j = 1; j <= s.k; ++j) {
              acc[j] += s.lambda1;
              acc[-j] += s.lambda2;
            }
            return detail::from_map(acc, 0.0);
          },
          [&](const SFPP& s) {
            const auto [a, rest] = detail::sfpp_atoms(s.alpha, s.lambda, truncation);
            detail::push_side(acc, a, 1);
            return detail::from_map(acc, rest);
          },
          [&](const TSFPP& s) {
            const auto [a, rest] = detail::tsfpp_atoms(s.alpha, s.mu, s.lambda, truncation);
            detail::push_side(acc, a, 1);
            return detail::from_map(acc, rest);
          },
          [&](const SFSP& s) {
            const auto [a, ra] = detail::sfpp_atoms(s.alpha1, s.lambda1, truncation);
            const auto [b, rb] = detail::sfpp_atoms(s.alpha2, s.lambda2, truncation);
            detail::push_side(acc, a, 1);
            detail::push_side(acc, b, -1);
            return detail::from_map(acc, ra + rb);
          },
          [&](const TSFSP& s) {
            const auto [a, ra] = detail::tsfpp_atoms(s.alpha1, s.mu1, s.lambda1, truncation);
            const auto [b, rb] = detail::tsfpp_atoms(s.alpha2, s.mu2, s.lambda2, truncation);
            detail::push_side(acc, a, 1);
            detail::push_side(acc, b, -1);
            return detail::from_map(acc, ra + rb);
          },
          [&](const TimeChangedSPoK& s) {
            // Z jumps when the clocked total count M = N1 + N2 (rate K) jumps;
            // a jump of M by n moves Z by a sum of n independent SPoK jump sizes.
            const double rate = s.k * (s.lambda1 + s.lambda2);
            const auto nu = subordinated_poisson_atoms(s.sub, rate, truncation);
            const double p_up = s.lambda1 / (s.lambda1 + s.lambda2) / s.k;
            const double p_down = s.lambda2 / (s.lambda1 + s.lambda2) / s.k;
            // conv holds the law of n summed jumps on [-n k, n k].
            std::vector<double> conv{1.0};
            CompensatedSum kept;
            for (int n = 1; n <= truncation; ++n) {
              std::vector<double> next(conv.size() + 2 * static_cast<std::size_t>(s.k), 0.0);
              for (std::size_t i = 0; i < conv.size(); ++i) {
                if (conv[i] == 0.0) continue;
                for (int j = 1; j <= s.k; ++j) {
                  next[i + s.k + j] += conv[i] * p_up;
                  next[i + s.k - j] += conv[i] * p_down;
                }
              }
              conv = std::move(next);
              kept.add(nu[n]);
              const std::int64_t offset = static_cast<std::int64_t>(n) * s.k;
              for (std::size_t i = 0; i < conv.size(); ++i) {
                const double w = nu[n] * conv[i];
                if (w > 0.0) acc[static_cast<std::int64_t>(i) - offset] += w;
              }
            }
            const double total = laplace_exponent(s.sub, rate);
            return detail::from_map(acc, std::max(0.0, total - kept.value()));
          },
          [&](const auto&) -> LevyMeasure {
            throw UnsupportedFamily(
                "levy_measure: running averages have a continuous Levy measure");
          }},
      spec);
}

/// |psi(theta) - sum_atoms (1 - e^{i theta x}) mass|.
inline double levy_khintchine_residual(const ProcessSpec& spec, double theta, int truncation = 200) {
  const auto m = levy_measure(spec, truncation);
  Complex sum = 0.0;
  for (const auto& a : m.atoms) {
    sum += a.mass * (1.0 - std::polar(1.0, theta * static_cast<double>(a.location)));
  }
  return std::abs(char_exponent(spec, theta) - sum);
}

}  // namespace skellamk
