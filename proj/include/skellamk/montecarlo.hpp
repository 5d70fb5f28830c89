#pragma once

// Seeded Monte Carlo estimators and goodness-of-fit statistics.
//
// Replicate i always draws from Stream::for_replicate(seed, i); workers only
// decide who computes which replicate, so results never depend on the thread
// count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "skellamk/errors.hpp"
#include "skellamk/pmf_table.hpp"
#include "skellamk/process.hpp"
#include "skellamk/rng.hpp"
#include "skellamk/subordinators.hpp"
#include "skellamk/trajectory.hpp"

namespace skellamk {

/// Worker count: SKELLAMK_THREADS if set and positive, else the hardware count.
inline unsigned thread_count() {
  if (const char* env = std::getenv("SKELLAMK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i, stream_i) for i in [0, n), spread over workers in contiguous
/// blocks. body must only write to slot i of its output.
template <class Body>
void for_each_replicate(std::int64_t n, std::uint64_t seed, Body&& body) {
  const auto workers = static_cast<std::int64_t>(
      std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(1, n / 1024)));
  auto run = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      auto g = Stream::for_replicate(seed, static_cast<std::uint64_t>(i));
      body(i, g);
    }
  };
  if (workers <= 1) {
    run(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t block = (n + workers - 1) / workers;
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t b = w * block;
    const std::int64_t e = std::min(n, b + block);
    if (b < e) pool.emplace_back(run, b, e);
  }
  for (auto& th : pool) th.join();
}

/// n draws of f(stream) collected by replicate index.
template <class T, class F>
std::vector<T> replicate(std::int64_t n, std::uint64_t seed, F&& f) {
  if (n < 1) throw DomainError("replicate: n_samples must be >= 1");
  std::vector<T> out(static_cast<std::size_t>(n));
  for_each_replicate(n, seed, [&](std::int64_t i, Stream& g) { out[static_cast<std::size_t>(i)] = f(g); });
  return out;
}

struct EmpiricalDist {
  ProcessSpec spec;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::int64_t n_samples = 0;
  std::map<std::int64_t, std::int64_t> counts;

  [[nodiscard]] double frequency(std::int64_t m) const {
    const auto it = counts.find(m);
    return it == counts.end() ? 0.0
                              : static_cast<double>(it->second) / static_cast<double>(n_samples);
  }
  friend bool operator==(const EmpiricalDist&, const EmpiricalDist&) = default;
};

inline EmpiricalDist make_empirical(const ProcessSpec& spec, double t, std::uint64_t seed,
                                    const std::vector<std::int64_t>& draws) {
  EmpiricalDist e{spec, t, seed, static_cast<std::int64_t>(draws.size()), {}};
  for (auto x : draws) ++e.counts[x];
  return e;
}

/// Terminal values X(t) of n independent replicates of an integer-valued family.
inline EmpiricalDist estimate_pmf(const ProcessSpec& spec, double t, std::int64_t n_samples,
                                  std::uint64_t seed) {
  validate(spec);
  if (!is_integer_valued(spec)) throw UnsupportedFamily("estimate_pmf: needs an integer-valued family");
  if (!(t > 0.0)) throw DomainError("estimate_pmf: t must be positive");
  const auto draws = replicate<std::int64_t>(
      n_samples, seed, [&](Stream& g) { return sample_terminal_count(spec, t, g); });
  return make_empirical(spec, t, seed, draws);
}

// ---------------------------------------------------------------------------
// Goodness of fit

struct Comparison {
  double tv_distance = 0.0;
  double chi2_stat = 0.0;
  std::int64_t chi2_dof = 0;
  double chi2_pvalue = 1.0;
};

/// Upper tail of the chi-square law.
inline double chi2_sf(double x, double dof) {
  if (dof <= 0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

/// TV distance and pooled chi-square test of emp against table. Mass outside
/// the table's window forms one overflow cell with probability 1 - sum(table).
inline Comparison compare(const EmpiricalDist& emp, const PmfTable& table) {
  if (table.truncation_bound > 1e-3) {
    throw CoverageError("compare: table misses up to " + std::to_string(table.truncation_bound) +
                        " of the mass");
  }
  if (emp.n_samples < 1) throw DomainError("compare: empty sample");
  const double n = static_cast<double>(emp.n_samples);
  const double inside = std::min(1.0, table.total());
  const double p_over = std::max(0.0, 1.0 - inside);
  std::int64_t c_over = 0;
  for (const auto& [x, c] : emp.counts) {
    if (x < table.m_lo || x > table.m_hi) c_over += c;
  }

  Comparison out;
  CompensatedSum tv;
  for (std::int64_t m = table.m_lo; m <= table.m_hi; ++m) {
    tv.add(std::abs(emp.frequency(m) - table.at(m)));
  }
  tv.add(std::abs(static_cast<double>(c_over) / n - p_over));
  out.tv_distance = 0.5 * tv.value();

  // Pool consecutive cells until each expects at least 5 draws.
  std::vector<std::pair<double, double>> cells;  // (expected, observed)
  double e_acc = 0.0;
  double o_acc = 0.0;
  for (std::int64_t m = table.m_lo; m <= table.m_hi; ++m) {
    e_acc += n * table.at(m);
    const auto it = emp.counts.find(m);
    o_acc += it == emp.counts.end() ? 0.0 : static_cast<double>(it->second);
    if (e_acc >= 5.0) {
      cells.emplace_back(e_acc, o_acc);
      e_acc = 0.0;
      o_acc = 0.0;
    }
  }
  e_acc += n * p_over;
  o_acc += static_cast<double>(c_over);
  if (e_acc >= 5.0 || cells.empty()) {
    cells.emplace_back(e_acc, o_acc);
  } else {
    cells.back().first += e_acc;
    cells.back().second += o_acc;
  }
  double stat = 0.0;
  for (const auto& [e, o] : cells) {
    if (e > 0.0) {
      stat += (o - e) * (o - e) / e;
    } else if (o > 0.0) {
      stat = std::numeric_limits<double>::infinity();
    }
  }
  out.chi2_stat = stat;
  out.chi2_dof = static_cast<std::int64_t>(cells.size()) - 1;
  out.chi2_pvalue = std::isfinite(stat) ? chi2_sf(stat, static_cast<double>(out.chi2_dof)) : 0.0;
  return out;
}

/// Sample n draws from a table (overflow mass is drawn as m_hi + 1).
inline EmpiricalDist sample_from_table(const PmfTable& table, std::int64_t n, std::uint64_t seed) {
  std::vector<double> cdf(table.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = (acc += table.probs[i]);
  const auto draws = replicate<std::int64_t>(n, seed, [&](Stream& g) {
    const double u = uniform_closed_open(g);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return table.m_lo + static_cast<std::int64_t>(it - cdf.begin());
  });
  return make_empirical(table.spec, table.t, seed, draws);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// Kolmogorov survival function Q(x) = 2 sum_j (-1)^(j-1) exp(-2 j^2 x^2).
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Asymptotic p-value with the usual small-sample correction of the argument.
inline double ks_pvalue(double d, double n_eff) {
  const double r = std::sqrt(n_eff);
  return kolmogorov_q((r + 0.12 + 0.11 / r) * d);
}

/// Two-sample test. Ties are handled by stepping through equal values together,
/// which makes the test conservative for discrete data.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_pvalue(d, na * nb / (na + nb))};
}

/// One-sample test against the uniform law on [0, 1].
inline KsResult ks_uniform(std::vector<double> u) {
  if (u.empty()) throw DomainError("ks_uniform: empty sample");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = std::clamp(u[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return {d, ks_pvalue(d, n)};
}

// ---------------------------------------------------------------------------
// Moments, covariances, transitions

struct MomentEstimate {
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
};

inline MomentEstimate sample_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw DomainError("sample_moments: needs at least two values");
  CompensatedSum s;
  for (double v : x) s.add(v);
  const double mean = s.value() / n;
  CompensatedSum s2;
  CompensatedSum s4;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    s2.add(d);
    s4.add(d * d);
  }
  const double var = s2.value() / (n - 1.0);
  const double m4 = s4.value() / n;
  return {mean, std::sqrt(var / n), var, std::sqrt(std::max(0.0, m4 - var * var) / n)};
}

/// Mean and variance of X(t) (or its running average) from n replicates.
inline MomentEstimate estimate_moments(const ProcessSpec& spec, double t, std::int64_t n_samples,
                                       std::uint64_t seed) {
  validate(spec);
  if (!(t > 0.0)) throw DomainError("estimate_moments: t must be positive");
  return sample_moments(
      replicate<double>(n_samples, seed, [&](Stream& g) { return sample_terminal_real(spec, t, g); }));
}

struct CovarianceEstimate {
  double covariance = 0.0;
  double covariance_se = 0.0;
  double correlation = 0.0;
};

/// Cov[X(s), X(t)] from n simulated paths; running averages are computed
/// pathwise. Families with exact path simulation only.
inline CovarianceEstimate estimate_covariance(const ProcessSpec& spec, double s, double t,
                                              std::int64_t n_samples, std::uint64_t seed) {
  validate(spec);
  if (!(s > 0.0) || s > t) throw DomainError("estimate_covariance: needs 0 < s <= t");
  struct Pair {
    double a = 0.0;
    double b = 0.0;
  };
  const auto pairs = replicate<Pair>(n_samples, seed, [&](Stream& g) -> Pair {
    if (const auto* r = std::get_if<RunningAvgPPoK>(&spec)) {
      const auto p = simulate_ppok(r->k, r->lambda, t, g);
      return {running_average(p, s), running_average(p, t)};
    }
    if (const auto* r = std::get_if<RunningAvgSPoK>(&spec)) {
      const auto p = simulate_skellam_type(SPoK{r->k, r->lambda1, r->lambda2}, t, g);
      return {running_average(p, s), running_average(p, t)};
    }
    const auto p = std::holds_alternative<PPoK>(spec)
                       ? simulate_ppok(std::get<PPoK>(spec).k, std::get<PPoK>(spec).lambda, t, g)
                       : simulate_skellam_type(spec, t, g);
    return {static_cast<double>(p.value_at(s)), static_cast<double>(p.value_at(t))};
  });
  const double n = static_cast<double>(pairs.size());
  double ma = 0.0;
  double mb = 0.0;
  for (const auto& p : pairs) {
    ma += p.a;
    mb += p.b;
  }
  ma /= n;
  mb /= n;
  CompensatedSum c;
  CompensatedSum c2;
  CompensatedSum va;
  CompensatedSum vb;
  for (const auto& p : pairs) {
    const double z = (p.a - ma) * (p.b - mb);
    c.add(z);
    c2.add(z * z);
    va.add((p.a - ma) * (p.a - ma));
    vb.add((p.b - mb) * (p.b - mb));
  }
  const double cov = c.value() / (n - 1.0);
  const double se = std::sqrt(std::max(0.0, c2.value() / n - cov * cov) / n);
  return {cov, se, c.value() / std::sqrt(va.value() * vb.value())};
}

struct Frequency {
  double frequency = 0.0;
  double standard_error = 0.0;
};

/// Frequencies of the increment X(t + delta) - X(t). Stationary independent
/// increments make this the law of X(delta), whatever t is.
inline std::map<std::int64_t, Frequency> estimate_transition(const ProcessSpec& spec, double t,
                                                             double delta, std::int64_t n_samples,
                                                             std::uint64_t seed) {
  if (!std::holds_alternative<Skellam>(spec) && !std::holds_alternative<SPoK>(spec)) {
    throw UnsupportedFamily("estimate_transition: needs skellam or spok");
  }
  validate(spec);
  if (!(delta > 0.0) || !(t >= 0.0)) throw DomainError("estimate_transition: needs delta > 0, t >= 0");
  const auto e = estimate_pmf(spec, delta, n_samples, seed);
  std::map<std::int64_t, Frequency> out;
  const double n = static_cast<double>(n_samples);
  for (const auto& [x, c] : e.counts) {
    const double f = static_cast<double>(c) / n;
    out[x] = {f, std::sqrt(f * (1.0 - f) / n)};
  }
  return out;
}

/// Empirical E[exp(-s D(dt))] with its standard error.
inline McEstimate estimate_laplace(const SubordinatorSpec& sub, double dt, double s,
                                   std::int64_t n_samples, std::uint64_t seed) {
  validate(sub);
  const auto v = replicate<double>(n_samples, seed,
                                   [&](Stream& g) { return std::exp(-s * sample_increment(sub, dt, g)); });
  const auto m = sample_moments(v);
  return {m.mean, m.mean_se};
}

/// Subordinator increments D(dt), n draws.
inline std::vector<double> sample_subordinator(const SubordinatorSpec& sub, double dt,
                                               std::int64_t n_samples, std::uint64_t seed) {
  validate(sub);
  return replicate<double>(n_samples, seed, [&](Stream& g) { return sample_increment(sub, dt, g); });
}

}  // namespace skellamk
