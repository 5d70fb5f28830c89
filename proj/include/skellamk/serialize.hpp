#pragma once

// JSON and CSV forms of specs, tables, measures, samples and paths. Every
// writer has a matching reader that restores the object exactly: doubles are
// written in their shortest round-trip decimal form.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skellamk/errors.hpp"
#include "skellamk/levy.hpp"
#include "skellamk/montecarlo.hpp"
#include "skellamk/pmf_table.hpp"
#include "skellamk/process.hpp"
#include "skellamk/subordinators.hpp"
#include "skellamk/trajectory.hpp"

namespace skellamk {

using Json = nlohmann::json;

/// Shortest decimal string that parses back to x.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw DomainError("not a number: '" + s + "'");
  return x;
}

inline std::int64_t parse_int(const std::string& s) {
  std::int64_t x = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw DomainError("not an integer: '" + s + "'");
  return x;
}

// ---------------------------------------------------------------------------
// Specs as flat parameter maps: k, l (or l1), l1, l2, alpha, alpha1, alpha2,
// mu, mu1, mu2; the time-changed family adds sub=<clock> and sub_* keys.

using ParamMap = std::map<std::string, std::string>;

/// Parses "k=2,l1=1,l2=0.5".
inline ParamMap parse_params(const std::string& text) {
  ParamMap out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("bad parameter '" + item + "'");
    const auto key = item.substr(0, eq);
    if (out.count(key)) throw DomainError("repeated parameter '" + key + "'");
    out[key] = item.substr(eq + 1);
  }
  return out;
}

namespace detail {

class ParamReader {
 public:
  explicit ParamReader(const ParamMap& p) : p_(p) {}

  double real(const std::string& key) {
    used_.insert(key);
    const auto it = p_.find(key);
    if (it == p_.end()) throw DomainError("missing parameter '" + key + "'");
    return parse_double(it->second);
  }
  /// First present key of an alias group.
  double real(std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (p_.count(k)) {
        for (const char* other : keys) {
          if (other != k && p_.count(other)) {
            throw DomainError(std::string("parameters '") + k + "' and '" + other + "' are aliases");
          }
        }
        return real(std::string(k));
      }
    }
    throw DomainError(std::string("missing parameter '") + *keys.begin() + "'");
  }
  int integer(const std::string& key) {
    const double v = real(key);
    if (v != std::floor(v) || v < 1 || v > 1e6) throw DomainError("'" + key + "' must be a positive integer");
    return static_cast<int>(v);
  }
  std::string text(const std::string& key) {
    used_.insert(key);
    const auto it = p_.find(key);
    if (it == p_.end()) throw DomainError("missing parameter '" + key + "'");
    return it->second;
  }
  void finish(const std::string& family) const {
    for (const auto& [k, v] : p_) {
      if (!used_.count(k)) throw DomainError("unknown parameter '" + k + "' for " + family);
    }
  }

 private:
  const ParamMap& p_;
  std::set<std::string> used_;
};

inline SubordinatorSpec subordinator_from(ParamReader& r) {
  const auto name = r.text("sub");
  if (name == "gamma") return GammaSubordinator{r.real("sub_p"), r.real("sub_alpha")};
  if (name == "tempered_stable") {
    return TemperedStableSubordinator{r.real("sub_alpha"), r.real("sub_mu")};
  }
  if (name == "inverse_gaussian") {
    return InverseGaussianSubordinator{r.real("sub_gamma"), r.real("sub_delta")};
  }
  if (name == "stable") return StableSubordinator{r.real("sub_alpha")};
  throw DomainError("unknown subordinator '" + name + "'");
}

}  // namespace detail

/// Builds and validates a spec from a family name and parameter map.
inline ProcessSpec spec_from_params(const std::string& family, const ParamMap& params) {
  detail::ParamReader r(params);
  ProcessSpec spec;
  if (family == "skellam") {
    spec = Skellam{r.real("l1"), r.real("l2")};
  } else if (family == "ppok") {
    spec = PPoK{r.integer("k"), r.real({"l", "l1"})};
  } else if (family == "spok") {
    spec = SPoK{r.integer("k"), r.real("l1"), r.real("l2")};
  } else if (family == "ra-ppok") {
    spec = RunningAvgPPoK{r.integer("k"), r.real({"l", "l1"})};
  } else if (family == "ra-spok") {
    spec = RunningAvgSPoK{r.integer("k"), r.real("l1"), r.real("l2")};
  } else if (family == "sfpp") {
    spec = SFPP{r.real("alpha"), r.real({"l", "l1"})};
  } else if (family == "tsfpp") {
    spec = TSFPP{r.real("alpha"), r.real("mu"), r.real({"l", "l1"})};
  } else if (family == "sfsp") {
    spec = SFSP{r.real("alpha1"), r.real("alpha2"), r.real("l1"), r.real("l2")};
  } else if (family == "tsfsp") {
    spec = TSFSP{r.real("alpha1"), r.real("mu1"), r.real("alpha2"),
                 r.real("mu2"),    r.real("l1"),  r.real("l2")};
  } else if (family == "tcspok") {
    spec = TimeChangedSPoK{r.integer("k"), r.real("l1"), r.real("l2"), detail::subordinator_from(r)};
  } else {
    throw DomainError("unknown process '" + family + "'");
  }
  r.finish(family);
  validate(spec);
  return spec;
}

inline Json to_json(const SubordinatorSpec& sub) {
  return std::visit(
      Overloaded{[](const GammaSubordinator& s) {
                   return Json{{"family", "gamma"}, {"p", s.p}, {"alpha", s.alpha}};
                 },
                 [](const TemperedStableSubordinator& s) {
                   return Json{{"family", "tempered_stable"}, {"alpha", s.alpha}, {"mu", s.mu}};
                 },
                 [](const InverseGaussianSubordinator& s) {
                   return Json{{"family", "inverse_gaussian"}, {"gamma", s.gamma}, {"delta", s.delta}};
                 },
                 [](const StableSubordinator& s) {
                   return Json{{"family", "stable"}, {"alpha", s.alpha}};
                 }},
      sub);
}

inline SubordinatorSpec subordinator_from_json(const Json& j) {
  const auto name = j.at("family").get<std::string>();
  SubordinatorSpec s;
  if (name == "gamma") {
    s = GammaSubordinator{j.at("p").get<double>(), j.at("alpha").get<double>()};
  } else if (name == "tempered_stable") {
    s = TemperedStableSubordinator{j.at("alpha").get<double>(), j.at("mu").get<double>()};
  } else if (name == "inverse_gaussian") {
    s = InverseGaussianSubordinator{j.at("gamma").get<double>(), j.at("delta").get<double>()};
  } else if (name == "stable") {
    s = StableSubordinator{j.at("alpha").get<double>()};
  } else {
    throw DomainError("unknown subordinator '" + name + "'");
  }
  validate(s);
  return s;
}

inline Json to_json(const ProcessSpec& spec) {
  Json j = std::visit(
      Overloaded{
          [](const Skellam& s) { return Json{{"l1", s.lambda1}, {"l2", s.lambda2}}; },
          [](const PPoK& s) { return Json{{"k", s.k}, {"l", s.lambda}}; },
          [](const SPoK& s) { return Json{{"k", s.k}, {"l1", s.lambda1}, {"l2", s.lambda2}}; },
          [](const RunningAvgPPoK& s) { return Json{{"k", s.k}, {"l", s.lambda}}; },
          [](const RunningAvgSPoK& s) {
            return Json{{"k", s.k}, {"l1", s.lambda1}, {"l2", s.lambda2}};
          },
          [](const SFPP& s) { return Json{{"alpha", s.alpha}, {"l", s.lambda}}; },
          [](const TSFPP& s) { return Json{{"alpha", s.alpha}, {"mu", s.mu}, {"l", s.lambda}}; },
          [](const SFSP& s) {
            return Json{{"alpha1", s.alpha1}, {"alpha2", s.alpha2}, {"l1", s.lambda1}, {"l2", s.lambda2}};
          },
          [](const TSFSP& s) {
            return Json{{"alpha1", s.alpha1}, {"mu1", s.mu1}, {"alpha2", s.alpha2},
                        {"mu2", s.mu2},       {"l1", s.lambda1}, {"l2", s.lambda2}};
          },
          [](const TimeChangedSPoK& s) {
            return Json{{"k", s.k}, {"l1", s.lambda1}, {"l2", s.lambda2}, {"sub", to_json(s.sub)}};
          }},
      spec);
  j["family"] = family_name(spec);
  return j;
}

inline ProcessSpec spec_from_json(const Json& j) {
  const auto family = j.at("family").get<std::string>();
  ParamMap p;
  std::optional<SubordinatorSpec> sub;
  for (const auto& [key, value] : j.items()) {
    if (key == "family") continue;
    if (key == "sub") {
      sub = subordinator_from_json(value);
      continue;
    }
    if (!value.is_number()) throw DomainError("parameter '" + key + "' must be a number");
    p[key] = format_double(value.get<double>());
  }
  if (family == "tcspok") {
    if (!sub) throw DomainError("tcspok needs a 'sub' object");
    detail::ParamReader r(p);
    TimeChangedSPoK s{r.integer("k"), r.real("l1"), r.real("l2"), *sub};
    r.finish(family);
    validate(s);
    return s;
  }
  if (sub) throw DomainError("'sub' is only valid for tcspok");
  return spec_from_params(family, p);
}

// ---------------------------------------------------------------------------
// Tables, measures, samples

inline Json to_json(const PmfTable& t) {
  return Json{{"spec", to_json(t.spec)},
              {"t", t.t},
              {"m_lo", t.m_lo},
              {"m_hi", t.m_hi},
              {"probs", t.probs},
              {"truncation_bound", t.truncation_bound},
              {"form", t.form},
              {"clamped", t.clamped},
              {"nonnegative_support", t.nonnegative_support}};
}

inline PmfTable pmf_table_from_json(const Json& j) {
  PmfTable t;
  t.spec = spec_from_json(j.at("spec"));
  t.t = j.at("t").get<double>();
  t.m_lo = j.at("m_lo").get<std::int64_t>();
  t.m_hi = j.at("m_hi").get<std::int64_t>();
  t.probs = j.at("probs").get<std::vector<double>>();
  t.truncation_bound = j.at("truncation_bound").get<double>();
  t.form = j.value("form", std::string("default"));
  t.clamped = j.value("clamped", std::int64_t{0});
  t.nonnegative_support = j.value("nonnegative_support", false);
  if (static_cast<std::int64_t>(t.probs.size()) != t.m_hi - t.m_lo + 1) {
    throw DomainError("pmf table: probs length does not match [m_lo, m_hi]");
  }
  return t;
}

inline Json to_json(const LevyMeasure& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms) atoms.push_back(Json::array({a.location, a.mass}));
  return Json{{"atoms", atoms}, {"truncation_bound", m.truncation_bound}};
}

inline LevyMeasure levy_measure_from_json(const Json& j) {
  LevyMeasure m;
  for (const auto& a : j.at("atoms")) m.atoms.push_back({a.at(0).get<std::int64_t>(), a.at(1).get<double>()});
  m.truncation_bound = j.at("truncation_bound").get<double>();
  return m;
}

inline Json to_json(const EmpiricalDist& e) {
  Json counts = Json::array();
  for (const auto& [x, c] : e.counts) counts.push_back(Json::array({x, c}));
  return Json{{"spec", to_json(e.spec)},
              {"t", e.t},
              {"seed", e.seed},
              {"n_samples", e.n_samples},
              {"counts", counts}};
}

inline EmpiricalDist empirical_from_json(const Json& j) {
  EmpiricalDist e;
  e.spec = spec_from_json(j.at("spec"));
  e.t = j.at("t").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.n_samples = j.at("n_samples").get<std::int64_t>();
  for (const auto& c : j.at("counts")) e.counts[c.at(0).get<std::int64_t>()] = c.at(1).get<std::int64_t>();
  return e;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

inline void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!next_line(in, line) || line != header) throw DomainError("csv: expected header '" + header + "'");
}

}  // namespace detail

/// Path as "t,value": a row at t = 0, one per jump epoch, and a final row at T.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& p) {
  out << "t,value\n";
  out << "0," << p.initial_value << '\n';
  for (std::size_t i = 0; i < p.epochs.size(); ++i) {
    out << format_double(p.epochs[i]) << ',' << p.values[i] << '\n';
  }
  out << format_double(p.horizon) << ',' << p.terminal() << '\n';
}

inline Trajectory read_trajectory_csv(std::istream& in) {
  detail::expect_header(in, "t,value");
  std::vector<std::pair<double, std::int64_t>> rows;
  std::string line;
  while (detail::next_line(in, line)) {
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2) throw DomainError("trajectory csv: bad row '" + line + "'");
    rows.emplace_back(parse_double(cells[0]), parse_int(cells[1]));
  }
  if (rows.size() < 2 || rows.front().first != 0.0) {
    throw DomainError("trajectory csv: needs a row at t = 0 and a final row");
  }
  Trajectory p;
  p.initial_value = rows.front().second;
  p.horizon = rows.back().first;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    p.epochs.push_back(rows[i].first);
    p.values.push_back(rows[i].second);
  }
  if (p.terminal() != rows.back().second) throw DomainError("trajectory csv: final row disagrees with path");
  return p;
}

/// Real-valued samples on a grid, "t,value".
inline void write_grid_csv(std::ostream& out, const std::vector<std::pair<double, double>>& rows) {
  out << "t,value\n";
  for (const auto& [t, v] : rows) out << format_double(t) << ',' << format_double(v) << '\n';
}

inline std::vector<std::pair<double, double>> read_grid_csv(std::istream& in) {
  detail::expect_header(in, "t,value");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (detail::next_line(in, line)) {
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2) throw DomainError("grid csv: bad row '" + line + "'");
    rows.emplace_back(parse_double(cells[0]), parse_double(cells[1]));
  }
  return rows;
}

/// Table as "m,p" rows, preceded by a "# {...}" line with the remaining fields.
inline void write_pmf_csv(std::ostream& out, const PmfTable& t) {
  Json meta = to_json(t);
  meta.erase("probs");
  out << "# " << meta.dump() << '\n';
  out << "m,p\n";
  for (std::int64_t m = t.m_lo; m <= t.m_hi; ++m) out << m << ',' << format_double(t.at(m)) << '\n';
}

inline PmfTable read_pmf_csv(std::istream& in) {
  std::string line;
  if (!detail::next_line(in, line) || line.rfind("# ", 0) != 0) throw DomainError("pmf csv: missing metadata line");
  Json meta = Json::parse(line.substr(2));
  detail::expect_header(in, "m,p");
  std::vector<double> probs;
  std::int64_t expect = meta.at("m_lo").get<std::int64_t>();
  while (detail::next_line(in, line)) {
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2 || parse_int(cells[0]) != expect) throw DomainError("pmf csv: bad row '" + line + "'");
    probs.push_back(parse_double(cells[1]));
    ++expect;
  }
  meta["probs"] = probs;
  return pmf_table_from_json(meta);
}

/// Levy atoms as "location,mass" rows after a "# {...}" line.
inline void write_levy_csv(std::ostream& out, const LevyMeasure& m) {
  out << "# " << Json{{"truncation_bound", m.truncation_bound}}.dump() << '\n';
  out << "location,mass\n";
  for (const auto& a : m.atoms) out << a.location << ',' << format_double(a.mass) << '\n';
}

inline LevyMeasure read_levy_csv(std::istream& in) {
  std::string line;
  if (!detail::next_line(in, line) || line.rfind("# ", 0) != 0) throw DomainError("levy csv: missing metadata line");
  LevyMeasure m;
  m.truncation_bound = Json::parse(line.substr(2)).at("truncation_bound").get<double>();
  detail::expect_header(in, "location,mass");
  while (detail::next_line(in, line)) {
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2) throw DomainError("levy csv: bad row '" + line + "'");
    m.atoms.push_back({parse_int(cells[0]), parse_double(cells[1])});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string command = "pmf";
  ProcessSpec spec = Skellam{};
  double t = 1.0;
  std::int64_t n_samples = 100000;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  std::string out;
  /// csv or json; empty picks the command default.
  std::string format;
  /// pmf: "default" or "closed".
  std::string form = "default";
  /// levy and govern: terms kept.
  int truncation = 200;
  /// moments: covariance at s (default t/2).
  std::optional<double> s;
  /// govern: window and step (0 = default).
  std::optional<std::pair<std::int64_t, std::int64_t>> window;
  double dt = 0.0;
  /// verify / govern thresholds.
  double tv_max = 0.01;
  double p_min = 0.01;
  double residual_max = 1e-5;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline Json to_json(const RunConfig& c) {
  Json j{{"command", c.command},   {"spec", to_json(c.spec)}, {"t", c.t},
         {"n_samples", c.n_samples}, {"seed", c.seed},        {"tol", c.tol},
         {"out", c.out},           {"format", c.format},      {"form", c.form},
         {"truncation", c.truncation}, {"dt", c.dt},          {"tv_max", c.tv_max},
         {"p_min", c.p_min},       {"residual_max", c.residual_max}};
  if (c.s) j["s"] = *c.s;
  if (c.window) j["window"] = Json::array({c.window->first, c.window->second});
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  static const std::set<std::string> known{"command", "spec",   "t",         "n_samples", "seed",
                                           "tol",     "out",    "format",    "form",      "truncation",
                                           "dt",      "tv_max", "p_min",     "residual_max", "s",
                                           "window"};
  for (const auto& [key, v] : j.items()) {
    if (!known.count(key)) throw DomainError("config: unknown key '" + key + "'");
  }
  RunConfig c;
  c.command = j.value("command", c.command);
  if (j.contains("spec")) c.spec = spec_from_json(j.at("spec"));
  c.t = j.value("t", c.t);
  c.n_samples = j.value("n_samples", c.n_samples);
  c.seed = j.value("seed", c.seed);
  c.tol = j.value("tol", c.tol);
  c.out = j.value("out", c.out);
  c.format = j.value("format", c.format);
  c.form = j.value("form", c.form);
  c.truncation = j.value("truncation", c.truncation);
  c.dt = j.value("dt", c.dt);
  c.tv_max = j.value("tv_max", c.tv_max);
  c.p_min = j.value("p_min", c.p_min);
  c.residual_max = j.value("residual_max", c.residual_max);
  if (j.contains("s")) c.s = j.at("s").get<double>();
  if (j.contains("window")) {
    c.window = std::make_pair(j.at("window").at(0).get<std::int64_t>(),
                              j.at("window").at(1).get<std::int64_t>());
  }
  return c;
}

}  // namespace skellamk
