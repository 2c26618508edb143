#pragma once

// Command implementations behind the `escrk` executable. Each command writes
// plain text or CSV to a stream so it can be exercised without a process
// boundary.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "escrk/analysis.hpp"
#include "escrk/experiments.hpp"
#include "escrk/method_catalog.hpp"

namespace escrk::harness {

/// Bad invocation or configuration; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shortest round-trip scientific representation.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
  return std::string(buf, res.ptr);
}

[[nodiscard]] inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

enum class Problem { oscillator, peridynamics, maxwell };

[[nodiscard]] inline Problem parse_problem(std::string_view name) {
  if (name == "oscillator") return Problem::oscillator;
  if (name == "peridynamics") return Problem::peridynamics;
  if (name == "maxwell") return Problem::maxwell;
  throw UsageError("unknown problem '" + std::string(name) + "' (expected oscillator, peridynamics or maxwell)");
}

[[nodiscard]] inline std::string_view problem_name(Problem p) {
  switch (p) {
    case Problem::oscillator:
      return "oscillator";
    case Problem::peridynamics:
      return "peridynamics";
    case Problem::maxwell:
      return "maxwell";
  }
  return "?";
}

struct ExperimentConfig {
  std::optional<Problem> problem;
  std::vector<std::string> methods;
  std::vector<std::size_t> resolutions;
  std::optional<double> courant;
  std::optional<double> T;
  std::size_t record_every = 1;
  std::optional<std::size_t> iterations;
  Landing landing = Landing::shorten_last;
  problems::FdtdStart fdtd_start = problems::FdtdStart::zero;
  std::string out;
};

namespace detail {

[[nodiscard]] inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
[[nodiscard]] T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw UsageError("invalid value '" + t + "' for " + std::string(key));
  }
  return value;
}

[[nodiscard]] inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Splits a method list on commas outside parentheses, so that
/// "RK(4,4,5),RK(7,4,11)" yields two names.
[[nodiscard]] inline std::vector<std::string> split_methods(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '(') ++depth;
    if (i < s.size() && s[i] == ')') --depth;
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      auto piece = detail::trim(s.substr(start, i - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = i + 1;
    }
  }
  return out;
}

/// Reads `key = value` lines; `#` starts a comment.
[[nodiscard]] inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    kv[detail::trim(std::string_view(text).substr(0, eq))] = detail::trim(std::string_view(text).substr(eq + 1));
  }
  return kv;
}

/// Applies recognised keys onto `cfg`; unknown keys are rejected.
inline void apply_key_values(const std::map<std::string, std::string>& kv, ExperimentConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "problem") {
      cfg.problem = parse_problem(value);
    } else if (key == "method") {
      cfg.methods = split_methods(value);
    } else if (key == "resolutions" || key == "nx" || key == "nt") {
      cfg.resolutions.clear();
      for (const auto& piece : detail::split(value, ',')) {
        cfg.resolutions.push_back(detail::parse_number<std::size_t>(piece, key));
      }
    } else if (key == "courant") {
      cfg.courant = detail::parse_number<double>(value, key);
    } else if (key == "T") {
      cfg.T = detail::parse_number<double>(value, key);
    } else if (key == "record_every" || key == "record-every") {
      cfg.record_every = detail::parse_number<std::size_t>(value, key);
    } else if (key == "iterations") {
      cfg.iterations = detail::parse_number<std::size_t>(value, key);
    } else if (key == "landing") {
      if (value == "shorten") {
        cfg.landing = Landing::shorten_last;
      } else if (value == "overshoot") {
        cfg.landing = Landing::overshoot;
      } else {
        throw UsageError("landing must be 'shorten' or 'overshoot'");
      }
    } else if (key == "fdtd_start" || key == "fdtd-start") {
      if (value == "zero") {
        cfg.fdtd_start = problems::FdtdStart::zero;
      } else if (value == "half_step") {
        cfg.fdtd_start = problems::FdtdStart::half_step;
      } else {
        throw UsageError("fdtd_start must be 'zero' or 'half_step'");
      }
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  ExperimentConfig cfg;
  apply_key_values(parse_key_values(in), cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// methods

inline void cmd_methods_list(std::ostream& os) {
  os << "name,s,p,r,lambda,b_sm1\n";
  for (const auto& m : catalog()) {
    const auto& prof = m.profile;
    os << '"' << m.name << "\"," << m.stages() << ',' << prof.p << ',' << prof.r << ','
       << (prof.lambda ? format_double(*prof.lambda) : std::string("-")) << ','
       << format_double(prof.coefficient(m.stages() - 1)) << '\n';
  }
}

inline void cmd_methods_show(std::string_view name, std::ostream& os) {
  const auto* m = find_method(name);
  if (!m) throw UsageError("unknown method '" + std::string(name) + "'");
  const auto& prof = m->profile;
  os << "method " << m->name << "\n";
  os << "s = " << m->stages() << ", p = " << prof.p << ", r = " << prof.r << ", m = " << prof.m << "\n";
  os << "strongly stable: " << (prof.strongly_stable ? "yes" : "no");
  if (prof.lambda) os << " (h*||L|| <= " << format_double(*prof.lambda) << ")";
  os << "\n";
  const auto a = m->coefficients.values();
  for (std::size_t k = 0; k < a.size(); ++k) os << "a_" << k << " = " << format_double(a[k]) << "\n";
  for (std::size_t k = 1; k <= prof.b.size(); ++k) os << "b_" << k << " = " << format_double(prof.coefficient(k)) << "\n";
  const auto c = stage_ratios(m->coefficients);
  for (std::size_t j = 1; j <= c.size(); ++j) os << "c_" << j << " = " << format_double(c[j - 1]) << "\n";
}

// ---------------------------------------------------------------------------
// derive

/// Prints every root of the interior energy equations with its recomputed
/// properties and any catalog entry it reproduces. Returns the root count.
inline std::size_t cmd_derive(long s, long p, std::ostream& os) {
  if (p < 2 || p % 2 != 0) throw UsageError("derive: p must be even and >= 2");
  if (s <= p || s > p + 3) throw UsageError("derive: need p < s <= p + 3");
  const auto res = solve_esc(static_cast<std::size_t>(s), static_cast<std::size_t>(p));
  os << "derive s=" << s << " p=" << p << ": " << res.roots.size() << " root(s)\n";
  std::size_t idx = 0;
  for (const auto& a : res.roots) {
    const auto prof = energy_profile(a);
    os << "root " << ++idx << ": p=" << prof.p << " r=" << prof.r;
    if (prof.lambda) os << " lambda=" << format_double(*prof.lambda);
    os << "\n";
    for (std::size_t k = static_cast<std::size_t>(p) + 1; k <= a.stages(); ++k) {
      os << "  a_" << k << " = " << format_double(a[k]) << "\n";
    }
    for (const auto& m : catalog()) {
      if (m.stages() != a.stages()) continue;
      double dist = 0.0;
      for (std::size_t k = 0; k <= a.stages(); ++k) dist = std::max(dist, std::abs(m.coefficients[k] - a[k]));
      if (dist < 1e-9) os << "  matches " << m.name << " (max |da| = " << format_double(dist) << ")\n";
    }
  }
  for (const auto& d : res.diagnostics) os << "# " << d << "\n";
  return res.roots.size();
}

// ---------------------------------------------------------------------------
// convergence

struct ProblemDefaults {
  problems::OscillatorSpec oscillator;
  problems::PeridynamicsSpec peridynamics;
  problems::MaxwellSpec maxwell;
};

[[nodiscard]] inline StudyPoint run_point(Problem problem, const std::string& method_name, std::size_t n,
                                          const ExperimentConfig& cfg, const ProblemDefaults& defaults = {}) {
  switch (problem) {
    case Problem::oscillator: {
      auto spec = defaults.oscillator;
      if (cfg.T) spec.T = *cfg.T;
      return oscillator_study(method(method_name), spec, n);
    }
    case Problem::peridynamics: {
      auto spec = defaults.peridynamics;
      if (cfg.T) spec.T = *cfg.T;
      return peridynamics_study(method(method_name), spec, n, cfg.landing);
    }
    case Problem::maxwell: {
      auto spec = defaults.maxwell;
      if (cfg.T) spec.T = *cfg.T;
      if (method_name == "fdtd") return fdtd_study(spec, n, cfg.courant.value_or(1.0), cfg.fdtd_start).point;
      return maxwell_study(method(method_name), spec, n, cfg.courant);
    }
  }
  throw std::logic_error("run_point: unhandled problem");
}

inline void validate_for_study(const ExperimentConfig& cfg) {
  if (!cfg.problem) throw UsageError("no problem given");
  if (cfg.methods.size() != 1) throw UsageError("exactly one method is required");
  if (cfg.resolutions.empty()) throw UsageError("no resolutions given");
  const auto& name = cfg.methods.front();
  if (name == "fdtd") {
    if (*cfg.problem != Problem::maxwell) throw UsageError("fdtd is only available for maxwell");
  } else if (!find_method(name)) {
    throw UsageError("unknown method '" + name + "'");
  }
  for (std::size_t i = 1; i < cfg.resolutions.size(); ++i) {
    if (cfg.resolutions[i] != 2 * cfg.resolutions[i - 1]) {
      throw UsageError("resolutions must double from one entry to the next");
    }
  }
  if (cfg.resolutions.front() < 1) throw UsageError("resolutions must be positive");
}

inline void write_convergence_csv(const ConvergenceTable& table, std::ostream& os) {
  os << "N,eps1,order1,eps2,order2,epsInf,orderInf,epsE,orderE\n";
  for (const auto& r : table.rows) {
    if (r.unstable) {
      os << r.n << ",UNSTABLE,,,,,,,\n";
      continue;
    }
    os << r.n << ',' << format_double(r.eps1) << ',' << format_optional(r.order1) << ',' << format_double(r.eps2)
       << ',' << format_optional(r.order2) << ',' << format_double(r.eps_inf) << ',' << format_optional(r.order_inf)
       << ',' << format_double(r.eps_e) << ',' << format_optional(r.order_e) << '\n';
  }
}

/// Runs every resolution and writes the table. Unstable resolutions become
/// UNSTABLE rows.
inline ConvergenceTable cmd_convergence(const ExperimentConfig& cfg, std::ostream& os,
                                        const ProblemDefaults& defaults = {}) {
  validate_for_study(cfg);
  ConvergenceTable table;
  std::vector<StudyPoint> points;
  for (std::size_t n : cfg.resolutions) {
    points.push_back(run_point(*cfg.problem, cfg.methods.front(), n, cfg, defaults));
    table.rows.push_back(to_row(points.back()));
  }
  table = convergence_orders(std::move(table));
  write_convergence_csv(table, os);
  os << "# problem=" << problem_name(*cfg.problem) << " method=" << cfg.methods.front() << "\n";
  for (const auto& p : points) {
    os << "# N=" << p.n << " steps=" << p.steps << " dt=" << format_double(p.dt)
       << " t_final=" << format_double(p.final_time) << "\n";
  }
  return table;
}

// ---------------------------------------------------------------------------
// energy history

inline void write_energy_history_csv(const SimulationRecord& rec, std::ostream& os) {
  os << "step,time,energy,eps_E,abs_eps_E\n";
  const double e0 = rec.initial_energy;
  for (std::size_t i = 0; i < rec.energies.size(); ++i) {
    const double dev = relative_energy_deviation(e0, rec.energies[i]);
    os << rec.steps[i] << ',' << format_double(rec.times[i]) << ',' << format_double(rec.energies[i]) << ','
       << format_double(dev) << ',' << format_double(std::abs(dev)) << '\n';
  }
  try {
    const auto fit = energy_decay_fit(rec);
    os << "# fit log10|eps_E| = slope*log10(t) + intercept\n";
    os << "# slope=" << format_double(fit.slope) << " intercept=" << format_double(fit.intercept)
       << " samples=" << fit.samples << "\n";
  } catch (const std::exception& e) {
    os << "# fit unavailable: " << e.what() << "\n";
  }
}

/// Long-run energy record for one method. Oscillator runs use
/// resolutions.front() steps over T (default 1000); Maxwell runs use
/// resolutions.front() cells and `iterations` steps at the given Courant
/// number (default 0.5).
[[nodiscard]] inline SimulationRecord energy_history(const ExperimentConfig& cfg, const std::string& method_name,
                                                     const ProblemDefaults& defaults = {}) {
  if (!cfg.problem) throw UsageError("no problem given");
  if (cfg.resolutions.size() != 1) throw UsageError("energy-history takes exactly one resolution");
  if (cfg.record_every < 1) throw UsageError("record_every must be >= 1");
  const auto& m = method(method_name);
  switch (*cfg.problem) {
    case Problem::oscillator: {
      auto spec = defaults.oscillator;
      spec.T = cfg.T.value_or(1000.0);
      if (cfg.resolutions.front() < 1) throw UsageError("zero iterations");
      return oscillator_history(m, spec, cfg.resolutions.front(), cfg.record_every);
    }
    case Problem::maxwell: {
      const std::size_t iterations = cfg.iterations.value_or(0);
      if (iterations < 1) throw UsageError("zero iterations");
      return maxwell_history(m, defaults.maxwell, cfg.resolutions.front(), cfg.courant.value_or(0.5), iterations,
                             cfg.record_every);
    }
    case Problem::peridynamics:
      throw UsageError("energy-history supports oscillator and maxwell");
  }
  throw std::logic_error("energy_history: unhandled problem");
}

// ---------------------------------------------------------------------------
// stability region

inline void cmd_stability_region(std::string_view method_name, const ComplexWindow& window, std::size_t resolution,
                                 std::ostream& os) {
  const auto* m = find_method(method_name);
  if (!m) throw UsageError("unknown method '" + std::string(method_name) + "'");
  if (resolution < 16) throw UsageError("resolution must be >= 16");
  auto reg = stability_region(m->coefficients, window, resolution);
  order_by_angle(reg.boundary);
  os << "re,im\n";
  for (const auto& z : reg.boundary) os << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
}

// ---------------------------------------------------------------------------
// run

/// Single run at one resolution: prints a summary and, when `solution` is
/// given, writes the final field next to the exact one as CSV.
inline StudyPoint cmd_run(const ExperimentConfig& cfg, std::ostream& os, std::ostream* solution = nullptr,
                          const ProblemDefaults& defaults = {}) {
  validate_for_study(cfg);
  if (cfg.resolutions.size() != 1) throw UsageError("run takes exactly one resolution");
  const auto pt = run_point(*cfg.problem, cfg.methods.front(), cfg.resolutions.front(), cfg, defaults);
  os << "problem=" << problem_name(*cfg.problem) << " method=" << cfg.methods.front() << " N=" << pt.n
     << " steps=" << pt.steps << "\n";
  if (pt.unstable) {
    os << "UNSTABLE\n";
    return pt;
  }
  os << "eps1=" << format_double(pt.norms.eps1) << " eps2=" << format_double(pt.norms.eps2)
     << " epsInf=" << format_double(pt.norms.eps_inf) << " epsE=" << format_double(pt.eps_e) << "\n";

  if (solution && *cfg.problem == Problem::peridynamics) {
    auto spec = defaults.peridynamics;
    spec.nx = pt.n;
    if (cfg.T) spec.T = *cfg.T;
    const problems::Peridynamics pd(spec);
    // rerun to obtain the field; cheap compared with the exact-solution quadrature
    auto u = pd.initial_state();
    LowStorageStepper stepper(method(cfg.methods.front()).coefficients, u.size());
    double t = 0.0;
    for (std::size_t n = 1; n <= pt.steps; ++n) {
      double h = pt.dt;
      if (n == pt.steps && cfg.landing == Landing::shorten_last) h = spec.T - t;
      stepper.step(pd, h, std::span<double>(u), n);
      t += h;
    }
    *solution << "x,u,u_exact\n";
    for (std::size_t i = 0; i < pd.cells(); ++i) {
      *solution << format_double(pd.center(i)) << ',' << format_double(u[i]) << ','
                << format_double(problems::pd_exact(pd.center(i), pt.final_time)) << '\n';
    }
  }
  return pt;
}

}  // namespace escrk::harness
