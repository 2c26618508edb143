// escrk: inspect the method catalog and run the benchmark studies.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <map>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "escrk/harness.hpp"

namespace {

using escrk::harness::ExperimentConfig;
using escrk::harness::UsageError;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Flags shared by the experiment subcommands. Unset flags leave the
/// config-file value in place.
struct Flags {
  std::string config;
  std::string problem;
  std::vector<std::string> methods;
  std::vector<std::size_t> resolutions;
  std::optional<double> courant;
  std::optional<double> T;
  std::optional<std::size_t> record_every;
  std::optional<std::size_t> iterations;
  std::string landing;
  std::string fdtd_start;
  std::string out;
};

void add_experiment_flags(CLI::App* cmd, Flags& f, bool multi_method, bool problem_flag = true) {
  cmd->add_option("--config", f.config, "key=value config file (flags override it)");
  if (problem_flag) cmd->add_option("--problem", f.problem, "oscillator | peridynamics | maxwell");
  cmd->add_option("--method", f.methods, multi_method ? "catalog name(s), comma separated or repeated" : "catalog name");
  cmd->add_option("--nx,--nt", f.resolutions, "resolution(s), comma separated")->delimiter(',');
  cmd->add_option("--courant", f.courant, "Courant number c dt/dx (maxwell)");
  cmd->add_option("--T", f.T, "final time");
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--landing", f.landing, "peridynamics last step: shorten | overshoot");
  cmd->add_option("--fdtd-start", f.fdtd_start, "FDTD magnetic start: zero | half_step");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : escrk::harness::load_config(f.config);
  std::map<std::string, std::string> kv;
  if (!f.problem.empty()) kv["problem"] = f.problem;
  if (!f.landing.empty()) kv["landing"] = f.landing;
  if (!f.fdtd_start.empty()) kv["fdtd_start"] = f.fdtd_start;
  escrk::harness::apply_key_values(kv, cfg);
  if (!f.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : f.methods) {
      for (auto& name : escrk::harness::split_methods(m)) cfg.methods.push_back(std::move(name));
    }
  }
  if (!f.resolutions.empty()) cfg.resolutions = f.resolutions;
  if (f.courant) cfg.courant = f.courant;
  if (f.T) cfg.T = f.T;
  if (f.record_every) cfg.record_every = *f.record_every;
  if (f.iterations) cfg.iterations = f.iterations;
  if (!f.out.empty()) cfg.out = f.out;
  return cfg;
}

/// Opens `path` for writing, or returns stdout when it is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

/// RK(4,4,5) -> RK_4_4_5, for file names.
std::string file_tag(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '(' || c == ',') {
      out += '_';
    } else if (c != ')') {
      out += c;
    }
  }
  return out;
}

std::string suffixed(const std::string& path, const std::string& tag) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-conserving explicit Runge-Kutta methods: catalog, derivation and benchmarks"};
  app.require_subcommand(1);

  auto* methods = app.add_subcommand("methods", "inspect the method catalog");
  methods->require_subcommand(1);
  methods->add_subcommand("list", "one row per catalog method");
  auto* show = methods->add_subcommand("show", "coefficients of one method");
  std::string show_name;
  show->add_option("name", show_name)->required();

  auto* derive = app.add_subcommand("derive", "solve the energy equations for (s, p)");
  long derive_s = 0, derive_p = 0;
  derive->add_option("s", derive_s)->required();
  derive->add_option("p", derive_p)->required();

  Flags conv_flags;
  auto* convergence = app.add_subcommand("convergence", "convergence table as CSV");
  add_experiment_flags(convergence, conv_flags, false);

  Flags hist_flags;
  auto* history = app.add_subcommand("energy-history", "energy time history as CSV");
  add_experiment_flags(history, hist_flags, true);
  history->add_option("--record-every", hist_flags.record_every, "record every k-th step");
  history->add_option("--iterations", hist_flags.iterations, "number of steps (maxwell)");

  auto* region = app.add_subcommand("stability-region", "boundary of |G(z)| <= 1 as CSV");
  std::string region_method, region_out;
  std::size_t region_resolution = 1024;
  escrk::ComplexWindow window;
  region->add_option("--method", region_method)->required();
  region->add_option("--resolution", region_resolution, "grid points per axis");
  region->add_option("--re-min", window.re_min);
  region->add_option("--re-max", window.re_max);
  region->add_option("--im-min", window.im_min);
  region->add_option("--im-max", window.im_max);
  region->add_option("--out", region_out);

  Flags run_flags;
  auto* run = app.add_subcommand("run", "single run with error summary");
  run->add_option("problem", run_flags.problem)->required();
  add_experiment_flags(run, run_flags, false, false);
  std::string solution_out;
  run->add_option("--solution", solution_out, "write final and exact field (peridynamics)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (methods->parsed()) {
      if (show->parsed()) {
        escrk::harness::cmd_methods_show(show_name, std::cout);
      } else {
        escrk::harness::cmd_methods_list(std::cout);
      }
    } else if (derive->parsed()) {
      if (escrk::harness::cmd_derive(derive_s, derive_p, std::cout) == 0) return kExitNumerical;
    } else if (convergence->parsed()) {
      const auto cfg = resolve(conv_flags);
      Output out(cfg.out);
      escrk::harness::cmd_convergence(cfg, out.stream());
    } else if (history->parsed()) {
      const auto cfg = resolve(hist_flags);
      if (cfg.methods.empty()) throw UsageError("no method given");
      if (cfg.methods.size() > 1 && cfg.out.empty()) throw UsageError("several methods need --out");
      for (const auto& name : cfg.methods) {
        const auto rec = escrk::harness::energy_history(cfg, name);
        Output out(cfg.methods.size() > 1 ? suffixed(cfg.out, file_tag(name)) : cfg.out);
        escrk::harness::write_energy_history_csv(rec, out.stream());
      }
    } else if (region->parsed()) {
      Output out(region_out);
      escrk::harness::cmd_stability_region(region_method, window, region_resolution, out.stream());
    } else if (run->parsed()) {
      const auto cfg = resolve(run_flags);
      Output out(cfg.out);
      std::unique_ptr<Output> sol;
      if (!solution_out.empty()) sol = std::make_unique<Output>(solution_out);
      const auto pt = escrk::harness::cmd_run(cfg, out.stream(), sol ? &sol->stream() : nullptr);
      if (pt.unstable) return kExitNumerical;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const escrk::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
