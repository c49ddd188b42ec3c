#include <lagflow/lagflow.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace lagflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

SimConfig load(const Options& opt) {
  SimConfig c = parse_config(opt.config);
  if (opt.seed) c.ic.seed = *opt.seed;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  detail::atomic_write(path, std::vector<char>(text.begin(), text.end()));
}

std::string step_name(const char* stem, long step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%08ld.%s", stem, step, ext);
  return buf;
}

// u1, u2, omega, and q for euler_alpha.
void write_state_snapshot(const fs::path& dir, const SimState& s, long step) {
  const VectorField u = to_physical(s.u);
  const ScalarField w = to_physical(curl2d(s.u));
  if (s.params.model == Model::euler_alpha) {
    const ScalarField q = to_physical(potential_vorticity(s.u, s.params.alpha));
    PhysicalField<4> f(u.grid_ptr());
    std::ranges::copy(u[0], f[0].begin());
    std::ranges::copy(u[1], f[1].begin());
    std::ranges::copy(w[0], f[2].begin());
    std::ranges::copy(q[0], f[3].begin());
    write_field(dir / step_name("field", step, "fld"), f, s.t);
  } else {
    PhysicalField<3> f(u.grid_ptr());
    std::ranges::copy(u[0], f[0].begin());
    std::ranges::copy(u[1], f[1].begin());
    std::ranges::copy(w[0], f[2].begin());
    write_field(dir / step_name("field", step, "fld"), f, s.t);
  }
  write_flow_map(dir / step_name("flowmap", step, "fmp"), s.fm);
}

void warn_cfl(const RunResult& r) {
  if (r.cfl_warning) {
    std::cerr << "warning: start-of-run CFL number " << format_double(r.cfl) << " exceeds " << kCflLimit << "\n";
  }
}

int cmd_simulate(const Options& opt) {
  const SimConfig c = load(opt);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(c));
  RunOptions ro;
  ro.snapshots = [&](const SimState& s, long step) { write_state_snapshot(dir, s, step); };
  const RunResult r = run(c, ro);
  warn_cfl(r);
  write_text(dir / "diagnostics.csv", to_csv(r.series));
  if (!opt.quiet) {
    const ConservationReport rep = assert_conservation(r.series, c.params.model, c.params.nu);
    std::cout << "simulate: " << r.steps << " steps to t = " << format_double(r.state.t) << ", "
              << r.series.size() << " diagnostics samples -> " << (dir / "diagnostics.csv").string() << "\n";
    for (const auto& e : rep.entries) {
      std::cout << "  " << std::left << std::setw(18) << e.quantity << format_double(e.drift);
      if (e.tolerance) std::cout << (e.passed ? "  (within " : "  (exceeds ") << format_double(*e.tolerance) << ")";
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  const SimConfig c = load(opt);
  const std::vector<double> nus = c.nu_list.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : c.nu_list;
  validate_sweep(c, nus);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  const SweepResult s = viscosity_sweep(c, nus);
  std::ostringstream csv;
  csv << "nu,eta_sup,eta_l2,u_sup,u_l2\n";
  for (const auto& e : s.entries) {
    csv << format_double(e.nu) << ',' << format_double(e.eta.sup) << ',' << format_double(e.eta.l2) << ','
        << format_double(e.u.sup) << ',' << format_double(e.u.l2) << '\n';
  }
  write_text(dir / "sweep.csv", csv.str());
  if (!opt.quiet) {
    std::cout << csv.str() << "eta sup slope " << format_double(s.eta_sup_slope) << ", u L2 slope "
              << format_double(s.u_l2_slope) << ", E decreasing: " << (s.eta_monotone ? "yes" : "no") << "\n";
  }
  return kExitOk;
}

int cmd_sensitivity(const Options& opt) {
  const SimConfig c = load(opt);
  const std::vector<double> eps = c.eps_list.empty() ? std::vector<double>{1e-3} : c.eps_list;
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  const SensitivityResult s = sensitivity(c, make_sensitivity_direction(c), eps);
  std::ostringstream csv;
  csv << "eps,eta_diff,eta_diff_half,eta_ratio,u_diff,u_diff_half,u_ratio,roundoff_floor\n";
  for (const auto& r : s.rows) {
    csv << format_double(r.eps) << ',' << format_double(r.eta_diff) << ',' << format_double(r.eta_diff_half) << ','
        << format_double(r.eta_ratio) << ',' << format_double(r.u_diff) << ',' << format_double(r.u_diff_half) << ','
        << format_double(r.u_ratio) << ',' << (r.roundoff_floor ? 1 : 0) << '\n';
  }
  write_text(dir / "sensitivity.csv", csv.str());
  if (!opt.quiet) std::cout << csv.str();
  return kExitOk;
}

int cmd_verify(const Options& opt) {
  const auto results = run_verify_suite([&](const CriterionResult& r) {
    if (!opt.quiet) print_result(std::cout, r);
  });
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << "verify: " << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian flow-map solver for 2-D Euler and Euler-alpha on the periodic torus"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "configuration file (INI)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random IC seed (overrides ic.seed)");
    sub->add_flag("--quiet", opt.quiet, "suppress the summary on standard output");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "run one coupled simulation");
  CLI::App* sweep = app.add_subcommand("sweep", "zero-viscosity limit sweep (euler_alpha)");
  CLI::App* sens = app.add_subcommand("sensitivity", "Richardson table of directional derivatives in u0");
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(simulate, true);
  add_common(sweep, true);
  add_common(sens, true);
  verify->add_flag("--quiet", opt.quiet, "print only the summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (CLI::App* sub : {simulate, sweep, sens}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed = seed;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (sens->parsed()) return cmd_sensitivity(opt);
    return cmd_verify(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InstabilityError& e) {
    std::cerr << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
}
