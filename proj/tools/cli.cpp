#include "cli.hpp"

#include "cbh/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cbh::cli {

namespace {

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", x);
  return buf;
}

// Flags shared by the subcommands that build a SweepSpec. Only flags the user
// actually passed override the spec they are applied to.
struct SpecFlags {
  int k = 1;
  double g = 0.0, kappa = 0.0, gamma = 1.0, nth = 0.0, mth = 0.0;
  long nfock = 0;
  std::string grid, mode, format = "csv", out, method;
  std::vector<double> fixed_n, fixed_m;
  double omega0 = 1.0, nu = 1.0, omega_ref = 1.0;
  double tol = 0.0, residual_tol = 0.0, fd_step = 0.0;
  long max_fock = 0;
  CLI::Option* nfock_opt = nullptr;
  unsigned threads = 0;
  bool no_richardson = false;

  std::vector<std::pair<CLI::Option*, std::function<void(SweepSpec&)>>> setters;

  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& name, T& var, const std::string& help,
                   std::function<void(SweepSpec&)> apply) {
    CLI::Option* o = app.add_option(name, var, help);
    setters.emplace_back(o, std::move(apply));
    return o;
  }

  void add_params(CLI::App& app) {
    add(app, "--k", k, "sideband order (0, 1 or 2)", [this](SweepSpec& s) { s.base.k = k; });
    add(app, "--g", g, "coupling strength g", [this](SweepSpec& s) { s.base.g = g; });
    add(app, "--kappa", kappa, "field decay rate", [this](SweepSpec& s) { s.base.kappa = kappa; });
    add(app, "--gamma", gamma, "atomic decay rate", [this](SweepSpec& s) { s.base.gamma = gamma; });
    add(app, "--nth", nth, "field reservoir occupation", [this](SweepSpec& s) { s.base.n_th = nth; });
    add(app, "--mth", mth, "atomic reservoir occupation", [this](SweepSpec& s) { s.base.m_th = mth; });
    nfock_opt = add(app, "--nfock", nfock, "starting Fock cutoff", [this](SweepSpec& s) { s.base.n_fock = nfock; });
  }

  void add_solver(CLI::App& app) {
    add(app, "--tol", tol, "truncation tolerance (tail population)",
        [this](SweepSpec& s) { s.solver.truncation_tol = tol; });
    add(app, "--residual-tol", residual_tol, "steady-state residual tolerance",
        [this](SweepSpec& s) { s.solver.residual_tol = residual_tol; });
    add(app, "--max-fock", max_fock, "largest Fock cutoff tried", [this](SweepSpec& s) { s.solver.max_fock = max_fock; });
    add(app, "--method", method, "direct | propagate | auto",
        [this](SweepSpec& s) { s.solver.method = parse_solve_method(method); });
  }

  void add_response(CLI::App& app) {
    add(app, "--grid", grid, "occupation grid start:stop:step", [this](SweepSpec& s) { s.grid = parse_grid(grid); });
    add(app, "--omega0", omega0, "atomic frequency", [this](SweepSpec& s) { s.freqs.omega0 = omega0; });
    add(app, "--nu", nu, "mode frequency", [this](SweepSpec& s) { s.freqs.nu = nu; });
    add(app, "--omega-ref", omega_ref, "reference frequency for common-occupation responses",
        [this](SweepSpec& s) { s.freqs.omega_ref = omega_ref; });
    add(app, "--fd-step", fd_step, "finite-difference step (0: automatic)", [this](SweepSpec& s) { s.fd_step = fd_step; });
    add(app, "--threads", threads, "worker threads (0: all cores)", [this](SweepSpec& s) { s.threads = threads; });
    CLI::Option* nr = app.add_flag("--no-richardson", no_richardson, "skip the half-step accuracy check");
    setters.emplace_back(nr, [this](SweepSpec& s) { s.richardson_check = !no_richardson; });
  }

  void add_output(CLI::App& app) {
    add(app, "--format", format, "csv | json", [this](SweepSpec& s) { s.format = parse_output_format(format); })
        ->check(CLI::IsMember({"csv", "json"}));
    add(app, "--out", out, "output file (default: stdout)", [this](SweepSpec& s) { s.output_path = out; });
  }

  void add_modes(CLI::App& app) {
    add(app, "--mode", mode, "common-occupation | fixed-field-occupation | fixed-atom-occupation",
        [this](SweepSpec& s) { s.mode = parse_sweep_mode(mode); });
    add(app, "--fixed-n", fixed_n, "pinned field occupations (fixed-field-occupation)", [this](SweepSpec& s) {
      s.mode = SweepMode::fixed_field;
      s.fixed = fixed_n;
    })->delimiter(',');
    add(app, "--fixed-m", fixed_m, "pinned atomic occupations (fixed-atom-occupation)", [this](SweepSpec& s) {
      s.mode = SweepMode::fixed_atom;
      s.fixed = fixed_m;
    })->delimiter(',');
  }

  void apply(SweepSpec& s) const {
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) set(s);
    }
  }
};

struct OutputFlags {
  bool no_timestamp = false;
  std::string plot;
  void add(CLI::App& app, bool with_plot) {
    app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp comment line");
    if (with_plot) app.add_option("--plot", plot, "also write a gnuplot script here");
  }
};

template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  write(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void write_sweep(const SweepSpec& spec, const std::vector<OutputRecord>& records, const OutputFlags& of,
                 std::ostream& out) {
  emit(spec.output_path, out,
       [&](std::ostream& os) { write_records(os, records, spec.format, CsvOptions{!of.no_timestamp}); });
  if (!of.plot.empty()) {
    PlotOptions po;
    po.csv_path = spec.output_path.empty() ? "sweep.csv" : spec.output_path;
    po.mode = spec.mode;
    emit(of.plot, out, [&](std::ostream& os) { os << emit_plot_script(records, po); });
  }
}

int run_spec(const SweepSpec& spec, const OutputFlags& of, std::ostream& out) {
  if (spec.mode == SweepMode::kappa_scan) {
    const KappaScanResult r = kappa_threshold_scan(spec);
    emit(spec.output_path, out, [&](std::ostream& os) { write_kappa_scan(os, r, spec.format); });
    return 0;
  }
  write_sweep(spec, run_sweep(spec), of, out);
  return 0;
}

int run_steady(const SpecFlags& f, std::ostream& out) {
  SweepSpec s;
  f.apply(s);
  SystemParams p = s.base;
  if (f.nfock_opt == nullptr || f.nfock_opt->count() == 0) p = with_default_cutoff(p);
  p.validate();
  s.solver.validate();
  const ThermoPoint t = steady_point(p, s.solver);
  emit(s.output_path, out, [&](std::ostream& os) {
    if (s.format == OutputFormat::json) {
      nlohmann::json j{{"m_th", t.m_th},     {"n_th", t.n_th},
                       {"ea_over_omega0", t.ea_over_omega0}, {"ef_over_nu", t.ef_over_nu},
                       {"e_int", t.e_int},   {"n_fock_used", t.n_fock_used},
                       {"residual", t.residual}};
      os << j.dump(2) << '\n';
    } else {
      os << "m_th,n_th,ea_over_omega0,ef_over_nu,e_int,n_fock_used,residual\n"
         << sci(t.m_th) << ',' << sci(t.n_th) << ',' << sci(t.ea_over_omega0) << ',' << sci(t.ef_over_nu) << ','
         << sci(t.e_int) << ',' << t.n_fock_used << ',' << sci(t.residual) << '\n';
    }
  });
  return 0;
}

int run_oracle(double g, const std::string& grid, const SweepSpec& s, std::ostream& out) {
  const std::vector<double> ms = parse_grid(grid);
  SystemParams p;
  p.k = 0;
  p.g = g;
  p.kappa = 0.0;
  p.gamma = s.base.gamma;
  p.n_fock = 2;
  p.validate();
  ResponseOptions opts;
  opts.richardson_check = false;
  opts.center_point = false;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "m_th,rho_ee_numeric,rho_ee_oracle,abs_diff,c_atom_numeric,c_analytic,ratio\n";
  for (double m : ms) {
    if (!(m > 0.0)) throw std::invalid_argument("oracle: grid occupations must be > 0");
    p.m_th = m;
    const SteadyStateResult r = solve_steady_state(p, s.solver);
    const double numeric = expect(composite_ops(p.n_fock).excited, r.rho).real();
    const double oracle = carrier_excited_population_oracle(m, g / p.gamma);
    const double c_num = response_atomic_fixed_n(p, m, 0.0, s.freqs, s.solver, opts).c_atom;
    const double c_an = carrier_response_analytic(m, g / p.gamma);
    const double ratio = c_an != 0.0 ? c_num / c_an : std::nan("");
    csv << sci(m) << ',' << sci(numeric) << ',' << sci(oracle) << ',' << sci(std::abs(numeric - oracle)) << ','
        << sci(c_num) << ',' << sci(c_an) << ',' << sci(ratio) << '\n';
    rows.push_back({{"m_th", m},
                    {"rho_ee_numeric", numeric},
                    {"rho_ee_oracle", oracle},
                    {"abs_diff", std::abs(numeric - oracle)},
                    {"c_atom_numeric", c_num},
                    {"c_analytic", c_an},
                    {"ratio", ratio}});
  }
  emit(s.output_path, out, [&](std::ostream& os) {
    if (s.format == OutputFormat::json) {
      os << nlohmann::json{{"g_over_gamma", g / p.gamma}, {"rows", rows}}.dump(2) << '\n';
    } else {
      os << csv.str();
    }
  });
  return 0;
}

const CLI::App* selected(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) return sub;
  return &app;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady states and reservoir-temperature responses of a driven atom coupled to a bosonic mode", "cbh"};
  app.require_subcommand(1);

  SpecFlags steady_f, sweep_f, preset_f, scan_f, oracle_f;
  OutputFlags sweep_o, preset_o;

  CLI::App* steady = app.add_subcommand("steady", "one steady state and its energies");
  steady_f.add_params(*steady);
  steady_f.add_solver(*steady);
  steady_f.add_output(*steady);

  CLI::App* sweep = app.add_subcommand("sweep", "response sweep from flags or a config file");
  std::string config, save_config;
  sweep->add_option("--config", config, "JSON sweep config; flags given alongside override it")
      ->check(CLI::ExistingFile);
  sweep->add_option("--save-config", save_config, "write the effective config here");
  sweep_f.add_params(*sweep);
  sweep_f.add_solver(*sweep);
  sweep_f.add_response(*sweep);
  sweep_f.add_modes(*sweep);
  sweep_f.add_output(*sweep);
  sweep_o.add(*sweep, true);

  CLI::App* preset_cmd = app.add_subcommand("preset", "named scenario: " + [] {
    std::string s;
    for (const std::string& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  std::string preset_name;
  preset_cmd->add_option("name", preset_name, "preset name")->required()->check(CLI::IsMember(preset_names()));
  preset_f.add_solver(*preset_cmd);
  preset_f.add_response(*preset_cmd);
  preset_f.add_output(*preset_cmd);
  preset_o.add(*preset_cmd, true);

  CLI::App* scan = app.add_subcommand("scan-kappa", "largest kappa/gamma admitting field cooling");
  int scan_k = 1;
  std::vector<double> scan_g{1.0};
  std::string scan_grid = "0.05:2:0.05", scan_occ;
  double resolution = 0.01;
  scan->add_option("--k", scan_k, "sideband order (1 or 2)")->check(CLI::IsMember({1, 2}));
  scan->add_option("--g", scan_g, "couplings tried at each kappa (default 1.0 for k = 1, 0.2 for k = 2)")->delimiter(',');
  scan->add_option("--grid", scan_grid, "kappa grid start:stop:step, in units of gamma")->capture_default_str();
  scan->add_option("--occupations", scan_occ, "occupations m = n searched, start:stop:step");
  scan->add_option("--resolution", resolution, "bisection resolution")->capture_default_str();
  scan_f.add_solver(*scan);
  scan_f.add_output(*scan);

  CLI::App* oracle = app.add_subcommand("oracle", "carrier (k = 0) closed form against the numeric solution");
  double oracle_g = 1.0;
  std::string oracle_grid = "0.1:3:0.1";
  oracle->add_option("--g", oracle_g, "coupling g / gamma")->capture_default_str();
  oracle->add_option("--grid", oracle_grid, "atomic occupations start:stop:step")->capture_default_str();
  oracle_f.add_solver(*oracle);
  oracle_f.add_output(*oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << selected(app)->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << selected(app)->help();
    return 2;
  }

  try {
    if (*steady) return run_steady(steady_f, out);
    if (*sweep) {
      SweepSpec spec;
      if (!config.empty()) {
        spec = load_spec(config);
      } else {
        spec.base.kappa = 0.1;
        spec.grid = make_grid(0.05, 3.0, 0.05);
      }
      sweep_f.apply(spec);
      spec.validate();
      if (!save_config.empty()) save_spec(spec, save_config);
      return run_spec(spec, sweep_o, out);
    }
    if (*preset_cmd) {
      SweepSpec spec = preset(preset_name);
      preset_f.apply(spec);
      spec.validate();
      return run_spec(spec, preset_o, out);
    }
    if (*scan) {
      SweepSpec spec = preset(scan_k == 2 ? "kappa2" : "kappa1");
      spec.base.k = scan_k;
      if (scan->get_option("--g")->count() > 0) spec.g_values = scan_g;
      spec.grid = parse_grid(scan_grid);
      if (!scan_occ.empty()) spec.scan_occupations = parse_grid(scan_occ);
      scan_f.apply(spec);
      spec.validate();
      const KappaScanResult r = kappa_threshold_scan(spec.base.k, spec.g_values, spec.grid, spec.scan_occupations,
                                                     spec.solver, spec.freqs, resolution);
      emit(spec.output_path, out, [&](std::ostream& os) { write_kappa_scan(os, r, spec.format); });
      return 0;
    }
    if (*oracle) {
      SweepSpec spec;
      oracle_f.apply(spec);
      spec.solver.validate();
      return run_oracle(oracle_g, oracle_grid, spec, out);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n\n" << selected(app)->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cbh::cli
