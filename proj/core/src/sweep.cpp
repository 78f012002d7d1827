#include "cbh/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace cbh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_increasing(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string("SweepSpec: ") + what + " must be nonempty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument(std::string("SweepSpec: ") + what + " has a non-finite value");
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw std::invalid_argument(std::string("SweepSpec: ") + what + " must be strictly increasing");
    }
  }
}

struct Task {
  double x;      // varied occupation
  double fixed;  // pinned occupation (unused in common mode)
};

ResponsePoint evaluate(const SweepSpec& spec, const Task& t, const ResponseOptions& opts) {
  SystemParams p = with_default_cutoff(spec.base);
  switch (spec.mode) {
    case SweepMode::common:
      return response_common(p, t.x, spec.freqs, spec.solver, opts);
    case SweepMode::fixed_field:
      return response_atomic_fixed_n(p, t.x, t.fixed, spec.freqs, spec.solver, opts);
    case SweepMode::fixed_atom:
      return response_field_fixed_m(p, t.x, t.fixed, spec.freqs, spec.solver, opts);
    case SweepMode::kappa_scan:
      break;
  }
  throw std::invalid_argument("run_sweep: kappa-scan specs go through kappa_threshold_scan");
}

OutputRecord make_record(const SweepSpec& spec, const Task& t) {
  OutputRecord r;
  r.m_th = spec.mode == SweepMode::fixed_atom ? t.fixed : t.x;
  r.n_th = spec.mode == SweepMode::common ? t.x : spec.mode == SweepMode::fixed_field ? t.fixed : t.x;
  try {
    ResponseOptions opts;
    opts.fd_step = spec.fd_step;
    opts.richardson_check = spec.richardson_check;
    const ResponsePoint p = evaluate(spec, t, opts);
    r.ea_over_omega0 = p.center.ea_over_omega0;
    r.ef_over_nu = p.center.ef_over_nu;
    r.e_int = p.center.e_int;
    r.c_atom = p.c_atom;
    r.c_field = p.c_field;
    r.n_fock_used = p.center.n_fock_used;
    r.residual = p.center.residual;
    r.note = p.note;
  } catch (const std::exception& e) {
    r.ea_over_omega0 = r.ef_over_nu = r.e_int = r.c_atom = r.c_field = r.residual = kNaN;
    r.n_fock_used = 0;
    r.failed = true;
    r.note = e.what();
  }
  return r;
}

unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

// Any m = n in `occupations` with a negative field response, for any g.
KappaProbe probe_kappa(int k, double kappa, std::span<const double> g_values, std::span<const double> occupations,
                       const SolverConfig& solver, const ReferenceFrequencies& freqs) {
  ResponseOptions opts;
  opts.richardson_check = false;
  opts.center_point = false;
  KappaProbe probe{kappa, false};
  for (const double g : g_values) {
    SystemParams p;
    p.k = k;
    p.g = g;
    p.kappa = kappa;
    for (const double m : occupations) {
      p.m_th = p.n_th = m;
      const ResponsePoint r = response_common(with_default_cutoff(p), m, freqs, solver, opts);
      if (r.c_field < 0.0) {
        probe.cooling = true;
        probe.g = g;
        probe.occupation = m;
        probe.c_field = r.c_field;
        return probe;
      }
    }
  }
  return probe;
}

}  // namespace

std::string to_string(SweepMode m) {
  switch (m) {
    case SweepMode::common:
      return "common-occupation";
    case SweepMode::fixed_field:
      return "fixed-field-occupation";
    case SweepMode::fixed_atom:
      return "fixed-atom-occupation";
    case SweepMode::kappa_scan:
      return "kappa-scan";
  }
  return "common-occupation";
}

SweepMode parse_sweep_mode(const std::string& s) {
  for (SweepMode m : {SweepMode::common, SweepMode::fixed_field, SweepMode::fixed_atom, SweepMode::kappa_scan}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown sweep mode '" + s + "'");
}

std::string to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + s + "' (expected csv or json)");
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw std::invalid_argument("grid: bounds and step must be finite");
  }
  if (!(step > 0.0)) throw std::invalid_argument("grid: step must be > 0");
  if (stop < start) throw std::invalid_argument("grid: stop must be >= start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n) + 1);
  // Multiplying rather than accumulating keeps grids reproducible.
  for (long i = 0; i <= n; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
    }
    if (used != item.size()) throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
    parts.push_back(v);
  }
  if (parts.size() != 3 || text.back() == ':') {
    throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
  }
  return make_grid(parts[0], parts[1], parts[2]);
}

void SweepSpec::validate() const {
  base.validate();
  freqs.validate();
  solver.validate();
  require_increasing(grid, "grid");
  if (!(fd_step >= 0.0) || !std::isfinite(fd_step)) throw std::invalid_argument("SweepSpec: fd_step must be >= 0");
  switch (mode) {
    case SweepMode::common:
      break;
    case SweepMode::fixed_field:
    case SweepMode::fixed_atom:
      if (fixed.empty()) throw std::invalid_argument("SweepSpec: fixed-occupation modes need fixed values");
      for (double f : fixed) {
        if (!(f >= 0.0) || !std::isfinite(f)) throw std::invalid_argument("SweepSpec: fixed values must be >= 0");
      }
      break;
    case SweepMode::kappa_scan:
      if (base.k != 1 && base.k != 2) throw std::invalid_argument("SweepSpec: kappa-scan needs k = 1 or 2");
      if (grid.front() < 0.0 || grid.back() > 2.0 * base.gamma) {
        throw std::invalid_argument("SweepSpec: kappa grid must lie within [0, 2 gamma]");
      }
      if (g_values.empty()) throw std::invalid_argument("SweepSpec: kappa-scan needs g values");
      for (double g : g_values) {
        if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("SweepSpec: g values must be > 0");
      }
      require_increasing(scan_occupations, "scan occupations");
      if (!(scan_occupations.front() > 0.0)) throw std::invalid_argument("SweepSpec: scan occupations must be > 0");
      return;
  }
  if (!(grid.front() > 0.0)) throw std::invalid_argument("SweepSpec: occupation grid must be > 0");
}

std::vector<OutputRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  if (spec.mode == SweepMode::kappa_scan) {
    throw std::invalid_argument("run_sweep: kappa-scan specs go through kappa_threshold_scan");
  }
  std::vector<Task> tasks;
  const std::vector<double> pinned = spec.mode == SweepMode::common ? std::vector<double>{0.0} : spec.fixed;
  for (double f : pinned) {
    for (double x : spec.grid) tasks.push_back({x, f});
  }

  std::vector<OutputRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const unsigned n = worker_count(spec.threads, tasks.size());
    for (unsigned w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = make_record(spec, tasks[i]);
      });
    }
  }

  const bool any_ok = std::any_of(out.begin(), out.end(), [](const OutputRecord& r) { return !r.failed; });
  if (!any_ok) throw SweepError("run_sweep: every grid point failed; first error: " + out.front().note);
  return out;
}

double varied_occupation(const OutputRecord& r, SweepMode mode) {
  return mode == SweepMode::fixed_atom ? r.n_th : r.m_th;
}

ResponseCurve to_curve(std::span<const OutputRecord> records, const SweepSpec& spec) {
  ResponseCurve c;
  switch (spec.mode) {
    case SweepMode::fixed_field:
      c.mode = ResponseMode::fixed_field;
      break;
    case SweepMode::fixed_atom:
      c.mode = ResponseMode::fixed_atom;
      break;
    default:
      c.mode = ResponseMode::common;
  }
  c.params = spec.base;
  c.fd_step = spec.fd_step;
  for (const OutputRecord& r : records) {
    if (r.failed) continue;
    ThermoPoint t{r.m_th, r.n_th, r.ea_over_omega0, r.ef_over_nu, r.e_int, r.n_fock_used, r.residual};
    c.samples.push_back({varied_occupation(r, spec.mode), r.c_atom, r.c_field, t});
  }
  return c;
}

ResponseEvaluator make_evaluator(const SweepSpec& spec, Subsystem which, double fixed) {
  return [spec, which, fixed](double x) {
    ResponseOptions opts;
    opts.fd_step = spec.fd_step;
    opts.richardson_check = false;
    opts.center_point = false;
    const ResponsePoint p = evaluate(spec, Task{x, fixed}, opts);
    return which == Subsystem::atom ? p.c_atom : p.c_field;
  };
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3a", "fig3b", "carrier", "kappa1", "kappa2"}; }

SweepSpec preset(const std::string& name) {
  SweepSpec s;
  s.base.gamma = 1.0;
  s.base.kappa = 0.1;
  s.grid = make_grid(0.05, 3.0, 0.05);
  const auto k1 = [&s] {
    s.base.k = 1;
    s.base.g = 1.0;
  };
  const auto k2 = [&s] {
    s.base.k = 2;
    s.base.g = 0.2;
  };
  if (name == "fig1") {
    k1();
  } else if (name == "fig2") {
    k2();
  } else if (name == "fig3a" || name == "fig3b") {
    name == "fig3a" ? k1() : k2();
    s.mode = SweepMode::fixed_field;
    s.fixed = {0.0, 1.0, 2.0};
  } else if (name == "carrier") {
    s.base.k = 0;
    s.base.g = 1.0;
  } else if (name == "kappa1" || name == "kappa2") {
    name == "kappa1" ? k1() : k2();
    s.mode = SweepMode::kappa_scan;
    s.g_values = {s.base.g};
    s.grid = make_grid(0.05, 2.0, 0.05);
    // Cooling of the field near threshold sits at small occupations, so the
    // low end is sampled logarithmically below the regular grid.
    s.scan_occupations = {0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.075};
    for (double m : make_grid(0.1, 3.0, 0.1)) s.scan_occupations.push_back(m);
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  s.base = with_default_cutoff(s.base);
  return s;
}

KappaScanResult kappa_threshold_scan(int k, std::span<const double> g_values, std::span<const double> kappa_grid,
                                     std::span<const double> occupations, const SolverConfig& solver,
                                     const ReferenceFrequencies& freqs, double resolution) {
  if (k != 1 && k != 2) throw std::invalid_argument("kappa_threshold_scan: k must be 1 or 2");
  if (kappa_grid.empty() || g_values.empty() || occupations.empty()) {
    throw std::invalid_argument("kappa_threshold_scan: grids must be nonempty");
  }
  if (!(resolution > 0.0)) throw std::invalid_argument("kappa_threshold_scan: resolution must be > 0");
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] >= 0.0 && kappa_grid[i] <= 2.0) || (i > 0 && !(kappa_grid[i] > kappa_grid[i - 1]))) {
      throw std::invalid_argument("kappa_threshold_scan: kappa grid must be increasing within [0, 2 gamma]");
    }
  }

  KappaScanResult res;
  const auto probe = [&](double kappa) {
    res.probes.push_back(probe_kappa(k, kappa, g_values, occupations, solver, freqs));
    return res.probes.back().cooling;
  };

  std::optional<std::size_t> last_cooling;
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (probe(kappa_grid[i])) {
      last_cooling = i;
    } else if (last_cooling) {
      break;
    }
  }
  if (!last_cooling) {
    res.none_found = true;
    return res;
  }
  if (*last_cooling + 1 == kappa_grid.size()) {
    res.unbracketed = true;
    res.threshold = kappa_grid.back();
    return res;
  }
  double lo = kappa_grid[*last_cooling];
  double hi = kappa_grid[*last_cooling + 1];
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? lo : hi) = mid;
  }
  res.threshold = lo;
  return res;
}

KappaScanResult kappa_threshold_scan(const SweepSpec& spec) {
  spec.validate();
  if (spec.mode != SweepMode::kappa_scan) throw std::invalid_argument("kappa_threshold_scan: spec is not a kappa-scan");
  // Kappa is given in units of gamma; the solver runs with gamma = 1.
  std::vector<double> kappas(spec.grid);
  std::vector<double> gs(spec.g_values);
  for (double& x : kappas) x /= spec.base.gamma;
  for (double& x : gs) x /= spec.base.gamma;
  return kappa_threshold_scan(spec.base.k, gs, kappas, spec.scan_occupations, spec.solver, spec.freqs);
}

}  // namespace cbh
