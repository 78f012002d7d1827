#include "cbh/sweep.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace cbh {

namespace {

using nlohmann::json;

std::string sci(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", x);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Notes are single-line comments; embedded newlines would break the format.
std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

json record_json(const OutputRecord& r) {
  // nlohmann serializes NaN as null.
  return json{{"m_th", r.m_th},
              {"n_th", r.n_th},
              {"ea_over_omega0", r.ea_over_omega0},
              {"ef_over_nu", r.ef_over_nu},
              {"e_int", r.e_int},
              {"c_atom", r.c_atom},
              {"c_field", r.c_field},
              {"n_fock_used", r.n_fock_used},
              {"residual", r.residual},
              {"failed", r.failed},
              {"note", r.note}};
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
  }
}

std::vector<double> read_grid(const json& j) {
  if (j.is_string()) return parse_grid(j.get<std::string>());
  return j.get<std::vector<double>>();
}

std::string column(PlotCurve c) {
  switch (c) {
    case PlotCurve::field_energy:
      return "4";
    case PlotCurve::atom_energy:
      return "(10*$3)";
    case PlotCurve::field_response:
      return "7";
    case PlotCurve::atom_response:
      return "6";
  }
  return "4";
}

std::string title(PlotCurve c) {
  switch (c) {
    case PlotCurve::field_energy:
      return "E_f/nu";
    case PlotCurve::atom_energy:
      return "10 E_a/omega_0";
    case PlotCurve::field_response:
      return "C_f";
    case PlotCurve::atom_response:
      return "C_a";
  }
  return "";
}

std::string style(PlotCurve c) {
  const bool atom = c == PlotCurve::atom_energy || c == PlotCurve::atom_response;
  return atom ? "with lines dashtype 2 lw 2" : "with lines dashtype 1 lw 2";
}

bool is_energy(PlotCurve c) { return c == PlotCurve::field_energy || c == PlotCurve::atom_energy; }

}  // namespace

void write_csv(std::ostream& os, std::span<const OutputRecord> records, const CsvOptions& opts) {
  if (opts.timestamp) os << "# generated " << utc_now() << '\n';
  os << kCsvHeader << '\n';
  for (const OutputRecord& r : records) {
    os << sci(r.m_th) << ',' << sci(r.n_th) << ',' << sci(r.ea_over_omega0) << ',' << sci(r.ef_over_nu) << ','
       << sci(r.e_int) << ',' << sci(r.c_atom) << ',' << sci(r.c_field) << ',' << r.n_fock_used << ','
       << sci(r.residual) << '\n';
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].note.empty()) continue;
    os << "# row " << i + 1 << (records[i].failed ? " error: " : " flag: ") << one_line(records[i].note) << '\n';
  }
}

void write_json(std::ostream& os, std::span<const OutputRecord> records) {
  json j;
  j["columns"] = {"m_th", "n_th", "ea_over_omega0", "ef_over_nu", "e_int",
                  "c_atom", "c_field", "n_fock_used", "residual"};
  j["records"] = json::array();
  for (const OutputRecord& r : records) j["records"].push_back(record_json(r));
  os << j.dump(2) << '\n';
}

void write_records(std::ostream& os, std::span<const OutputRecord> records, OutputFormat format,
                   const CsvOptions& opts) {
  if (format == OutputFormat::json) {
    write_json(os, records);
  } else {
    write_csv(os, records, opts);
  }
}

void write_kappa_scan(std::ostream& os, const KappaScanResult& result, OutputFormat format) {
  if (format == OutputFormat::json) {
    json probes = json::array();
    for (const KappaProbe& p : result.probes) {
      json e{{"kappa", p.kappa}, {"cooling", p.cooling}};
      if (p.cooling) {
        e["g"] = p.g;
        e["occupation"] = p.occupation;
        e["c_field"] = p.c_field;
      }
      probes.push_back(e);
    }
    json j{{"threshold", result.threshold},
           {"none_found", result.none_found},
           {"unbracketed", result.unbracketed},
           {"probes", probes}};
    os << j.dump(2) << '\n';
    return;
  }
  os << "# threshold " << sci(result.threshold) << (result.none_found ? " none-found" : "")
     << (result.unbracketed ? " unbracketed" : "") << '\n';
  os << "kappa,cooling,g,occupation,c_field\n";
  for (const KappaProbe& p : result.probes) {
    os << sci(p.kappa) << ',' << (p.cooling ? 1 : 0) << ',' << sci(p.g) << ',' << sci(p.occupation) << ','
       << sci(p.c_field) << '\n';
  }
}

std::string spec_to_json(const SweepSpec& s) {
  const SystemParams& b = s.base;
  const SolverConfig& c = s.solver;
  json j{{"mode", to_string(s.mode)},
         {"params",
          {{"k", b.k}, {"g", b.g}, {"kappa", b.kappa}, {"gamma", b.gamma}, {"n_th", b.n_th}, {"m_th", b.m_th},
           {"n_fock", b.n_fock}}},
         {"grid", s.grid},
         {"fixed", s.fixed},
         {"g_values", s.g_values},
         {"scan_occupations", s.scan_occupations},
         {"freqs", {{"omega0", s.freqs.omega0}, {"nu", s.freqs.nu}, {"omega_ref", s.freqs.omega_ref}}},
         {"solver",
          {{"residual_tol", c.residual_tol},
           {"truncation_tol", c.truncation_tol},
           {"max_fock", c.max_fock},
           {"method", to_string(c.method)},
           {"initial_dt", c.initial_dt},
           {"max_time", c.max_time},
           {"step_tol", c.step_tol},
           {"block_decomposition", c.block_decomposition}}},
         {"fd_step", s.fd_step},
         {"richardson_check", s.richardson_check},
         {"format", to_string(s.format)},
         {"output_path", s.output_path},
         {"threads", s.threads}};
  return j.dump(2) + "\n";
}

SweepSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  SweepSpec s;
  try {
    reject_unknown(j,
                   {"mode", "params", "grid", "fixed", "g_values", "scan_occupations", "freqs", "solver", "fd_step",
                    "richardson_check", "format", "output_path", "threads"},
                   "top level");
    if (j.contains("mode")) s.mode = parse_sweep_mode(j.at("mode").get<std::string>());
    if (j.contains("params")) {
      const json& p = j.at("params");
      reject_unknown(p, {"k", "g", "kappa", "gamma", "n_th", "m_th", "n_fock"}, "params");
      read_field(p, "k", s.base.k);
      read_field(p, "g", s.base.g);
      read_field(p, "kappa", s.base.kappa);
      read_field(p, "gamma", s.base.gamma);
      read_field(p, "n_th", s.base.n_th);
      read_field(p, "m_th", s.base.m_th);
      read_field(p, "n_fock", s.base.n_fock);
    }
    if (j.contains("grid")) s.grid = read_grid(j.at("grid"));
    read_field(j, "fixed", s.fixed);
    read_field(j, "g_values", s.g_values);
    if (j.contains("scan_occupations")) s.scan_occupations = read_grid(j.at("scan_occupations"));
    if (j.contains("freqs")) {
      const json& f = j.at("freqs");
      reject_unknown(f, {"omega0", "nu", "omega_ref"}, "freqs");
      read_field(f, "omega0", s.freqs.omega0);
      read_field(f, "nu", s.freqs.nu);
      read_field(f, "omega_ref", s.freqs.omega_ref);
    }
    if (j.contains("solver")) {
      const json& c = j.at("solver");
      reject_unknown(c,
                     {"residual_tol", "truncation_tol", "max_fock", "method", "initial_dt", "max_time", "step_tol",
                      "block_decomposition"},
                     "solver");
      read_field(c, "residual_tol", s.solver.residual_tol);
      read_field(c, "truncation_tol", s.solver.truncation_tol);
      read_field(c, "max_fock", s.solver.max_fock);
      if (c.contains("method")) s.solver.method = parse_solve_method(c.at("method").get<std::string>());
      read_field(c, "initial_dt", s.solver.initial_dt);
      read_field(c, "max_time", s.solver.max_time);
      read_field(c, "step_tol", s.solver.step_tol);
      read_field(c, "block_decomposition", s.solver.block_decomposition);
    }
    read_field(j, "fd_step", s.fd_step);
    read_field(j, "richardson_check", s.richardson_check);
    if (j.contains("format")) s.format = parse_output_format(j.at("format").get<std::string>());
    read_field(j, "output_path", s.output_path);
    read_field(j, "threads", s.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

void save_spec(const SweepSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << spec_to_json(spec);
}

std::string emit_plot_script(std::span<const OutputRecord> records, const PlotOptions& opts) {
  if (records.empty()) throw std::invalid_argument("emit_plot_script: records must be nonempty");
  const bool vs_n = opts.mode == SweepMode::fixed_atom;
  const std::string xcol = vs_n ? "2" : "1";
  std::ostringstream s;
  s << "# gnuplot script; data: " << opts.csv_path << "\n"
    << "set datafile separator ','\n"
    << "set datafile commentschars '#'\n"
    << "set key autotitle columnhead\n"
    << "set xlabel '" << (vs_n ? "n_th" : opts.mode == SweepMode::common ? "m_th = n_th" : "m_th") << "'\n"
    << "set grid\n"
    << "set xzeroaxis\n";

  std::vector<PlotCurve> energy;
  std::vector<PlotCurve> response;
  for (PlotCurve c : opts.curves) (is_energy(c) ? energy : response).push_back(c);

  const auto plot = [&](const std::vector<PlotCurve>& curves, const char* ylabel) {
    s << "set ylabel '" << ylabel << "'\n";
    if (curves.empty()) {
      s << "plot [0:3] NaN notitle\n";
      return;
    }
    s << "plot ";
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (i) s << ", \\\n     ";
      s << "'" << opts.csv_path << "' using " << xcol << ":" << column(curves[i]) << " " << style(curves[i])
        << " title '" << title(curves[i]) << "'";
    }
    s << "\n";
  };

  if (opts.curves.empty()) {
    s << "set ylabel 'energy'\nplot [0:3] NaN notitle\n";
    return s.str();
  }
  s << "set multiplot layout 2,1\n";
  plot(energy, "energy");
  plot(response, "response");
  s << "unset multiplot\n";
  return s.str();
}

}  // namespace cbh
