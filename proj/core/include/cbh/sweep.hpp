// Parameter sweeps, figure presets, kappa threshold scans and their
// serialized forms (CSV / JSON records, JSON sweep configs, gnuplot scripts).

#pragma once

#include "cbh/model.hpp"
#include "cbh/solver.hpp"
#include "cbh/thermo.hpp"

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbh {

enum class SweepMode { common, fixed_field, fixed_atom, kappa_scan };
enum class OutputFormat { csv, json };

std::string to_string(SweepMode m);
SweepMode parse_sweep_mode(const std::string& s);
std::string to_string(OutputFormat f);
OutputFormat parse_output_format(const std::string& s);

/// Inclusive grid start, start + step, ... up to stop (within 1e-9 step).
std::vector<double> make_grid(double start, double stop, double step);
/// Parses "start:stop:step".
std::vector<double> parse_grid(const std::string& text);

struct SweepSpec {
  SweepMode mode = SweepMode::common;
  SystemParams base;
  /// Varied occupation for the response modes; kappa values for kappa_scan.
  std::vector<double> grid;
  /// Pinned n_th values (fixed_field) or pinned m_th values (fixed_atom).
  std::vector<double> fixed;
  /// kappa_scan only: couplings tried at each kappa, and the occupations
  /// (m_th = n_th) searched for a negative field response.
  std::vector<double> g_values;
  std::vector<double> scan_occupations;

  ReferenceFrequencies freqs;
  SolverConfig solver;
  double fd_step = 0.0;           // 0: per-point default
  bool richardson_check = true;
  OutputFormat format = OutputFormat::csv;
  std::string output_path;
  unsigned threads = 0;           // 0: hardware concurrency

  void validate() const;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// One row of sweep output. Failed points keep their (m_th, n_th) and carry
/// NaN in every computed column plus the error text in `note`.
struct OutputRecord {
  double m_th = 0.0;
  double n_th = 0.0;
  double ea_over_omega0 = 0.0;
  double ef_over_nu = 0.0;
  double e_int = 0.0;
  double c_atom = 0.0;
  double c_field = 0.0;
  Index n_fock_used = 0;
  double residual = 0.0;
  bool failed = false;
  std::string note;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluates every grid point (in parallel on a bounded pool); output order
/// follows the grid, nested inside `fixed` for the fixed-occupation modes.
/// Throws SweepError when no point succeeds.
std::vector<OutputRecord> run_sweep(const SweepSpec& spec);

/// Occupation varied along a record set: m_th for common / fixed_field,
/// n_th for fixed_atom.
double varied_occupation(const OutputRecord& r, SweepMode mode);

/// Successful records of one fixed-occupation slice as a response curve.
ResponseCurve to_curve(std::span<const OutputRecord> records, const SweepSpec& spec);

/// Fresh response evaluation along the spec's varied occupation, with the
/// pinned occupation `fixed` (ignored in common mode); for crossing refinement.
ResponseEvaluator make_evaluator(const SweepSpec& spec, Subsystem which, double fixed = 0.0);

/// Named presets: fig1, fig2, fig3a, fig3b, carrier, kappa1, kappa2.
SweepSpec preset(const std::string& name);
std::vector<std::string> preset_names();

struct KappaProbe {
  double kappa;
  bool cooling;         // some (g, m) had C_field < 0
  double g = 0.0;       // witness, when cooling
  double occupation = 0.0;
  double c_field = 0.0;
};

struct KappaScanResult {
  double threshold = 0.0;
  bool none_found = false;   // no kappa in the grid admitted cooling
  bool unbracketed = false;  // the largest grid kappa still admitted cooling
  std::vector<KappaProbe> probes;  // every kappa evaluated, in evaluation order
};

/// Largest kappa/gamma for which some g in `g_values` yields a negative field
/// response at some m_th = n_th in `occupations`, refined to `resolution`
/// by bisection above the last grid kappa that admits cooling.
KappaScanResult kappa_threshold_scan(int k, std::span<const double> g_values, std::span<const double> kappa_grid,
                                     std::span<const double> occupations, const SolverConfig& solver = {},
                                     const ReferenceFrequencies& freqs = {}, double resolution = 0.01);
KappaScanResult kappa_threshold_scan(const SweepSpec& spec);

// Serialization

inline constexpr const char* kCsvHeader =
    "m_th,n_th,ea_over_omega0,ef_over_nu,e_int,c_atom,c_field,n_fock_used,residual";

struct CsvOptions {
  bool timestamp = true;  // leading "# generated ..." comment line
};

/// CSV with the fixed header, LF endings and %.14e numbers. Notes for failed
/// or flagged rows follow the data as "# row N: ..." comment lines.
void write_csv(std::ostream& os, std::span<const OutputRecord> records, const CsvOptions& opts = {});
void write_json(std::ostream& os, std::span<const OutputRecord> records);
void write_records(std::ostream& os, std::span<const OutputRecord> records, OutputFormat format,
                   const CsvOptions& opts = {});
void write_kappa_scan(std::ostream& os, const KappaScanResult& result, OutputFormat format);

std::string spec_to_json(const SweepSpec& spec);
SweepSpec spec_from_json(const std::string& text);
SweepSpec load_spec(const std::string& path);
void save_spec(const SweepSpec& spec, const std::string& path);

enum class PlotCurve { field_energy, atom_energy, field_response, atom_response };

struct PlotOptions {
  std::string csv_path = "sweep.csv";
  std::vector<PlotCurve> curves = {PlotCurve::field_energy, PlotCurve::atom_energy, PlotCurve::field_response,
                                   PlotCurve::atom_response};
  SweepMode mode = SweepMode::common;
};

/// Self-contained gnuplot script for the CSV at `opts.csv_path`. Atomic
/// energy is drawn scaled by 10 (dashed); field energy solid.
std::string emit_plot_script(std::span<const OutputRecord> records, const PlotOptions& opts);

}  // namespace cbh
