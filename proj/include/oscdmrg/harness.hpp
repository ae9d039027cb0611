#pragma once

// Experiment commands behind the `oscdmrg` CLI. Each command returns typed
// rows; the *_csv helpers render them with 9 significant digits.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscdmrg/dmrg.hpp"

namespace oscdmrg {

enum class Command { analytic, ed, dmrg, scan_basis, scan_size, rdm_table, spectrum };

Command parse_command(const std::string& name);
const char* to_string(Command command);

/// Fully resolved run configuration.
struct RunConfig {
  Command command = Command::analytic;
  ChainSpec chain;
  DmrgConfig dmrg;
  std::optional<BasisMode> basis_mode;  // unset: command default (scan-basis runs both)
  std::vector<int> n_list;              // scan-basis
  std::vector<int> size_list;           // scan-size, spectrum
  int count = 10;                       // spectrum levels per N
  std::string output_path;              // empty: standard output
  char csv_delimiter = ',';

  /// Single comment line (without the leading "# ") listing every resolved key.
  std::string describe() const;
};

/// Thrown for malformed or unknown config-file content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys accepted in config files and as --flags.
const std::vector<std::string>& config_keys();

/// Parses "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Applies command defaults, then `file_values`, then `cli_values`.
/// Bad values throw ConfigError when they come from the file and
/// ArgumentError when they come from the command line.
RunConfig resolve_config(Command command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& cli_values);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comment line, header, rows.
std::string render_csv(const CsvTable& table, const RunConfig& config);

std::string format_value(double value);

// --- analytic ---
struct AnalyticReport {
  double ground_energy = 0.0;
  double gap = 0.0;
  std::vector<double> frequencies;
};
AnalyticReport cmd_analytic(const RunConfig& config);
CsvTable analytic_csv(const AnalyticReport& report);

// --- ed ---
struct EdRow {
  int level = 0;
  double energy = 0.0;
  double excitation = 0.0;
  double entanglement_se = 0.0;
};
std::vector<EdRow> cmd_ed(const RunConfig& config);
CsvTable ed_csv(const std::vector<EdRow>& rows);

// --- dmrg ---
struct DmrgReport {
  DmrgResult result;
  std::vector<double> exact_energies;
};
DmrgReport cmd_dmrg(const RunConfig& config);
CsvTable dmrg_csv(const DmrgReport& report);

// --- scan-basis ---
struct ScanBasisRow {
  int kept_states = 0;
  BasisMode mode = BasisMode::optimized;
  double energy = 0.0;
  double exact = 0.0;
  double rel_err = 0.0;
  double entanglement_se = 0.0;
  std::string status;
};
std::vector<ScanBasisRow> cmd_scan_basis(const RunConfig& config);
CsvTable scan_basis_csv(const std::vector<ScanBasisRow>& rows);

// --- scan-size ---
struct ScanSizeRow {
  int n_sites = 0;
  double rel_err_ground = 0.0;
  double rel_err_gap = 0.0;
  std::string status;
};
std::vector<ScanSizeRow> cmd_scan_size(const RunConfig& config);
CsvTable scan_size_csv(const std::vector<ScanSizeRow>& rows);

// --- rdm-table ---
inline constexpr int kRdmTableRanks = 20;
inline constexpr int kRdmTableTargets = 5;

/// columns[t][r]: r-th largest eigenvalue of the center block density matrix
/// with t + 1 targeted states.
struct RdmTable {
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<double>> spectra;  // full spectra behind each column
  std::vector<std::string> status;
};
RdmTable cmd_rdm_table(const RunConfig& config);
CsvTable rdm_table_csv(const RdmTable& table);

// --- spectrum ---
struct SpectrumRow {
  int n_sites = 0;
  int level = 0;
  double excitation = 0.0;
};
std::vector<SpectrumRow> cmd_spectrum(const RunConfig& config);
CsvTable spectrum_csv(const std::vector<SpectrumRow>& rows);
/// Inset data: first gap against N.
CsvTable spectrum_gap_csv(const std::vector<SpectrumRow>& rows);

/// Exit codes: 0 success, 1 usage or argument error, 2 solver
/// non-convergence (ed, dmrg), 3 config-file error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oscdmrg
