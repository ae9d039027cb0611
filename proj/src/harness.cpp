#include "oscdmrg/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "oscdmrg/entanglement.hpp"
#include "oscdmrg/errors.hpp"
#include "oscdmrg/exact.hpp"

namespace oscdmrg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::analytic, "analytic"},   {Command::ed, "ed"},
    {Command::dmrg, "dmrg"},           {Command::scan_basis, "scan-basis"},
    {Command::scan_size, "scan-size"}, {Command::rdm_table, "rdm-table"},
    {Command::spectrum, "spectrum"},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::map<std::string, std::string> command_defaults(Command command) {
  std::map<std::string, std::string> d{
      {"N", "50"},  {"hbar", "1"},     {"m", "16"},    {"n", "10"},       {"n1", "2"},
      {"ntar", "1"}, {"sweeps", "6"},   {"seed", "12345"}, {"count", "10"}, {"delimiter", ","},
      {"out", ""},  {"basis-mode", ""}, {"n-list", "4,6,8,10"},
      {"N-list", "10,20,30,40,50,60,70,80,90,100"},
  };
  switch (command) {
    case Command::ed:
      d["N"] = "3";
      d["m"] = "8";
      d["ntar"] = "3";
      break;
    case Command::scan_size:
      d["ntar"] = "2";
      break;
    case Command::rdm_table:
      d["N"] = "9";
      d["n"] = "8";
      break;
    default:
      break;
  }
  return d;
}

// Runs fn(i) for i in [0, count) on worker threads; results keep index order.
template <typename Result>
std::vector<Result> parallel_map(std::size_t count, const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(count);
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) results[i] = fn(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

std::string status_of(const DmrgResult& r) { return r.converged ? "ok" : "not_converged"; }

std::string status_of(const std::exception& e) {
  std::string msg = e.what();
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return "error: " + msg;
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& c : kCommands) {
    if (name == c.name) return c.command;
  }
  throw ArgumentError("unknown command '" + name + "'");
}

const char* to_string(Command command) {
  for (const auto& c : kCommands) {
    if (command == c.command) return c.name;
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"N",    "hbar",       "m",    "n",      "n1",
                                             "ntar", "sweeps",     "seed", "count",  "delimiter",
                                             "out",  "basis-mode", "n-list", "N-list"};
  return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    values[key] = value;
  }
  return values;
}

RunConfig resolve_config(Command command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& cli_values) {
  auto merged = command_defaults(command);
  std::map<std::string, bool> from_file;
  for (const auto& [k, v] : file_values) {
    merged[k] = v;
    from_file[k] = true;
  }
  for (const auto& [k, v] : cli_values) {
    merged[k] = v;
    from_file[k] = false;
  }

  auto fail = [&](const std::string& key, const std::string& why) -> void {
    const std::string msg = "invalid value '" + merged[key] + "' for " + key + ": " + why;
    if (from_file[key]) throw ConfigError(msg);
    throw ArgumentError(msg);
  };
  auto as_int = [&](const std::string& key) {
    const std::string& s = merged[key];
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) fail(key, "expected an integer");
    return static_cast<int>(v);
  };
  auto as_double = [&](const std::string& key) {
    const std::string& s = merged[key];
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) fail(key, "expected a number");
    return v;
  };
  auto as_list = [&](const std::string& key) {
    std::vector<int> out;
    std::istringstream in(merged[key]);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(item, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != item.size()) fail(key, "expected comma-separated integers");
      out.push_back(v);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  };

  RunConfig cfg;
  cfg.command = command;
  cfg.chain.n_sites = as_int("N");
  cfg.chain.hbar = as_double("hbar");
  cfg.chain.bare_dim = as_int("m");
  cfg.dmrg.kept_states = as_int("n");
  cfg.dmrg.feed_size = as_int("n1");
  cfg.dmrg.n_targets = as_int("ntar");
  cfg.dmrg.n_sweeps = as_int("sweeps");
  {
    const std::string& s = merged["seed"];
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) fail("seed", "expected a non-negative integer");
    cfg.dmrg.seed = v;
  }
  cfg.count = as_int("count");
  cfg.output_path = merged["out"];
  if (merged["delimiter"].size() != 1) fail("delimiter", "expected a single character");
  cfg.csv_delimiter = merged["delimiter"][0];
  if (!merged["basis-mode"].empty()) {
    try {
      cfg.basis_mode = parse_basis_mode(merged["basis-mode"]);
    } catch (const ArgumentError& e) {
      fail("basis-mode", "expected bare or optimized");
    }
  }
  cfg.n_list = as_list("n-list");
  cfg.size_list = as_list("N-list");
  cfg.dmrg.basis_mode = cfg.basis_mode.value_or(BasisMode::optimized);

  if (cfg.chain.n_sites < 1) fail("N", "must be >= 1");
  if (!(cfg.chain.hbar > 0.0)) fail("hbar", "must be > 0");
  if (cfg.chain.bare_dim < 2) fail("m", "must be >= 2");
  if (cfg.count < 1) fail("count", "must be >= 1");
  return cfg;
}

std::string RunConfig::describe() const {
  std::ostringstream s;
  s << "oscdmrg " << to_string(command) << " N=" << chain.n_sites << " hbar=" << format_value(chain.hbar)
    << " m=" << chain.bare_dim << " n=" << dmrg.kept_states << " n1=" << dmrg.feed_size
    << " ntar=" << dmrg.n_targets << " sweeps=" << dmrg.n_sweeps
    << " basis-mode=" << (basis_mode ? to_string(*basis_mode) : "default") << " seed=" << dmrg.seed
    << " n-list=" << join_ints(n_list) << " N-list=" << join_ints(size_list) << " count=" << count
    << " eig-tol=" << format_value(dmrg.eig_tol) << " basis-tol=" << format_value(dmrg.basis_tol)
    << " energy-tol=" << format_value(dmrg.energy_tol) << " max-basis-cycles=" << dmrg.max_basis_cycles
    << " entropy=nats";
  return s.str();
}

std::string format_value(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string render_csv(const CsvTable& table, const RunConfig& config) {
  const char sep = config.csv_delimiter;
  std::ostringstream out;
  out << "# " << config.describe() << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << sep;
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out.str();
}

AnalyticReport cmd_analytic(const RunConfig& config) {
  AnalyticReport report;
  report.ground_energy = ground_energy_closed(config.chain);
  report.gap = first_gap(config.chain);
  report.frequencies = mode_spectrum(config.chain).frequencies;
  return report;
}

CsvTable analytic_csv(const AnalyticReport& report) {
  CsvTable t{{"quantity", "index", "value"}, {}};
  t.rows.push_back({"E_ground", "0", format_value(report.ground_energy)});
  t.rows.push_back({"gap", "0", format_value(report.gap)});
  for (std::size_t j = 0; j < report.frequencies.size(); ++j) {
    t.rows.push_back({"omega", std::to_string(j + 1), format_value(report.frequencies[j])});
  }
  return t;
}

std::vector<EdRow> cmd_ed(const RunConfig& config) {
  LanczosOptions opts;
  opts.seed = config.dmrg.seed;
  opts.tol = config.dmrg.eig_tol;
  opts.max_iter = config.dmrg.eig_max_iter;
  const EdResult ed = ed_lowest(config.chain, config.dmrg.n_targets, opts);
  std::vector<EdRow> rows;
  for (std::size_t k = 0; k < ed.energies.size(); ++k) {
    std::vector<DensityMatrix> rdms;
    for (int i = 0; i < config.chain.n_sites; ++i) rdms.push_back(site_rdm(ed.states[k], i));
    rows.push_back({static_cast<int>(k), ed.energies[k], ed.energies[k] - ed.energies[0],
                    average_local_entanglement(rdms)});
  }
  return rows;
}

CsvTable ed_csv(const std::vector<EdRow>& rows) {
  CsvTable t{{"level", "energy", "excitation", "S_E"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.level), format_value(r.energy), format_value(r.excitation),
                      format_value(r.entanglement_se)});
  }
  return t;
}

DmrgReport cmd_dmrg(const RunConfig& config) {
  DmrgReport report;
  report.result = run_dmrg(config.chain, config.dmrg);
  const double e0 = ground_energy_closed(config.chain);
  report.exact_energies.push_back(e0);
  const int extra = static_cast<int>(report.result.energies.size()) - 1;
  if (extra > 0) {
    for (double ex : spectrum(config.chain, extra)) report.exact_energies.push_back(e0 + ex);
  }
  return report;
}

CsvTable dmrg_csv(const DmrgReport& report) {
  CsvTable t{{"level", "energy", "E_exact", "rel_err", "S_E", "converged"}, {}};
  const auto& r = report.result;
  for (std::size_t k = 0; k < r.energies.size(); ++k) {
    const double exact = report.exact_energies[k];
    t.rows.push_back({std::to_string(k), format_value(r.energies[k]), format_value(exact),
                      format_value(relative_error(r.energies[k], exact)), format_value(r.entanglement_se),
                      r.converged ? "1" : "0"});
  }
  return t;
}

std::vector<ScanBasisRow> cmd_scan_basis(const RunConfig& config) {
  std::vector<BasisMode> modes;
  if (config.basis_mode) {
    modes.push_back(*config.basis_mode);
  } else {
    modes = {BasisMode::bare, BasisMode::optimized};
  }
  std::vector<std::pair<int, BasisMode>> points;
  for (int n : config.n_list) {
    for (BasisMode mode : modes) points.emplace_back(n, mode);
  }
  std::sort(points.begin(), points.end());

  const double exact = ground_energy_closed(config.chain);
  return parallel_map<ScanBasisRow>(points.size(), [&](std::size_t i) {
    ScanBasisRow row;
    row.kept_states = points[i].first;
    row.mode = points[i].second;
    row.exact = exact;
    DmrgConfig dc = config.dmrg;
    dc.kept_states = row.kept_states;
    dc.basis_mode = row.mode;
    try {
      const DmrgResult r = run_dmrg(config.chain, dc);
      row.energy = r.energies.front();
      row.rel_err = relative_error(row.energy, exact);
      row.entanglement_se = r.entanglement_se;
      row.status = status_of(r);
    } catch (const std::exception& e) {
      row.energy = row.rel_err = row.entanglement_se = kNaN;
      row.status = status_of(e);
    }
    return row;
  });
}

CsvTable scan_basis_csv(const std::vector<ScanBasisRow>& rows) {
  CsvTable t{{"n", "basis_mode", "E_dmrg", "E_exact", "rel_err", "S_E", "status"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.kept_states), to_string(r.mode), format_value(r.energy),
                      format_value(r.exact), format_value(r.rel_err), format_value(r.entanglement_se), r.status});
  }
  return t;
}

std::vector<ScanSizeRow> cmd_scan_size(const RunConfig& config) {
  if (config.dmrg.n_targets < 2) throw ArgumentError("scan-size needs ntar >= 2 to resolve the gap");
  std::vector<int> sizes = config.size_list;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return parallel_map<ScanSizeRow>(sizes.size(), [&](std::size_t i) {
    ScanSizeRow row;
    row.n_sites = sizes[i];
    ChainSpec spec = config.chain;
    spec.n_sites = sizes[i];
    try {
      const DmrgResult r = run_dmrg(spec, config.dmrg);
      row.rel_err_ground = relative_error(r.energies[0], ground_energy_closed(spec));
      row.rel_err_gap = relative_error(r.gap, first_gap(spec));
      row.status = status_of(r);
    } catch (const std::exception& e) {
      row.rel_err_ground = row.rel_err_gap = kNaN;
      row.status = status_of(e);
    }
    return row;
  });
}

CsvTable scan_size_csv(const std::vector<ScanSizeRow>& rows) {
  CsvTable t{{"N", "rel_err_E0", "rel_err_gap", "status"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n_sites), format_value(r.rel_err_ground), format_value(r.rel_err_gap),
                      r.status});
  }
  return t;
}

RdmTable cmd_rdm_table(const RunConfig& config) {
  struct Column {
    std::vector<double> spectrum;
    std::string status;
  };
  const auto columns = parallel_map<Column>(kRdmTableTargets, [&](std::size_t t) {
    Column col;
    DmrgConfig dc = config.dmrg;
    dc.n_targets = static_cast<int>(t) + 1;
    dc.target_weights.clear();
    try {
      const DmrgResult r = run_dmrg(config.chain, dc);
      col.spectrum = center_block_record(r).lambdas;
      col.status = status_of(r);
    } catch (const std::exception& e) {
      col.status = status_of(e);
    }
    return col;
  });

  RdmTable table;
  for (const auto& col : columns) {
    std::vector<double> top(kRdmTableRanks, 0.0);
    for (std::size_t r = 0; r < top.size() && r < col.spectrum.size(); ++r) top[r] = std::max(col.spectrum[r], 0.0);
    if (col.spectrum.empty()) std::fill(top.begin(), top.end(), kNaN);
    table.columns.push_back(std::move(top));
    table.spectra.push_back(col.spectrum);
    table.status.push_back(col.status);
  }
  return table;
}

CsvTable rdm_table_csv(const RdmTable& table) {
  CsvTable t{{"rank"}, {}};
  for (int k = 1; k <= kRdmTableTargets; ++k) t.header.push_back("lambda_ntar" + std::to_string(k));
  for (int r = 0; r < kRdmTableRanks; ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    for (const auto& col : table.columns) row.push_back(format_value(col[r]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<SpectrumRow> cmd_spectrum(const RunConfig& config) {
  std::vector<int> sizes = config.size_list;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::vector<SpectrumRow> rows;
  for (int n_sites : sizes) {
    ChainSpec spec = config.chain;
    spec.n_sites = n_sites;
    const auto levels = spectrum(spec, config.count);
    for (std::size_t k = 0; k < levels.size(); ++k) rows.push_back({n_sites, static_cast<int>(k) + 1, levels[k]});
  }
  return rows;
}

CsvTable spectrum_csv(const std::vector<SpectrumRow>& rows) {
  CsvTable t{{"N", "level_index", "excitation_energy"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n_sites), std::to_string(r.level), format_value(r.excitation)});
  }
  return t;
}

CsvTable spectrum_gap_csv(const std::vector<SpectrumRow>& rows) {
  CsvTable t{{"N", "gap"}, {}};
  for (const auto& r : rows) {
    if (r.level == 1) t.rows.push_back({std::to_string(r.n_sites), format_value(r.excitation)});
  }
  return t;
}

namespace {

bool write_text(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    return true;
  }
  std::ofstream file(path);
  if (!file) {
    err << "oscdmrg: cannot write " << path << '\n';
    return false;
  }
  file << text;
  return static_cast<bool>(file);
}

std::string sidecar_path(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix + ".csv";
  return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DMRG with optimized local bases for a harmonic oscillator chain", "oscdmrg"};
  std::string command_name;
  std::string config_path;
  app.add_option("command", command_name, "analytic | ed | dmrg | scan-basis | scan-size | rdm-table | spectrum")
      ->required();
  app.add_option("--config", config_path, "flat 'key = value' file; flags override its keys");

  const std::map<std::string, std::string> help{
      {"N", "number of sites"},
      {"hbar", "dimensionless Planck constant"},
      {"m", "bare Fock states per site"},
      {"n", "kept block and site states"},
      {"n1", "bare states fed per basis refinement step"},
      {"ntar", "targeted states (ed: levels)"},
      {"sweeps", "finite-system sweeps"},
      {"seed", "eigensolver start-vector seed"},
      {"count", "spectrum levels per N"},
      {"delimiter", "CSV delimiter"},
      {"out", "output CSV path (default stdout)"},
      {"basis-mode", "bare | optimized"},
      {"n-list", "scan-basis values of n"},
      {"N-list", "scan-size / spectrum chain sizes"},
  };
  std::map<std::string, std::string> raw;
  for (const auto& key : config_keys()) {
    raw[key];
    app.add_option("--" + key, raw[key], help.at(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 1;
  }

  Command command;
  try {
    command = parse_command(command_name);
  } catch (const ArgumentError& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 1;
  }

  std::map<std::string, std::string> cli_values;
  for (const auto& key : config_keys()) {
    if (app.count("--" + key) > 0) cli_values[key] = raw[key];
  }

  RunConfig config;
  try {
    std::map<std::string, std::string> file_values;
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) throw ConfigError("cannot read config file " + config_path);
      std::stringstream buffer;
      buffer << file.rdbuf();
      file_values = parse_config_text(buffer.str());
    }
    config = resolve_config(command, file_values, cli_values);
  } catch (const ConfigError& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 3;
  } catch (const ArgumentError& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 1;
  }

  try {
    switch (command) {
      case Command::analytic:
        return write_text(config.output_path, render_csv(analytic_csv(cmd_analytic(config)), config), out, err) ? 0 : 1;
      case Command::ed:
        return write_text(config.output_path, render_csv(ed_csv(cmd_ed(config)), config), out, err) ? 0 : 1;
      case Command::dmrg: {
        const DmrgReport report = cmd_dmrg(config);
        if (!write_text(config.output_path, render_csv(dmrg_csv(report), config), out, err)) return 1;
        if (!report.result.converged) {
          err << "oscdmrg: sweeps did not converge to energy_tol\n";
          return 2;
        }
        return 0;
      }
      case Command::scan_basis:
        return write_text(config.output_path, render_csv(scan_basis_csv(cmd_scan_basis(config)), config), out, err)
                   ? 0
                   : 1;
      case Command::scan_size:
        return write_text(config.output_path, render_csv(scan_size_csv(cmd_scan_size(config)), config), out, err)
                   ? 0
                   : 1;
      case Command::rdm_table:
        return write_text(config.output_path, render_csv(rdm_table_csv(cmd_rdm_table(config)), config), out, err)
                   ? 0
                   : 1;
      case Command::spectrum: {
        const auto rows = cmd_spectrum(config);
        if (!write_text(config.output_path, render_csv(spectrum_csv(rows), config), out, err)) return 1;
        if (!config.output_path.empty()) {
          const std::string gap_path = sidecar_path(config.output_path, "_gap");
          if (!write_text(gap_path, render_csv(spectrum_gap_csv(rows), config), out, err)) return 1;
        }
        return 0;
      }
    }
  } catch (const ConvergenceError& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "oscdmrg: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace oscdmrg
