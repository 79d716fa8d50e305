#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cim/ensemble.hpp"

/// Figure presets, configuration parsing and CSV output.
namespace cim::experiments {

// ---------------------------------------------------------------------------
// CSV tables

/// Plot-ready table. Missing values are NaN and are written as empty
/// fields. Numbers are written with 17 significant digits.
struct ResultTable {
  std::string name;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::size_t column_index(const std::string& column) const;
  double at(std::size_t row, const std::string& column) const;

  /// Equality with NaN == NaN.
  bool operator==(const ResultTable& other) const;
};

void write_csv(const ResultTable& table, std::ostream& out);
std::string to_csv(const ResultTable& table);
/// Inverse of write_csv. `name` is not stored in the CSV.
ResultTable read_csv(std::istream& in);
ResultTable parse_csv(const std::string& text);

// ---------------------------------------------------------------------------
// Configuration

/// Thrown for schema violations; the message starts with the key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses an ensemble configuration (JSON). Missing keys take defaults,
/// unknown keys are rejected.
ensemble::EnsembleConfig parse_ensemble_config(const std::string& json_text);
ensemble::EnsembleConfig load_ensemble_config(
    const std::filesystem::path& file);

/// Canonical JSON of a config, used for output metadata.
std::string describe_config(const ensemble::EnsembleConfig& config);

/// Table of an ensemble run: time column, then value and _se per output,
/// with the config and divergence counts as metadata.
ResultTable series_table(const ensemble::EnsembleSeries& series,
                         const ensemble::EnsembleConfig& config);

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {
      "fig4", "fig5",  "fig6",  "fig7",  "fig8", "fig9",
      "fig10", "fig11", "fig12", "fig13", "fig14"};
  return ids;
}

struct ExperimentSpec {
  std::string figure;
  std::filesystem::path out_dir = ".";
  /// Zero means the preset default (20000 continuous, 4000 discrete).
  std::size_t trajectories = 0;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  /// Squeezing parameters; empty means the preset default.
  std::vector<double> r;
  /// Thermal photon numbers; empty means the preset default.
  std::vector<double> n_th;
  /// Nominal pump grid (units of the linear threshold) for discrete
  /// figures; empty means the preset default.
  std::vector<double> p;
  /// Overrides of preset base parameters: g, xi, dt, total_time,
  /// sample_spacing, ring_size, mu, t_p, t_i, xi_ring, rounds,
  /// round_stride, substeps, e_max, tau_max.
  std::vector<std::pair<std::string, double>> overrides;

  void validate() const;
};

/// Parses an experiment spec (JSON). Unknown keys are rejected.
ExperimentSpec parse_experiment_spec(const std::string& json_text);

/// Runs a preset and returns its panels. Metadata lines record the full
/// configuration; reruns with the same spec give identical tables.
std::vector<ResultTable> run_experiment(const ExperimentSpec& spec);

/// Writes one CSV per panel and a JSON sidecar (runtime, workers) to
/// spec.out_dir. Returns the written paths.
std::vector<std::filesystem::path> write_experiment(
    const ExperimentSpec& spec, const std::vector<ResultTable>& panels,
    double runtime_seconds);

// ---------------------------------------------------------------------------
// Threshold scans

struct ThresholdScan {
  ResultTable table;  // pump_e, photon_number, photon_number_se
  discrete::ThresholdEstimate estimate;
};

/// Photon number after all round trips on each pump of `grid` (normalized
/// E), with the threshold from the maximum log-log slope.
ThresholdScan threshold_scan(const ensemble::EnsembleConfig& base,
                             const std::vector<double>& grid);

/// Threshold scan from JSON: an ensemble config for the discrete model plus
/// "pump_grid" (normalized E) or "p_grid" (units of the linear threshold).
ThresholdScan threshold_scan_from_json(const std::string& json_text);

}  // namespace cim::experiments
