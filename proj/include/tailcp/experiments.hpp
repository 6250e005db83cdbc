#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailcp/changepoint.hpp"
#include "tailcp/error.hpp"
#include "tailcp/lmsv.hpp"

namespace tailcp {

struct ExperimentConfig {
  std::size_t n = 1000;
  double hurst = 0.6;
  double alpha = 2.0;
  double change_height = 0.0;
  double change_fraction = 0.5;
  double proportion = 0.1;  // k_n = floor(n p)
  std::size_t reps = 1000;
  double level = 0.05;
  EstimatorVariant variant = EstimatorVariant::Hill;
  T0Policy t0 = {};
  std::uint64_t master_seed = 1;
  InnovationFamily family = InnovationFamily::StandardPareto;
  CritvalSource critval_source = CritvalSource::MonteCarlo;
  double user_critval = kReferenceCritval95;
  std::size_t mc_paths = 100000;
  std::size_t mc_grid = 4096;
  std::uint64_t mc_seed = 20240601;

  /// Throws InvalidConfig (or InvalidSpec for model violations).
  void validate() const;
  LmsvSpec lmsv_spec(std::uint64_t seed) const;
  DecideOptions decide_options(unsigned workers) const;
  /// Stable identifier of every field; used as the journal key.
  std::string cell_id() const;
};

struct CellResult {
  ExperimentConfig config;
  double rejection_rate = 0.0;
  std::size_t reps = 0;        // denominator actually used
  std::size_t rejections = 0;
  std::size_t excluded = 0;    // reps dropped from the denominator
  std::size_t errors = 0;      // every rep that raised, excluded or not
  std::map<ErrorCode, std::size_t> errors_by_code;
  double mc_standard_error = 0.0;
  double mean_change_fraction = 0.0;  // over rejecting reps; NaN if none
  double critical_value = 0.0;
};

/// seed_i = mix64(master_seed, i).
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t i) noexcept;

CellResult rejection_rate(const ExperimentConfig& config, unsigned workers = 0);

struct LocationAccuracy {
  double fraction = 0.0;
  std::size_t hits = 0;
  std::size_t reps = 0;
  double tolerance = 0.05;
};

/// Fraction of replications whose argmax fraction lies within tolerance of tau.
LocationAccuracy location_accuracy(const ExperimentConfig& config, double tolerance = 0.05,
                                   unsigned workers = 0);

struct TableRunOptions {
  std::optional<std::filesystem::path> journal;
  unsigned workers = 0;
  std::string version;
};

struct TableArtifact {
  std::vector<CellResult> cells;
  std::size_t resumed = 0;  // cells taken from the journal
};

TableArtifact run_table(const std::vector<ExperimentConfig>& grid,
                        const TableRunOptions& options = {});

/// Delimited table, one row per cell, preceded by comment lines with the
/// master seed(s) and version. Contains nothing run-dependent.
std::string format_table(const TableArtifact& table, const std::string& version);

/// Parses a key-value grid file. `key = v1, v2, ...` lines expand to the
/// Cartesian product; `[grid]` starts a new block that inherits nothing.
std::vector<ExperimentConfig> parse_experiment_grid(const std::string& text);
std::vector<ExperimentConfig> load_experiment_grid(const std::filesystem::path& path);

}  // namespace tailcp
