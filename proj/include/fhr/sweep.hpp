#pragma once

// Parameter sweeps over a: the full pipeline per grid point, configuration
// files and tabular output.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fhr/complexity.hpp"
#include "fhr/dynsys.hpp"
#include "fhr/partition.hpp"
#include "fhr/refine.hpp"
#include "fhr/sections.hpp"

namespace fhr {

enum class Measure { EntropyRate, TopEntropy, Lyapunov, LempelZiv };
std::string to_string(Measure m);
Measure measure_from_string(const std::string& s);

struct SectionConfig {
  State3 normal{0.0, 1.0, 0.0};
  double offset = -0.588;
  bool offset_from_mean = false;  // offset = mean of normal . x over the run
  CrossingDirection direction = CrossingDirection::Positive;

  PlaneSection resolve(const Trajectory& traj) const;
};

enum class LzSource { Itinerary, Walk };

struct PipelineConfig {
  ModelParams model = DelNegroParams{};
  IntegratorConfig integrator;
  SectionConfig section;
  Axis observable = 2;
  double periodicity_tol = 1e-4;
  int max_period = 8;
  PartitionSpec partition;
  std::string partition_path;
  LyapunovConfig lyapunov;
  WordGrowthConfig word_growth;
  std::map<std::string, int> reduction;
  LzSource lz_source = LzSource::Itinerary;
  double gap_threshold = 0.2;
  MarkovOrderConfig order;
  RefineConfig refine;
  std::uint64_t seed = 20240;
  int workers = 1;
};

struct SweepConfig {
  PipelineConfig pipeline;
  double a_min = 0.7136;
  double a_max = 0.718;
  double a_step = 5e-5;
  std::set<Measure> measures{Measure::EntropyRate, Measure::TopEntropy, Measure::Lyapunov,
                             Measure::LempelZiv};

  void validate() const;
  /// a_min + i * a_step for i = 0..floor((a_max - a_min) / a_step + 1e-9).
  std::vector<double> grid() const;
};

/// Reads a JSON configuration; relative partition paths resolve against the
/// config file's directory. Missing keys keep their defaults.
SweepConfig load_config(const std::string& path);
SweepConfig config_from_json(const nlohmann::json& j, const std::string& base_dir);
nlohmann::json config_to_json(const SweepConfig& cfg);

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct SweepRow {
  double a = 0.0;
  std::string status = "ok";  // ok | partial | failed
  std::string periodicity;    // e.g. periodic(1), aperiodic
  double section_offset = kMissing;
  std::size_t crossings = 0;
  std::size_t events = 0;
  double h_rate = kMissing;
  double h_subshift = kMissing;
  double h_top = kMissing;        // word growth, nats per crossing
  double htop_pesin = kMissing;   // per unit time
  double mean_return_time = kMissing;
  std::array<double, 3> lambda{kMissing, kMissing, kMissing};
  std::array<double, 3> lambda_se{kMissing, kMissing, kMissing};
  int lyapunov_converged = -1;  // -1 not computed
  double lz_c = kMissing;
  double lz_norm = kMissing;
  std::string absent;  // regions never visited, ';'-separated
  std::string error;   // first failure, "Kind: message"
};

/// One grid point through the whole pipeline. Failures of individual
/// measures are recorded in the row; `index` selects the derived seed.
SweepRow run_point(double a, std::size_t index, const SweepConfig& cfg);

/// Rows in grid order; identical for any worker count.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

/// Entropy comparison per row. Throws MissingMeasure unless both the entropy
/// rate and the word-growth estimate were requested.
std::vector<EntropyReport> compare_report(const std::vector<SweepRow>& rows,
                                          const std::set<Measure>& measures);

extern const char* const kSweepHeader;
extern const char* const kComplexityHeader;
extern const char* const kReportHeader;

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_complexity_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_report_csv(std::ostream& os, const std::vector<EntropyReport>& reports);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
nlohmann::json reports_to_json(const std::vector<EntropyReport>& reports);

/// Parses a file written by write_sweep_csv.
std::vector<SweepRow> read_sweep_csv(std::istream& is);

/// Formats reals for tables: shortest round-trip form, "nan" when missing.
std::string format_real(double x);

}  // namespace fhr
