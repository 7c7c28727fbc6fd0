#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vortexlab/currents.hpp"
#include "vortexlab/energy.hpp"

namespace vortexlab {

/// One experiment section of a run configuration file.
struct RunConfig {
  std::string experiment;  // E1..E7
  std::string kernel = "indicator:1";
  std::string domain = "ball:1";
  std::string field = "vortex:0,0,1";
  std::vector<double> eps_list;
  int grid_div = 8;  // h = eps / grid_div
  int xi_radial = 64;
  int xi_angular = 64;
  int xi_axial = 16;
  std::vector<double> deltas{0.1, 0.2};
  double angle_deg = 30.0;
  int trials = 200;
  unsigned seed = 20240817;
  bool reduced = false;  // coarse-grid mode with the widened bracket (E7)
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;
};

/// Pinned setup for each built-in experiment.
RunConfig default_config(const std::string& experiment);

/// Parses the sectioned key=value config format ("[E1]" headers, '#'
/// comments). parse(serialize(cfgs)) == cfgs on the schema above.
std::vector<RunConfig> parse_config_text(const std::string& text);
std::vector<RunConfig> parse_config_file(const std::string& path);
std::string serialize_config(const std::vector<RunConfig>& cfgs);

struct SweepRow {
  double eps = 0.0;
  double value = 0.0;
  double reference = 0.0;
  double ratio = 0.0;
  double wall_ms = 0.0;
};

struct SweepReport {
  std::string experiment;
  std::vector<SweepRow> rows;  // ordered by eps descending
  std::uint64_t config_hash = 0;
  unsigned seed = 0;
  std::string version;
  bool passed = true;
  std::string criterion;  // one-line description of the pass condition
};

/// Runs the named experiment, writes report.csv and report.gp under
/// cfg.out_dir and returns the report. Deterministic for a fixed config
/// (wall_ms excluded).
SweepReport run_experiment(const RunConfig& cfg);

/// CSV with header "eps,value,reference,ratio,wall_ms".
void emit_table(const SweepReport& report, const std::string& path);
/// Text plot script (gnuplot) for the report table.
void emit_plot_script(const SweepReport& report, const std::string& csv_name,
                      const std::string& path);

/// Brute-force flat-distance reference: enumerates every pairing and
/// boundary assignment of the unit charges of a - b. Exponential; intended
/// for configurations with a handful of unit charges.
double flat_norm_by_enumeration(const AtomicCurrent& a, const AtomicCurrent& b, const Domain& U);

/// Pass thresholds shared by the experiments and the acceptance suite.
namespace criteria {
inline constexpr double kBbmRelTol = 1e-3;             // E1
inline constexpr double kVortexRatioLo = 0.7;          // E2
inline constexpr double kVortexRatioHi = 1.1;          // E2
inline constexpr double kXyRatioLo = 0.8;              // E3
inline constexpr double kXyRatioHi = 1.2;              // E3
inline constexpr double kFlatFactor = 10.0;            // E4/E6: distance <= 10 eps pi
inline constexpr double kMatchTol = 1e-9;              // E5
inline constexpr double kProductRatioLo = 0.6;         // E7
inline constexpr double kProductRatioHi = 1.1;         // E7
inline constexpr double kProductRatioLoReduced = 0.5;  // E7 reduced-grid mode
inline constexpr double kProductRatioHiReduced = 1.2;
}  // namespace criteria

}  // namespace vortexlab
