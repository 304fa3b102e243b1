// Experiment runner: configs, report_v1 JSON, text tables, CSV and SVG output.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bq/checks.hpp"

namespace bq {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr const char* kReportSchema = "report_v1";

// Config schema (JSON object, every key optional):
//   seed, m, level, disk_level, truncation, height, poincare_height, q_depth: integers
//   ladder, dictionary: integer arrays
//   tolerances: object of check name -> number
//   cache_dir: string
// Unknown keys and wrong types raise ConfigError.
SuiteParams params_from_json(const std::string& text);
std::string params_to_json(const SuiteParams& p);
std::string config_hash(const SuiteParams& p);

// Commands and the criteria they run. full-suite runs 1..11 twice and adds
// the determinism criterion.
const std::vector<std::string>& command_names();
std::vector<int> command_criteria(const std::string& command);  // throws ConfigError

struct Report {
  std::string command;
  SuiteParams params;
  std::vector<Criterion> criteria;
  std::vector<std::string> cache_keys;
  std::string timestamp;
  double total_seconds = 0;
  bool pass() const;
  bool capacity_error() const;
};

using Progress = std::function<void(const Criterion&)>;
Report run_command(const std::string& command, const SuiteParams& p, const Progress& progress = {});

// `with_volatile` false drops timestamps and timings; the rest is deterministic.
std::string report_json(const Report& r, bool with_volatile = true);

// Human-readable table from a report_v1 document.
std::string render_table(const std::string& report_text);
// One row per ladder rung: criterion,check,rung,value.
std::string ladders_csv(const std::string& report_text);
// Log-scale polyline of a residual ladder.
std::string ladder_svg(const std::string& title, const std::vector<double>& ladder, const std::string& hash);
// Heat map of values on an nx-by-ny grid over [x0,x1] x [y0,y1]; row j is y index.
std::string heatmap_svg(const std::string& title, const std::vector<double>& values, int nx, int ny, double x0,
                        double x1, double y0, double y1, const std::string& hash);

}  // namespace bq
