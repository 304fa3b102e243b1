// Acceptance checks shared by the CLI runner and the acceptance binary.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bq/errors.hpp"
#include "bq/quad.hpp"

namespace bq {

struct ConfigError : Error {
  using Error::Error;
};

// Knobs shared by the criteria. Defaults are the acceptance settings.
struct SuiteParams {
  std::uint64_t seed = 20240917;
  int m = 4;                                         // base weight
  int level = 6;                                     // fundamental-domain rule level
  int disk_level = 5;                                // disk rule level
  int truncation = 60;                               // N for the trace checks
  std::vector<int> ladder = {40, 80};                // truncations for the cusp-form ladders
  int height = 30;                                   // Gamma height of the B-sum
  int poincare_height = 40;
  int q_depth = 200;
  std::vector<int> dictionary = {12, 16, 18, 20, 22, 24};
  std::map<std::string, double> tolerances;          // per-check overrides
  std::string cache_dir;                             // empty: BQ_CACHE_DIR or no cache

  void validate() const;  // throws ConfigError
};

enum class Relation { Less, LessEqual, Equal, LadderHalves };

struct Check {
  std::string name;
  double value = 0;
  double tolerance = 0;
  Relation relation = Relation::Less;
  bool pass = false;
  std::vector<double> ladder;  // residual ladder behind the value, when there is one
  double floor = 0;            // LadderHalves: both rungs below this also pass
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> reported;  // measured, not asserted
  double seconds = 0;
  std::string error;      // set when the criterion aborted with an exception
  bool capacity = false;  // the abort was a CapacityError
  bool pass() const;
};

// Residual-style check: value `rel` tolerance, with the tolerance replaced by
// params.tolerances[name] when present.
Check make_check(const SuiteParams& p, std::string name, double value, double tolerance,
                 Relation rel = Relation::Less);
// fine <= coarse / 2, or both rungs below `floor`.
Check ladder_check(const SuiteParams& p, std::string name, std::vector<double> ladder, double floor = 0);

inline constexpr int kCriterionCount = 12;

Criterion run_criterion(int id, const SuiteParams& p, const RuleCache& cache);
const char* criterion_title(int id);

}  // namespace bq
