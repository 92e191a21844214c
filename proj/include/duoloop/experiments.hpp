#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duoloop/config.hpp"
#include "duoloop/csv.hpp"

namespace duoloop {

/// Output of one named scenario: tables destined for CSV files, a metrics
/// summary, and the provenance (config hash, seed, library version) needed
/// to reproduce it.
struct ScenarioResult {
  std::string scenario;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<Table> tables;
  Json summary;  // includes a "metrics" object
};

/// Names accepted in the config's scenario block.
const std::vector<std::string>& scenario_names();

/// Run the scenario named in config["scenario"]["name"].  Every scenario
/// runs with sensible defaults from an empty config; block values override
/// them.  Unknown names raise ConfigError listing the valid ones.
ScenarioResult run_scenario(const Json& config,
                            std::optional<std::uint64_t> seed_override =
                                std::nullopt);

/// Write the result under `out_dir` as
///   <scenario>__<hash8>.csv              (single-table scenarios)
///   <scenario>__<hash8>__<table>.csv     (one per table otherwise)
///   <scenario>__<hash8>.summary.json
/// using atomic file replacement; returns the paths written.
std::vector<std::filesystem::path> write_result(
    const ScenarioResult& result, const std::filesystem::path& out_dir);

struct MetricCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  std::vector<MetricCheck> checks;

  bool pass() const;
  std::string to_string() const;
};

/// Check result metrics against a reference record of the form
///   {"scenario": name, "metrics": {key: {"value": v, "tol_abs": a}
///                                  or   {"value": v, "tol_rel": r}}}.
/// A wrong scenario name or a metric missing from the result is a schema
/// problem and raises ComparisonError rather than a failed check.
ComparisonReport compare_to_reference(const ScenarioResult& result,
                                      const Json& reference);

}  // namespace duoloop
