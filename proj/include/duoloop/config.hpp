#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "duoloop/cancellation.hpp"
#include "duoloop/geometry.hpp"
#include "duoloop/spin.hpp"

namespace duoloop {

using Json = nlohmann::json;

/// Parse a JSON config file.  Syntax problems raise ConfigError with the
/// file name plus line and column of the offending byte.
Json load_config_file(const std::filesystem::path& path);
Json parse_config_text(const std::string& text, const std::string& origin);

struct ValidationIssue {
  std::string path;     // dotted key path, e.g. "spin.resonance_hz"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  std::string to_string() const;
};

/// Static schema and invariant checks: unknown keys (with unit-suffix
/// hints), missing unit suffixes on dimensioned keys, type mismatches, and
/// physical-sanity warnings (e.g. a neighbour site inside the outer loop).
/// Never runs a simulation.
ValidationReport validate_config(const Json& config);

/// Effective top-level seed: CLI override first, then config, then 1.
std::uint64_t config_seed(const Json& config,
                          std::optional<std::uint64_t> cli_override);

/// First 8 hex digits of a stable hash of the canonicalized (sorted-key)
/// config serialization; used to name output files.
std::string config_hash8(const Json& config);

// ---- typed extractors -----------------------------------------------------
// All extractors throw ConfigError naming the offending key path.  Units
// accept any listed suffix (frequencies: _hz/_khz/_mhz/_ghz; times:
// _s/_ms/_us/_ns; angles: _rad/_deg; lengths are always _um).

/// The inner/outer loop pair from the geometry block (defaults: 15 um and
/// 38 um circles in the z = 0 plane, inner drive 1 A at phase 0).
std::pair<LoopSpec, LoopSpec> loops_from_config(const Json& config);

/// Cancellation target point (default: the first-neighbour site at the
/// probe height, i.e. (site_spacing, 0, probe_height)).
Point3 target_from_config(const Json& config);

double site_spacing_um_from_config(const Json& config);
double probe_height_um_from_config(const Json& config);

SpinParams spin_from_config(const Json& config,
                            std::optional<std::uint64_t> seed_override);

/// Local drive tone (default 7 MHz Rabi at phase 0).
DriveTone drive_from_config(const Json& config);

NoiseModel noise_from_config(const Json& config);

// Low-level helpers shared by the CLI and the scenario runner.
double read_length_um(const Json& obj, const std::string& stem,
                      const std::string& path, double fallback);
double read_frequency_hz(const Json& obj, const std::string& stem,
                         const std::string& path, double fallback);
double read_time_s(const Json& obj, const std::string& stem,
                   const std::string& path, double fallback);
double read_angle_rad(const Json& obj, const std::string& stem,
                      const std::string& path, double fallback);
double read_number(const Json& obj, const std::string& key,
                   const std::string& path, double fallback);
long read_integer(const Json& obj, const std::string& key,
                  const std::string& path, long fallback);

}  // namespace duoloop
