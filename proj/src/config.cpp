#include "duoloop/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "duoloop/errors.hpp"

namespace duoloop {

namespace {

struct UnitEntry {
  const char* suffix;
  double scale;
};

constexpr std::array<UnitEntry, 4> kFrequencyUnits{
    UnitEntry{"_hz", 1.0}, UnitEntry{"_khz", 1e3}, UnitEntry{"_mhz", 1e6},
    UnitEntry{"_ghz", 1e9}};
constexpr std::array<UnitEntry, 4> kTimeUnits{
    UnitEntry{"_s", 1.0}, UnitEntry{"_ms", 1e-3}, UnitEntry{"_us", 1e-6},
    UnitEntry{"_ns", 1e-9}};
constexpr std::array<UnitEntry, 2> kAngleUnits{
    UnitEntry{"_rad", 1.0}, UnitEntry{"_deg", std::numbers::pi / 180.0}};
constexpr std::array<UnitEntry, 1> kLengthUnits{UnitEntry{"_um", 1.0}};

double number_at(const Json& obj, const std::string& key,
                 const std::string& path) {
  const Json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: '" + path + "." + key + "' must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ConfigError("config: '" + path + "." + key + "' must be finite");
  }
  return d;
}

template <std::size_t N>
std::optional<double> read_with_units(const Json& obj,
                                      const std::string& stem,
                                      const std::array<UnitEntry, N>& units,
                                      const std::string& path) {
  if (!obj.is_object()) return std::nullopt;
  std::optional<double> value;
  std::string found_key;
  for (const UnitEntry& unit : units) {
    const std::string key = stem + unit.suffix;
    if (!obj.contains(key)) continue;
    if (value) {
      throw ConfigError("config: '" + path + "' gives both '" + found_key +
                        "' and '" + key + "'; keep one");
    }
    value = number_at(obj, key, path) * unit.scale;
    found_key = key;
  }
  if (!value && obj.contains(stem)) {
    throw ConfigError("config: '" + path + "." + stem +
                      "' is missing its unit suffix (e.g. '" + stem +
                      units[0].suffix + "')");
  }
  return value;
}

}  // namespace

Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& err) {
    // Recover line/column from the byte offset the parser reports.
    std::size_t line = 1, column = 1;
    const std::size_t limit =
        std::min<std::size_t>(err.byte > 0 ? err.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(origin + ": JSON parse error at line " +
                      std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + err.what());
  }
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config file '" + path.string() +
                      "' cannot be opened");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const Json config = parse_config_text(buffer.str(), path.string());
  if (!config.is_object()) {
    throw ConfigError("config file '" + path.string() +
                      "' must hold a JSON object");
  }
  return config;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const ValidationIssue& e : errors) {
    out += "error: " + e.path + ": " + e.message + "\n";
  }
  for (const ValidationIssue& w : warnings) {
    out += "warning: " + w.path + ": " + w.message + "\n";
  }
  if (out.empty()) out = "config ok\n";
  return out;
}

namespace {

enum class Unit { kNone, kLength, kFrequency, kTime, kAngle };
enum class Type { kNumber, kInteger, kString, kArray, kObject, kBool };

struct FieldSpec {
  const char* stem;
  Unit unit;
  Type type;
};

const std::vector<FieldSpec> kPhasorFields = {
    {"amplitude", Unit::kNone, Type::kNumber},
    {"phase", Unit::kAngle, Type::kNumber},
};

const std::vector<FieldSpec> kLoopFields = {
    {"shape", Unit::kNone, Type::kString},
    {"diameter", Unit::kLength, Type::kNumber},
    {"width", Unit::kLength, Type::kNumber},
    {"height", Unit::kLength, Type::kNumber},
    {"segments", Unit::kNone, Type::kInteger},
    {"winding", Unit::kNone, Type::kInteger},
};

const std::vector<FieldSpec> kGeometryFields = {
    {"inner_loop", Unit::kNone, Type::kObject},
    {"outer_loop", Unit::kNone, Type::kObject},
    {"inner_drive", Unit::kNone, Type::kObject},
    {"site_spacing", Unit::kLength, Type::kNumber},
    {"ring_count", Unit::kNone, Type::kInteger},
    {"probe_height", Unit::kLength, Type::kNumber},
};

const std::vector<FieldSpec> kPointFields = {
    {"x", Unit::kLength, Type::kNumber},
    {"y", Unit::kLength, Type::kNumber},
    {"z", Unit::kLength, Type::kNumber},
};

const std::vector<FieldSpec> kSpinFields = {
    {"resonance", Unit::kFrequency, Type::kNumber},
    {"zero_field_splitting", Unit::kFrequency, Type::kNumber},
    {"gyromagnetic_hz_per_t", Unit::kNone, Type::kNumber},
    {"t_base", Unit::kTime, Type::kNumber},
    {"contrast_max", Unit::kNone, Type::kNumber},
    {"saturation_power_hz2", Unit::kNone, Type::kNumber},
    {"odmr_sigma", Unit::kFrequency, Type::kNumber},
    {"shots", Unit::kNone, Type::kInteger},
    {"readout_photons", Unit::kNone, Type::kNumber},
    {"polarize_pulse", Unit::kTime, Type::kNumber},
    {"readout_pulse", Unit::kTime, Type::kNumber},
    {"signal_window", Unit::kTime, Type::kNumber},
    {"reference_window", Unit::kTime, Type::kNumber},
};

const std::vector<FieldSpec> kDriveFields = {
    {"rabi", Unit::kFrequency, Type::kNumber},
    {"phase", Unit::kAngle, Type::kNumber},
    {"detuning", Unit::kFrequency, Type::kNumber},
};

const std::vector<FieldSpec> kNoiseFields = {
    {"rabi", Unit::kFrequency, Type::kNumber},
    {"phase", Unit::kAngle, Type::kNumber},
    {"policy", Unit::kNone, Type::kString},
    {"suppression", Unit::kNone, Type::kNumber},
};

const std::vector<FieldSpec> kScanFields = {
    {"x_min", Unit::kLength, Type::kNumber},
    {"x_max", Unit::kLength, Type::kNumber},
    {"step", Unit::kLength, Type::kNumber},
    {"z", Unit::kLength, Type::kNumber},
    {"direction", Unit::kNone, Type::kArray},
};

const std::vector<FieldSpec> kMapFields = {
    {"x_min", Unit::kLength, Type::kNumber},
    {"x_max", Unit::kLength, Type::kNumber},
    {"y_min", Unit::kLength, Type::kNumber},
    {"y_max", Unit::kLength, Type::kNumber},
    {"nx", Unit::kNone, Type::kInteger},
    {"ny", Unit::kNone, Type::kInteger},
    {"z", Unit::kLength, Type::kNumber},
};

const std::vector<FieldSpec> kRatioSweepFields = {
    {"factors", Unit::kNone, Type::kArray},
    {"x_min", Unit::kLength, Type::kNumber},
    {"x_max", Unit::kLength, Type::kNumber},
};

const std::vector<FieldSpec> kPhaseSweepFields = {
    {"points", Unit::kNone, Type::kInteger},
    {"ratio", Unit::kNone, Type::kNumber},
    {"remote", Unit::kNone, Type::kObject},
};

const std::vector<FieldSpec> kRabiFields = {
    {"tau_max", Unit::kTime, Type::kNumber},
    {"tau_points", Unit::kNone, Type::kInteger},
};

const std::vector<FieldSpec> kOdmrFields = {
    {"f_min", Unit::kFrequency, Type::kNumber},
    {"f_max", Unit::kFrequency, Type::kNumber},
    {"points", Unit::kNone, Type::kInteger},
    {"photons_per_point", Unit::kNone, Type::kNumber},
    {"tones", Unit::kNone, Type::kArray},
};

const std::vector<FieldSpec> kContrastFields = {
    {"static_offset", Unit::kAngle, Type::kNumber},
    {"phase_points", Unit::kNone, Type::kInteger},
    {"photons_per_point", Unit::kNone, Type::kNumber},
    {"inner_rabi", Unit::kFrequency, Type::kNumber},
    {"outer_rabi", Unit::kFrequency, Type::kNumber},
};

const std::vector<FieldSpec> kScenarioFields = {
    {"name", Unit::kNone, Type::kString},
    {"single_fit_window_um", Unit::kNone, Type::kArray},
    {"dual_fit_window_um", Unit::kNone, Type::kArray},
    {"factors", Unit::kNone, Type::kArray},
    {"powers_w", Unit::kNone, Type::kArray},
    {"coupling_t_per_sqrt_w", Unit::kNone, Type::kNumber},
    {"antenna_efficiency_ratio", Unit::kNone, Type::kNumber},
    {"target_t", Unit::kTime, Type::kNumber},
    {"suppression", Unit::kNone, Type::kNumber},
    {"suppression_grid", Unit::kNone, Type::kArray},
    {"noise_db_grid", Unit::kNone, Type::kArray},
    {"imbalance_db", Unit::kNone, Type::kNumber},
};

const std::vector<std::string> kScenarioNames = {
    "fig1d_line_scan",     "fig1g_ratio_sweep",
    "fig1h_phase_sweep",   "fig3k_power_scaling",
    "fig4c_phase_contrast", "fig4_rabi_suite",
    "detuning_equivalence", "coherence_penalty_curve",
};

template <std::size_t N>
bool suffix_in(const std::string& key, const std::string& stem,
               const std::array<UnitEntry, N>& units) {
  for (const UnitEntry& unit : units) {
    if (key == stem + unit.suffix) return true;
  }
  return false;
}

template <std::size_t N>
std::string suffix_list(const std::array<UnitEntry, N>& units) {
  std::string out;
  for (const UnitEntry& unit : units) {
    if (!out.empty()) out += ", ";
    out += unit.suffix;
  }
  return out;
}

bool type_matches(const Json& v, Type type) {
  switch (type) {
    case Type::kNumber:
      return v.is_number();
    case Type::kInteger:
      return v.is_number_integer();
    case Type::kString:
      return v.is_string();
    case Type::kArray:
      return v.is_array();
    case Type::kObject:
      return v.is_object();
    case Type::kBool:
      return v.is_boolean();
  }
  return false;
}

const char* type_name(Type type) {
  switch (type) {
    case Type::kNumber:
      return "number";
    case Type::kInteger:
      return "integer";
    case Type::kString:
      return "string";
    case Type::kArray:
      return "array";
    case Type::kObject:
      return "object";
    case Type::kBool:
      return "boolean";
  }
  return "?";
}

// Match one key against a block's field list.  On a match the type is
// checked; otherwise an error with a suffix hint is recorded.
void check_key(const std::string& block, const std::string& key,
               const Json& value, const std::vector<FieldSpec>& fields,
               ValidationReport& report) {
  const std::string path = block.empty() ? key : block + "." + key;
  for (const FieldSpec& field : fields) {
    const bool name_matches =
        (field.unit == Unit::kNone && key == field.stem) ||
        (field.unit == Unit::kLength &&
         suffix_in(key, field.stem, kLengthUnits)) ||
        (field.unit == Unit::kFrequency &&
         suffix_in(key, field.stem, kFrequencyUnits)) ||
        (field.unit == Unit::kTime && suffix_in(key, field.stem, kTimeUnits)) ||
        (field.unit == Unit::kAngle &&
         suffix_in(key, field.stem, kAngleUnits));
    if (name_matches) {
      if (!type_matches(value, field.type)) {
        report.errors.push_back(
            {path, std::string("must be a ") + type_name(field.type)});
      } else if (field.type == Type::kNumber &&
                 !std::isfinite(value.get<double>())) {
        report.errors.push_back({path, "must be finite"});
      }
      return;
    }
  }
  // No match: try to say something more helpful than "unknown key".
  for (const FieldSpec& field : fields) {
    if (field.unit == Unit::kNone) continue;
    std::string valid;
    switch (field.unit) {
      case Unit::kLength:
        valid = suffix_list(kLengthUnits);
        break;
      case Unit::kFrequency:
        valid = suffix_list(kFrequencyUnits);
        break;
      case Unit::kTime:
        valid = suffix_list(kTimeUnits);
        break;
      case Unit::kAngle:
        valid = suffix_list(kAngleUnits);
        break;
      default:
        break;
    }
    if (key == field.stem) {
      report.errors.push_back(
          {path, "missing unit suffix; valid suffixes: " + valid});
      return;
    }
    if (key.rfind(std::string(field.stem) + "_", 0) == 0) {
      report.errors.push_back(
          {path, "unsupported unit suffix; valid suffixes: " + valid});
      return;
    }
  }
  report.errors.push_back({path, "unknown key"});
}

void check_block(const std::string& block, const Json& obj,
                 const std::vector<FieldSpec>& fields,
                 ValidationReport& report) {
  if (!obj.is_object()) {
    report.errors.push_back({block, "must be an object"});
    return;
  }
  for (const auto& [key, value] : obj.items()) {
    check_key(block, key, value, fields, report);
  }
}

void check_loop_block(const std::string& path, const Json& obj,
                      ValidationReport& report) {
  check_block(path, obj, kLoopFields, report);
  if (!obj.is_object()) return;
  std::string shape = obj.value("shape", std::string("circle"));
  if (shape != "circle" && shape != "rectangle") {
    report.errors.push_back(
        {path + ".shape", "must be 'circle' or 'rectangle'"});
  }
  if (obj.contains("diameter_um") && obj["diameter_um"].is_number() &&
      obj["diameter_um"].get<double>() <= 0.0) {
    report.errors.push_back({path + ".diameter_um", "must be > 0"});
  }
  for (const char* side : {"width_um", "height_um"}) {
    if (obj.contains(side) && obj[side].is_number() &&
        obj[side].get<double>() <= 0.0) {
      report.errors.push_back({path + "." + side, "must be > 0"});
    }
  }
  if (obj.contains("segments") && obj["segments"].is_number_integer()) {
    const long segments = obj["segments"].get<long>();
    if (shape == "circle" && segments < kMinLoopSegments) {
      report.errors.push_back(
          {path + ".segments",
           "must be >= " + std::to_string(kMinLoopSegments)});
    }
    if (shape == "rectangle" && segments != 0 &&
        4 * segments < kMinLoopSegments) {
      report.errors.push_back(
          {path + ".segments", "per-side count must give >= " +
                                   std::to_string(kMinLoopSegments) +
                                   " segments in total (or 0 for automatic)"});
    }
  }
  if (obj.contains("winding") && obj["winding"].is_number_integer()) {
    const long w = obj["winding"].get<long>();
    if (w != 1 && w != -1) {
      report.errors.push_back({path + ".winding", "must be +1 or -1"});
    }
  }
}

}  // namespace

ValidationReport validate_config(const Json& config) {
  ValidationReport report;
  if (!config.is_object()) {
    report.errors.push_back({"$", "config root must be a JSON object"});
    return report;
  }

  for (const auto& [key, value] : config.items()) {
    if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        report.errors.push_back({"seed", "must be a non-negative integer"});
      }
    } else if (key == "notes") {
      // free-form annotation: a string or an array of strings, never read
      bool ok = value.is_string();
      if (value.is_array()) {
        ok = true;
        for (const Json& item : value) ok = ok && item.is_string();
      }
      if (!ok) {
        report.errors.push_back(
            {"notes", "must be a string or an array of strings"});
      }
    } else if (key == "geometry") {
      check_block("geometry", value, kGeometryFields, report);
      if (value.is_object()) {
        if (value.contains("inner_loop")) {
          check_loop_block("geometry.inner_loop", value["inner_loop"], report);
        }
        if (value.contains("outer_loop")) {
          check_loop_block("geometry.outer_loop", value["outer_loop"], report);
        }
        if (value.contains("inner_drive")) {
          check_block("geometry.inner_drive", value["inner_drive"],
                      kPhasorFields, report);
        }
        if (value.contains("ring_count") &&
            value["ring_count"].is_number_integer() &&
            value["ring_count"].get<long>() < 0) {
          report.errors.push_back({"geometry.ring_count", "must be >= 0"});
        }
        if (value.contains("site_spacing_um") &&
            value["site_spacing_um"].is_number() &&
            value["site_spacing_um"].get<double>() <= 0.0) {
          report.errors.push_back({"geometry.site_spacing_um", "must be > 0"});
        }
      }
    } else if (key == "target") {
      check_block("target", value, kPointFields, report);
    } else if (key == "spin") {
      check_block("spin", value, kSpinFields, report);
      if (value.is_object()) {
        if (value.contains("contrast_max") &&
            value["contrast_max"].is_number()) {
          const double c = value["contrast_max"].get<double>();
          if (!(c > 0.0) || c > 1.0) {
            report.errors.push_back(
                {"spin.contrast_max", "must be in (0, 1]"});
          }
        }
        if (value.contains("shots") && value["shots"].is_number_integer() &&
            value["shots"].get<long>() < 1) {
          report.errors.push_back({"spin.shots", "must be >= 1"});
        }
      }
    } else if (key == "drive") {
      check_block("drive", value, kDriveFields, report);
    } else if (key == "noise") {
      check_block("noise", value, kNoiseFields, report);
      if (value.is_object()) {
        if (value.contains("policy") && value["policy"].is_string()) {
          const std::string policy = value["policy"].get<std::string>();
          if (policy != "uniform" && policy != "fixed") {
            report.errors.push_back(
                {"noise.policy", "must be 'uniform' or 'fixed'"});
          }
        }
        if (value.contains("suppression") &&
            value["suppression"].is_number()) {
          const double s = value["suppression"].get<double>();
          if (s < 0.0 || s > 1.0) {
            report.errors.push_back(
                {"noise.suppression", "must be in [0, 1]"});
          }
        }
      }
    } else if (key == "scan") {
      check_block("scan", value, kScanFields, report);
    } else if (key == "map") {
      check_block("map", value, kMapFields, report);
    } else if (key == "ratio_sweep") {
      check_block("ratio_sweep", value, kRatioSweepFields, report);
    } else if (key == "phase_sweep") {
      check_block("phase_sweep", value, kPhaseSweepFields, report);
      if (value.is_object() && value.contains("remote")) {
        check_block("phase_sweep.remote", value["remote"], kPointFields,
                    report);
      }
    } else if (key == "rabi") {
      check_block("rabi", value, kRabiFields, report);
    } else if (key == "odmr") {
      check_block("odmr", value, kOdmrFields, report);
      if (value.is_object() && value.contains("tones") &&
          value["tones"].is_array()) {
        int index = 0;
        for (const Json& tone : value["tones"]) {
          check_block("odmr.tones[" + std::to_string(index) + "]", tone,
                      kDriveFields, report);
          ++index;
        }
      }
    } else if (key == "contrast") {
      check_block("contrast", value, kContrastFields, report);
    } else if (key == "scenario") {
      check_block("scenario", value, kScenarioFields, report);
      if (value.is_object() && value.contains("name") &&
          value["name"].is_string()) {
        const std::string name = value["name"].get<std::string>();
        bool known = false;
        for (const std::string& candidate : kScenarioNames) {
          known = known || candidate == name;
        }
        if (!known) {
          std::string valid;
          for (const std::string& candidate : kScenarioNames) {
            if (!valid.empty()) valid += ", ";
            valid += candidate;
          }
          report.errors.push_back(
              {"scenario.name",
               "unknown scenario '" + name + "'; valid names: " + valid});
        }
      }
    } else {
      report.errors.push_back({key, "unknown top-level key"});
    }
  }

  // Physical-sanity warnings that do not block execution.
  try {
    const auto [inner, outer] = loops_from_config(config);
    const double spacing_um = site_spacing_um_from_config(config);
    const double outer_extent_um =
        m_to_um(outer.shape == LoopShape::kCircle
                    ? 0.5 * outer.diameter
                    : 0.5 * std::max(outer.width, outer.height));
    if (spacing_um <= outer_extent_um) {
      report.warnings.push_back(
          {"geometry.site_spacing_um",
           "first-neighbour site at " + std::to_string(spacing_um) +
               " um lies inside the outer loop (half-extent " +
               std::to_string(outer_extent_um) + " um); crosstalk "
               "cancellation there is not meaningful"});
    }
  } catch (const Error&) {
    // Construction problems are already reported as errors above.
  }
  return report;
}

std::uint64_t config_seed(const Json& config,
                          std::optional<std::uint64_t> cli_override) {
  if (cli_override) return *cli_override;
  if (config.is_object() && config.contains("seed")) {
    if (!config["seed"].is_number_integer() ||
        config["seed"].get<long long>() < 0) {
      throw ConfigError("config: 'seed' must be a non-negative integer");
    }
    return config["seed"].get<std::uint64_t>();
  }
  return 1;
}

std::string config_hash8(const Json& config) {
  // FNV-1a over the canonical (sorted-key) serialization.
  const std::string dump = config.dump();
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char byte : dump) {
    hash ^= byte;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf).substr(0, 8);
}

double read_length_um(const Json& obj, const std::string& stem,
                      const std::string& path, double fallback) {
  return read_with_units(obj, stem, kLengthUnits, path).value_or(fallback);
}

double read_frequency_hz(const Json& obj, const std::string& stem,
                         const std::string& path, double fallback) {
  return read_with_units(obj, stem, kFrequencyUnits, path).value_or(fallback);
}

double read_time_s(const Json& obj, const std::string& stem,
                   const std::string& path, double fallback) {
  return read_with_units(obj, stem, kTimeUnits, path).value_or(fallback);
}

double read_angle_rad(const Json& obj, const std::string& stem,
                      const std::string& path, double fallback) {
  return read_with_units(obj, stem, kAngleUnits, path).value_or(fallback);
}

double read_number(const Json& obj, const std::string& key,
                   const std::string& path, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number_at(obj, key, path);
}

long read_integer(const Json& obj, const std::string& key,
                  const std::string& path, long fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: '" + path + "." + key +
                      "' must be an integer");
  }
  return v.get<long>();
}

namespace {

const Json kEmptyObject = Json::object();

const Json& block_at(const Json& config, const char* name) {
  if (config.is_object() && config.contains(name)) {
    const Json& block = config.at(name);
    if (!block.is_object()) {
      throw ConfigError("config: '" + std::string(name) +
                        "' must be an object");
    }
    return block;
  }
  return kEmptyObject;
}

Phasor phasor_from(const Json& obj, const std::string& path) {
  const double amplitude = read_number(obj, "amplitude", path, 1.0);
  const double phase = read_angle_rad(obj, "phase", path, 0.0);
  if (amplitude < 0.0) {
    throw ConfigError("config: '" + path + ".amplitude' must be >= 0");
  }
  return Phasor(amplitude, phase);
}

LoopSpec loop_from(const Json& obj, const std::string& path,
                   double default_diameter_um, const Phasor& drive) {
  const std::string shape = obj.is_object()
                                ? obj.value("shape", std::string("circle"))
                                : std::string("circle");
  const int winding =
      static_cast<int>(read_integer(obj, "winding", path, 1));
  if (shape == "circle") {
    const double diameter =
        read_length_um(obj, "diameter", path, default_diameter_um);
    const int segments = static_cast<int>(
        read_integer(obj, "segments", path, kDefaultCircleSegments));
    return LoopSpec::circle_um(diameter, Point3{0, 0, 0}, drive, winding,
                               segments);
  }
  if (shape == "rectangle") {
    const double width =
        read_length_um(obj, "width", path, default_diameter_um);
    const double height =
        read_length_um(obj, "height", path, default_diameter_um);
    const int segments =
        static_cast<int>(read_integer(obj, "segments", path, 0));
    return LoopSpec::rectangle_um(width, height, Point3{0, 0, 0}, drive,
                                  winding, segments);
  }
  throw ConfigError("config: '" + path +
                    ".shape' must be 'circle' or 'rectangle'");
}

}  // namespace

std::pair<LoopSpec, LoopSpec> loops_from_config(const Json& config) {
  const Json& geometry = block_at(config, "geometry");
  const Phasor inner_drive =
      geometry.contains("inner_drive")
          ? phasor_from(geometry.at("inner_drive"), "geometry.inner_drive")
          : Phasor(1.0, 0.0);
  const LoopSpec inner =
      loop_from(geometry.contains("inner_loop") ? geometry.at("inner_loop")
                                                : kEmptyObject,
                "geometry.inner_loop", 15.0, inner_drive);
  // The outer loop's drive is produced by the cancellation solver; start
  // from a unit drive to keep the per-unit field bookkeeping obvious.
  const LoopSpec outer =
      loop_from(geometry.contains("outer_loop") ? geometry.at("outer_loop")
                                                : kEmptyObject,
                "geometry.outer_loop", 38.0, Phasor(1.0, 0.0));
  return {inner, outer};
}

double site_spacing_um_from_config(const Json& config) {
  const Json& geometry = block_at(config, "geometry");
  const double spacing =
      read_length_um(geometry, "site_spacing", "geometry", 60.0);
  if (!(spacing > 0.0)) {
    throw ConfigError("config: 'geometry.site_spacing_um' must be > 0");
  }
  return spacing;
}

double probe_height_um_from_config(const Json& config) {
  const Json& geometry = block_at(config, "geometry");
  return read_length_um(geometry, "probe_height", "geometry", 1.0);
}

Point3 target_from_config(const Json& config) {
  const double spacing = site_spacing_um_from_config(config);
  const double height = probe_height_um_from_config(config);
  if (config.is_object() && config.contains("target")) {
    const Json& target = config.at("target");
    return Point3::from_um(read_length_um(target, "x", "target", spacing),
                           read_length_um(target, "y", "target", 0.0),
                           read_length_um(target, "z", "target", height));
  }
  return Point3::from_um(spacing, 0.0, height);
}

SpinParams spin_from_config(const Json& config,
                            std::optional<std::uint64_t> seed_override) {
  const Json& spin = block_at(config, "spin");
  SpinParams defaults;
  SpinParams params;
  params.resonance_hz =
      read_frequency_hz(spin, "resonance", "spin", defaults.resonance_hz);
  params.zero_field_splitting_hz =
      read_frequency_hz(spin, "zero_field_splitting", "spin",
                        defaults.zero_field_splitting_hz);
  params.gyromagnetic_hz_per_t =
      read_number(spin, "gyromagnetic_hz_per_t", "spin",
                  defaults.gyromagnetic_hz_per_t);
  params.t_base_s = read_time_s(spin, "t_base", "spin", defaults.t_base_s);
  params.contrast_max =
      read_number(spin, "contrast_max", "spin", defaults.contrast_max);
  params.saturation_power = read_number(spin, "saturation_power_hz2", "spin",
                                        defaults.saturation_power);
  params.odmr_sigma_hz =
      read_frequency_hz(spin, "odmr_sigma", "spin", defaults.odmr_sigma_hz);
  params.shots =
      static_cast<int>(read_integer(spin, "shots", "spin", defaults.shots));
  params.readout_photons = read_number(spin, "readout_photons", "spin",
                                       defaults.readout_photons);
  params.polarize_pulse_s =
      read_time_s(spin, "polarize_pulse", "spin", defaults.polarize_pulse_s);
  params.readout_pulse_s =
      read_time_s(spin, "readout_pulse", "spin", defaults.readout_pulse_s);
  params.signal_window_s =
      read_time_s(spin, "signal_window", "spin", defaults.signal_window_s);
  params.reference_window_s = read_time_s(spin, "reference_window", "spin",
                                          defaults.reference_window_s);
  params.seed = config_seed(config, seed_override);
  validate(params);
  return params;
}

DriveTone drive_from_config(const Json& config) {
  const Json& drive = block_at(config, "drive");
  DriveTone tone;
  tone.rabi_hz = read_frequency_hz(drive, "rabi", "drive", 7e6);
  tone.phase = read_angle_rad(drive, "phase", "drive", 0.0);
  tone.detuning_hz = read_frequency_hz(drive, "detuning", "drive", 0.0);
  return tone;
}

NoiseModel noise_from_config(const Json& config) {
  const Json& noise = block_at(config, "noise");
  NoiseModel model;
  model.rabi_hz = read_frequency_hz(noise, "rabi", "noise", 0.0);
  model.phase = read_angle_rad(noise, "phase", "noise", 0.0);
  model.suppression = read_number(noise, "suppression", "noise", 1.0);
  const std::string policy =
      noise.is_object() ? noise.value("policy", std::string("uniform"))
                        : std::string("uniform");
  if (policy == "uniform") {
    model.policy = NoisePhasePolicy::kUniformRandom;
  } else if (policy == "fixed") {
    model.policy = NoisePhasePolicy::kFixed;
  } else {
    throw ConfigError("config: 'noise.policy' must be 'uniform' or 'fixed'");
  }
  return model;
}

}  // namespace duoloop
