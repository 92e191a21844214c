#include "duoloop/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "duoloop/cancellation.hpp"
#include "duoloop/config.hpp"
#include "duoloop/csv.hpp"
#include "duoloop/errors.hpp"
#include "duoloop/experiments.hpp"
#include "duoloop/magnetostatics.hpp"
#include "duoloop/spin.hpp"
#include "duoloop/units.hpp"
#include "duoloop/version.hpp"

namespace duoloop {

namespace {

namespace fs = std::filesystem;

/// Options shared by every subcommand.
struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  std::string layout = "dual";  // field-map / line-scan only
  std::string reference_path;   // scenario only
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON config file")
      ->required();
  cmd->add_option("-o,--out", opts.out_dir,
                  "output directory (default: $DUOLOOP_OUT or '.')");
  cmd->add_option("-s,--seed", opts.seed, "override the config seed");
  cmd->add_flag("-v,--verbose", opts.verbose,
                "print the effective seed and config hash");
}

/// One provenance line, printed when --verbose is set.
void note_provenance(const CommonOpts& opts, const Json& config,
                     std::uint64_t seed) {
  if (!opts.verbose) return;
  Json effective = config;
  effective["seed"] = seed;
  std::printf("seed %llu, config hash %s, version %s\n",
              static_cast<unsigned long long>(seed),
              config_hash8(effective).c_str(), kVersion);
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  if (!opts.out_dir.empty()) return fs::path(opts.out_dir);
  if (const char* env = std::getenv("DUOLOOP_OUT"); env && *env) {
    return fs::path(env);
  }
  return fs::path(".");
}

/// Load + schema-check the config; warnings go to stderr, errors become
/// ConfigError (exit code 2).
Json load_validated(const std::string& path) {
  const Json config = load_config_file(path);
  const ValidationReport report = validate_config(config);
  if (!report.ok()) {
    throw ConfigError("config validation failed:\n" + report.to_string());
  }
  for (const ValidationIssue& w : report.warnings) {
    std::cerr << "warning: " << w.path << ": " << w.message << "\n";
  }
  return config;
}

/// Stem used to name output files: <command>__<hash8> over the effective
/// config (CLI seed override folded in, so reruns with a different seed get
/// a different file).
std::string output_stem(const std::string& command, const Json& config,
                        std::uint64_t seed) {
  Json effective = config;
  effective["seed"] = seed;
  return command + "__" + config_hash8(effective);
}

Json point_json(const Point3& p) {
  return Json{{"x_um", p.x_um()}, {"y_um", p.y_um()}, {"z_um", p.z_um()}};
}

/// The loop set selected by --layout: the bare inner loop, or the pair with
/// the cancellation drive applied.
std::vector<LoopSpec> layout_loops(const Json& config,
                                   const std::string& layout) {
  auto [inner, outer] = loops_from_config(config);
  if (layout == "single") return {inner};
  const CancellationSolution sol = solve(inner, outer,
                                         target_from_config(config));
  return apply(sol, inner, outer);
}

// ---- subcommands ------------------------------------------------------

void run_field_map(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const std::uint64_t seed = config_seed(config, opts.seed);
  note_provenance(opts, config, seed);
  const Json& map = config.contains("map") && config["map"].is_object()
                        ? config["map"]
                        : Json::object();
  const double z =
      read_length_um(map, "z", "map", probe_height_um_from_config(config));
  const double x_min = read_length_um(map, "x_min", "map", -80.0);
  const double x_max = read_length_um(map, "x_max", "map", 80.0);
  const double y_min = read_length_um(map, "y_min", "map", -80.0);
  const double y_max = read_length_um(map, "y_max", "map", 80.0);
  const long nx = read_integer(map, "nx", "map", 81);
  const long ny = read_integer(map, "ny", "map", 81);
  if (!(x_min < x_max) || !(y_min < y_max) || nx < 2 || ny < 2) {
    throw ConfigError(
        "config: map block needs x_min < x_max, y_min < y_max, nx/ny >= 2");
  }

  const std::vector<LoopSpec> loops = layout_loops(config, opts.layout);
  const std::vector<DiscretizedLoop> discretized = discretize_all(loops);
  const Point3 local =
      Point3::from_um(0.0, 0.0, z);  // dB reference: loop centre at height z
  const FieldPhasor local_field = field_at(discretized, local);
  const double ref_total = std::max(local_field.power_total(), kPowerFloor);
  const double ref_z = std::max(local_field.power_z(), kPowerFloor);

  Table table;
  table.name = "field_map";
  table.columns = {"x_um",  "y_um",  "Bx_re", "Bx_im",      "By_re", "By_im",
                   "Bz_re", "Bz_im", "P_total_db", "P_z_db"};
  for (long iy = 0; iy < ny; ++iy) {
    const double y = y_min + (y_max - y_min) * iy / static_cast<double>(ny - 1);
    for (long ix = 0; ix < nx; ++ix) {
      const double x =
          x_min + (x_max - x_min) * ix / static_cast<double>(nx - 1);
      const FieldPhasor f = field_at(discretized, Point3::from_um(x, y, z));
      table.add_row({x, y, f.bx.real(), f.bx.imag(), f.by.real(), f.by.imag(),
                     f.bz.real(), f.bz.imag(),
                     power_db(f.power_total(), ref_total),
                     power_db(f.power_z(), ref_z)});
    }
  }

  const fs::path path = resolve_out_dir(opts) /
                        (output_stem("field_map", config, seed) + ".csv");
  write_csv(table, path);
  std::cout << "field-map (" << opts.layout << "): wrote " << path.string()
            << " (" << nx * ny << " samples)\n";
}

void run_line_scan(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const std::uint64_t seed = config_seed(config, opts.seed);
  note_provenance(opts, config, seed);
  const Json& scan_cfg = config.contains("scan") && config["scan"].is_object()
                             ? config["scan"]
                             : Json::object();
  const double x_min = read_length_um(scan_cfg, "x_min", "scan", 2.0);
  const double x_max = read_length_um(scan_cfg, "x_max", "scan", 200.0);
  const double step = read_length_um(scan_cfg, "step", "scan", 0.25);
  const double z = read_length_um(scan_cfg, "z", "scan",
                                  probe_height_um_from_config(config));
  if (!(x_min < x_max) || !(step > 0.0)) {
    throw ConfigError("config: scan window needs x_min < x_max and step > 0");
  }
  Point3 direction = Point3::from_um(1.0, 0.0, 0.0);
  if (scan_cfg.contains("direction")) {
    const Json& d = scan_cfg.at("direction");
    if (!d.is_array() || d.size() != 3) {
      throw ConfigError("config: 'scan.direction' must be a 3-element array");
    }
    direction = Point3::from_um(d[0].get<double>(), d[1].get<double>(),
                                d[2].get<double>());
  }
  std::vector<double> positions;
  for (double x = x_min; x <= x_max + 1e-9; x += step) positions.push_back(x);

  const std::vector<LoopSpec> loops = layout_loops(config, opts.layout);
  const LineScan scan =
      line_scan(loops, Point3{0, 0, 0}, direction, positions, z);

  const fs::path path = resolve_out_dir(opts) /
                        (output_stem("line_scan", config, seed) + ".csv");
  write_csv(line_scan_table(scan, "line_scan"), path);
  std::cout << "line-scan (" << opts.layout << "): wrote " << path.string()
            << " (" << positions.size() << " samples)\n";
}

void run_cancel_solve(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const std::uint64_t seed = config_seed(config, opts.seed);
  note_provenance(opts, config, seed);
  auto [inner, outer] = loops_from_config(config);
  const Point3 target = target_from_config(config);
  const CancellationSolution sol = solve(inner, outer, target);

  Json out{
      {"ratio", sol.ratio},
      {"phase_offset_rad", sol.phase_offset},
      {"target_um", point_json(sol.target)},
      {"local_site_um", point_json(sol.local_site)},
      {"residual_bz_db", sol.residual_power_db},
      {"residual_total_db", sol.residual_total_db},
      {"local_power_factor", sol.local_power_factor},
      {"centre_power_ratio", sol.centre_power_ratio},
      {"version", kVersion},
  };
  const fs::path path =
      resolve_out_dir(opts) /
      (output_stem("cancel_solution", config, seed) + ".json");
  write_text_atomic(out.dump(2) + "\n", path);

  std::printf("ratio              %.9g\n", sol.ratio);
  std::printf("phase offset       %.9g rad\n", sol.phase_offset);
  std::printf("residual Bz        %g dB rel local site\n",
              sol.residual_power_db);
  std::printf("local power factor %.6g\n", sol.local_power_factor);
  std::printf("centre power ratio %.6g\n", sol.centre_power_ratio);
  std::cout << "wrote " << path.string() << "\n";
}

void print_result_provenance(const CommonOpts& opts,
                             const ScenarioResult& result) {
  if (!opts.verbose) return;
  std::printf("seed %llu, config hash %s, version %s\n",
              static_cast<unsigned long long>(result.seed),
              result.config_hash.c_str(), result.version.c_str());
}

void run_ratio_sweep(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  Json scenario_config = config;
  scenario_config["scenario"]["name"] = "fig1g_ratio_sweep";
  const ScenarioResult result = run_scenario(scenario_config, opts.seed);
  print_result_provenance(opts, result);
  const std::vector<fs::path> written =
      write_result(result, resolve_out_dir(opts));
  for (const fs::path& p : written) std::cout << "wrote " << p.string() << "\n";
}

void run_phase_sweep(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  Json scenario_config = config;
  scenario_config["scenario"]["name"] = "fig1h_phase_sweep";
  const ScenarioResult result = run_scenario(scenario_config, opts.seed);
  print_result_provenance(opts, result);
  std::printf("remote minimum at phase %.6g rad\n",
              result.summary["metrics"]["remote_min_phase_rad"].get<double>());
  const std::vector<fs::path> written =
      write_result(result, resolve_out_dir(opts));
  for (const fs::path& p : written) std::cout << "wrote " << p.string() << "\n";
}

void run_rabi(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const SpinParams params = spin_from_config(config, opts.seed);
  note_provenance(opts, config, params.seed);
  const DriveTone drive = drive_from_config(config);
  const NoiseModel noise = noise_from_config(config);

  const Json& rabi_cfg = config.contains("rabi") && config["rabi"].is_object()
                             ? config["rabi"]
                             : Json::object();
  const double tau_max =
      read_time_s(rabi_cfg, "tau_max", "rabi", 1.314 * params.t_base_s);
  const long points = read_integer(rabi_cfg, "tau_points", "rabi", 201);
  if (points < 20 || !(tau_max > 0.0)) {
    throw ConfigError("config: rabi block needs tau_points >= 20, tau_max > 0");
  }
  std::vector<double> grid(points);
  for (long i = 0; i < points; ++i) {
    grid[i] = tau_max * i / static_cast<double>(points - 1);
  }

  const RabiTrace trace = rabi_trace(params, drive, noise, grid);

  Table table;
  table.name = "rabi_trace";
  table.columns = {"tau_ns", "population", "fit_value"};
  for (std::size_t i = 0; i < trace.tau_s.size(); ++i) {
    table.add_row({s_to_ns(trace.tau_s[i]), trace.values[i],
                   trace.fit.value_at(trace.tau_s[i])});
  }

  const std::string stem = output_stem("rabi_trace", config, params.seed);
  const fs::path out = resolve_out_dir(opts);
  const fs::path csv_path = out / (stem + ".csv");
  const fs::path fit_path = out / (stem + ".fit.json");
  write_csv(table, csv_path);
  const Json fit{
      {"frequency_hz", trace.fit.frequency},
      {"frequency_err_hz", trace.fit.frequency_err},
      {"t_rabi_ns", s_to_ns(trace.fit.t_decay)},
      {"t_rabi_err_ns", s_to_ns(trace.fit.t_decay_err)},
      {"amplitude", trace.fit.amplitude},
      {"offset", trace.fit.offset},
      {"phase_rad", trace.fit.phase},
      {"seed", trace.seed},
      {"version", kVersion},
  };
  write_text_atomic(fit.dump(2) + "\n", fit_path);

  std::printf("seed %llu; fit: f = %.6g Hz, T = %.6g ns (+/- %.2g)\n",
              static_cast<unsigned long long>(trace.seed),
              trace.fit.frequency, s_to_ns(trace.fit.t_decay),
              s_to_ns(trace.fit.t_decay_err));
  std::cout << "wrote " << csv_path.string() << "\n";
  std::cout << "wrote " << fit_path.string() << "\n";
}

void run_odmr(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const SpinParams params = spin_from_config(config, opts.seed);
  note_provenance(opts, config, params.seed);
  const Json& odmr_cfg = config.contains("odmr") && config["odmr"].is_object()
                             ? config["odmr"]
                             : Json::object();
  const double f_min = read_frequency_hz(odmr_cfg, "f_min", "odmr",
                                         params.resonance_hz - 30e6);
  const double f_max = read_frequency_hz(odmr_cfg, "f_max", "odmr",
                                         params.resonance_hz + 30e6);
  const long points = read_integer(odmr_cfg, "points", "odmr", 61);
  const double photons =
      read_number(odmr_cfg, "photons_per_point", "odmr", 5e4);
  if (points < 7 || !(f_min < f_max)) {
    throw ConfigError("config: odmr block needs points >= 7 and f_min < f_max");
  }

  std::vector<DriveTone> tones;
  if (odmr_cfg.contains("tones")) {
    const Json& arr = odmr_cfg.at("tones");
    if (!arr.is_array() || arr.empty()) {
      throw ConfigError("config: 'odmr.tones' must be a non-empty array");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "odmr.tones[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) {
        throw ConfigError("config: '" + path + "' must be an object");
      }
      DriveTone tone;
      tone.rabi_hz = read_frequency_hz(arr[i], "rabi", path, 7e6);
      tone.phase = read_angle_rad(arr[i], "phase", path, 0.0);
      tone.detuning_hz = read_frequency_hz(arr[i], "detuning", path, 0.0);
      tones.push_back(tone);
    }
  } else {
    tones.push_back(drive_from_config(config));
  }

  std::vector<double> freqs(points);
  for (long i = 0; i < points; ++i) {
    freqs[i] = f_min + (f_max - f_min) * i / static_cast<double>(points - 1);
  }
  const OdmrSpectrum spectrum = odmr_spectrum(params, tones, freqs, photons);

  Table table;
  table.name = "odmr_spectrum";
  table.columns = {"freq_hz", "pl_norm"};
  for (std::size_t i = 0; i < spectrum.frequency_hz.size(); ++i) {
    table.add_row({spectrum.frequency_hz[i], spectrum.pl[i]});
  }

  const std::string stem = output_stem("odmr_spectrum", config, params.seed);
  const fs::path out = resolve_out_dir(opts);
  const fs::path csv_path = out / (stem + ".csv");
  const fs::path fit_path = out / (stem + ".fit.json");
  write_csv(table, csv_path);
  const Json fit{
      {"centre_hz", spectrum.fit.centre},
      {"centre_err_hz", spectrum.fit.centre_err},
      {"sigma_hz", spectrum.fit.sigma},
      {"contrast", spectrum.fit.contrast},
      {"contrast_err", spectrum.fit.contrast_err},
      {"baseline", spectrum.fit.baseline},
      {"drive_power_hz2", spectrum.drive_power},
      {"true_contrast", spectrum.true_contrast},
      {"seed", params.seed},
      {"version", kVersion},
  };
  write_text_atomic(fit.dump(2) + "\n", fit_path);

  std::printf("seed %llu; fit: centre = %.8g Hz, contrast = %.4g\n",
              static_cast<unsigned long long>(params.seed),
              spectrum.fit.centre, spectrum.fit.contrast);
  std::cout << "wrote " << csv_path.string() << "\n";
  std::cout << "wrote " << fit_path.string() << "\n";
}

int run_scenario_cmd(const CommonOpts& opts) {
  const Json config = load_validated(opts.config_path);
  const ScenarioResult result = run_scenario(config, opts.seed);
  std::printf("scenario %s (seed %llu, config %s)\n", result.scenario.c_str(),
              static_cast<unsigned long long>(result.seed),
              result.config_hash.c_str());
  const std::vector<fs::path> written =
      write_result(result, resolve_out_dir(opts));
  for (const fs::path& p : written) std::cout << "wrote " << p.string() << "\n";

  if (opts.reference_path.empty()) return 0;
  const Json reference = load_config_file(opts.reference_path);
  const ComparisonReport report = compare_to_reference(result, reference);
  std::cout << report.to_string();
  return report.pass() ? 0 : 1;
}

void run_validate(const CommonOpts& opts) {
  const Json config = load_config_file(opts.config_path);
  const ValidationReport report = validate_config(config);
  std::cout << report.to_string();
  if (!report.ok()) {
    throw ConfigError("config validation failed for " + opts.config_path);
  }
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"dual-loop transducer simulator and crosstalk optimizer"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  int exit_code = 0;
  CommonOpts opts;

  const auto add = [&](const std::string& name, const std::string& about,
                       auto&& body) {
    CLI::App* cmd = app.add_subcommand(name, about);
    add_common(cmd, opts);
    cmd->callback([&opts, body]() { body(opts); });
    return cmd;
  };

  CLI::App* field_map =
      add("field-map", "sample the field on an x-y grid", run_field_map);
  field_map->add_option("--layout", opts.layout,
                        "loop set to drive: single|dual (default dual)")
      ->check(CLI::IsMember({"single", "dual"}));
  CLI::App* line_scan_cmd = add(
      "line-scan", "sample the field along a line", run_line_scan);
  line_scan_cmd->add_option("--layout", opts.layout,
                            "loop set to drive: single|dual (default dual)")
      ->check(CLI::IsMember({"single", "dual"}));
  add("cancel-solve", "solve the crosstalk-cancellation drive",
      run_cancel_solve);
  add("ratio-sweep", "track the field null while detuning the ratio",
      run_ratio_sweep);
  add("phase-sweep", "sweep the relative drive phase", run_phase_sweep);
  add("rabi", "simulate a Rabi trace and fit its decay", run_rabi);
  add("odmr", "simulate an ODMR spectrum and fit the dip", run_odmr);
  CLI::App* scenario = app.add_subcommand(
      "scenario", "run a named scenario and write its tables");
  add_common(scenario, opts);
  scenario->add_option("-r,--reference", opts.reference_path,
                       "reference metrics JSON to compare against");
  scenario->callback([&]() { exit_code = run_scenario_cmd(opts); });
  add("validate", "check a config against the schema", run_validate);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace duoloop
