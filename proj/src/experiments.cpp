#include "duoloop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "duoloop/cancellation.hpp"
#include "duoloop/errors.hpp"
#include "duoloop/magnetostatics.hpp"
#include "duoloop/rng.hpp"
#include "duoloop/spin.hpp"
#include "duoloop/units.hpp"
#include "duoloop/version.hpp"

namespace duoloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Json kEmpty = Json::object();

const Json& block(const Json& config, const char* name) {
  if (config.is_object() && config.contains(name) &&
      config.at(name).is_object()) {
    return config.at(name);
  }
  return kEmpty;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = a + (b - a) * i / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> array_or(const Json& obj, const char* key,
                             std::vector<double> fallback,
                             const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const Json& arr = obj.at(key);
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError("config: '" + path + "." + key +
                      "' must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const Json& v : arr) {
    if (!v.is_number()) {
      throw ConfigError("config: '" + path + "." + key +
                        "' must contain only numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<double> tau_grid_from_config(const Json& config,
                                         const SpinParams& params) {
  const Json& rabi = block(config, "rabi");
  const double tau_max =
      read_time_s(rabi, "tau_max", "rabi", 1.314 * params.t_base_s);
  const long points = read_integer(rabi, "tau_points", "rabi", 201);
  if (points < 20) {
    throw ConfigError("config: 'rabi.tau_points' must be >= 20");
  }
  if (!(tau_max > 0.0)) {
    throw ConfigError("config: 'rabi.tau_max_ns' must be > 0");
  }
  return linspace(0.0, tau_max, static_cast<int>(points));
}

// JSON cannot carry non-finite numbers (they would serialize as null), so
// infinities -- legitimate dB-floor sentinels -- are stored as strings.
void set_metric(ScenarioResult& result, const std::string& name,
                double value) {
  if (std::isfinite(value)) {
    result.summary["metrics"][name] = value;
  } else {
    result.summary["metrics"][name] =
        value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
  }
}

/// Numeric view of a summary metric, accepting the string sentinels that
/// set_metric writes for non-finite values.
double metric_as_double(const Json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ComparisonError("metric is neither a number nor an inf/nan sentinel");
}

// Simple least-squares slope of y on x with its standard error.
struct Slope {
  double slope = 0.0;
  double err = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

Slope linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  Slope fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
    tss += (y[i] - sy / n) * (y[i] - sy / n);
  }
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.err = x.size() > 2 ? std::sqrt(rss / (n - 2.0) * n / denom) : 0.0;
  return fit;
}

// ---- scenarios -------------------------------------------------------------

ScenarioResult fig1d_line_scan(const Json& config, std::uint64_t seed,
                               std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  auto [inner, outer] = loops_from_config(config);
  const Point3 target = target_from_config(config);
  const double spacing = site_spacing_um_from_config(config);
  const double height = probe_height_um_from_config(config);
  const Json& scenario = block(config, "scenario");
  const Json& scan_cfg = block(config, "scan");

  const double x_min = read_length_um(scan_cfg, "x_min", "scan", 2.0);
  const double x_max = read_length_um(scan_cfg, "x_max", "scan", 200.0);
  const double step = read_length_um(scan_cfg, "step", "scan", 0.25);
  if (!(x_min < x_max) || !(step > 0.0)) {
    throw ConfigError("config: scan window needs x_min < x_max and step > 0");
  }
  std::vector<double> positions;
  for (double x = x_min; x <= x_max + 1e-9; x += step) positions.push_back(x);

  stage = "solve";
  const CancellationSolution sol = solve(inner, outer, target);
  const std::vector<LoopSpec> single{inner};
  const std::vector<LoopSpec> dual = apply(sol, inner, outer);

  // Normalize both scans to the single-loop local-site powers so the two
  // curves are directly comparable.
  stage = "line_scan";
  const FieldPhasor local_single = field_at(single, sol.local_site);
  const LineScan scan_single =
      line_scan(single, Point3{0, 0, 0}, Point3{1, 0, 0}, positions, height,
                local_single.power_total(), local_single.power_z());
  const LineScan scan_dual =
      line_scan(dual, Point3{0, 0, 0}, Point3{1, 0, 0}, positions, height,
                local_single.power_total(), local_single.power_z());

  result.tables.push_back(line_scan_table(scan_single, "single"));
  result.tables.push_back(line_scan_table(scan_dual, "dual"));

  const auto window = [&](const char* key, double lo,
                          double hi) -> std::pair<double, double> {
    const std::vector<double> w =
        array_or(scenario, key, {lo, hi}, "scenario");
    if (w.size() != 2 || !(w[0] < w[1])) {
      throw ConfigError(std::string("config: 'scenario.") + key +
                        "' must be [lo, hi] with lo < hi");
    }
    return {w[0], w[1]};
  };
  stage = "power_law_fit";
  const auto [single_lo, single_hi] =
      window("single_fit_window_um", 80.0, 200.0);
  const auto [dual_lo, dual_hi] = window("dual_fit_window_um", 24.0, 54.0);
  const PowerLawFit fit_single =
      fit_power_law(scan_single, single_lo, single_hi);
  const PowerLawFit fit_dual = fit_power_law(scan_dual, dual_lo, dual_hi);

  // Site-radius metrics: circular loops are axisymmetric, so on-axis
  // distances stand in for the actual neighbour sites.
  const auto probe_radius = [&](double r_um) {
    return Point3::from_um(r_um, 0.0, height);
  };
  const Point3 p2 = probe_radius(std::numbers::sqrt3 * spacing);
  const Point3 p3 = probe_radius(2.0 * spacing);
  const Point3 p1 = probe_radius(spacing);

  const double single_at_1nn =
      power_db(field_at(single, p1).power_total(), local_single.power_total());
  const double atten_2nn = power_db(field_at(dual, p2).power_total(),
                                    field_at(single, p2).power_total());
  const double atten_3nn = power_db(field_at(dual, p3).power_total(),
                                    field_at(single, p3).power_total());

  result.scenario = "fig1d_line_scan";
  set_metric(result, "ratio", sol.ratio);
  set_metric(result, "phase_offset_rad", sol.phase_offset);
  set_metric(result, "residual_bz_db", sol.residual_power_db);
  set_metric(result, "residual_total_db", sol.residual_total_db);
  set_metric(result, "centre_power_ratio", sol.centre_power_ratio);
  set_metric(result, "local_power_factor", sol.local_power_factor);
  set_metric(result, "single_power_db_at_1nn", single_at_1nn);
  set_metric(result, "add_atten_2nn_db", atten_2nn);
  set_metric(result, "add_atten_3nn_db", atten_3nn);
  set_metric(result, "single_exponent", fit_single.exponent);
  set_metric(result, "single_exponent_err", fit_single.std_error);
  set_metric(result, "dual_exponent", fit_dual.exponent);
  set_metric(result, "dual_exponent_err", fit_dual.std_error);
  result.summary["metrics"]["single_fit_window_um"] =
      Json::array({single_lo, single_hi});
  result.summary["metrics"]["dual_fit_window_um"] =
      Json::array({dual_lo, dual_hi});
  (void)seed;
  return result;
}

ScenarioResult fig1g_ratio_sweep(const Json& config, std::uint64_t seed,
                                 std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  auto [inner, outer] = loops_from_config(config);
  const Point3 target = target_from_config(config);
  const double spacing = site_spacing_um_from_config(config);
  const Json& sweep_cfg = block(config, "ratio_sweep");
  const Json& scenario = block(config, "scenario");

  std::vector<double> factors;
  for (int i = 12; i <= 21; ++i) factors.push_back(0.05 * i);
  factors = array_or(scenario, "factors",
                     array_or(sweep_cfg, "factors", factors, "ratio_sweep"),
                     "scenario");
  const double x_min = read_length_um(sweep_cfg, "x_min", "ratio_sweep", 5.0);
  const double x_max =
      read_length_um(sweep_cfg, "x_max", "ratio_sweep", 1.8 * spacing);

  stage = "solve";
  const CancellationSolution sol = solve(inner, outer, target);
  stage = "ratio_sweep";
  const std::vector<RatioSweepPoint> points =
      sweep_ratio(inner, outer, sol, factors, x_min, x_max);

  Table table;
  table.name = "nulls";
  table.columns = {"ratio_factor", "null_x_um", "null_power_db"};
  bool monotonic = true;
  bool all_interior = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    table.add_row(
        {points[i].factor, points[i].null_x_um, points[i].null_power_db});
    all_interior = all_interior && points[i].interior;
    if (i > 0 && points[i].factor > points[i - 1].factor &&
        points[i].null_x_um <= points[i - 1].null_x_um) {
      monotonic = false;
    }
  }
  result.tables.push_back(table);

  result.scenario = "fig1g_ratio_sweep";
  set_metric(result, "ratio", sol.ratio);
  set_metric(result, "null_x_first_um", points.front().null_x_um);
  set_metric(result, "null_x_last_um", points.back().null_x_um);
  set_metric(result, "monotonic", monotonic ? 1.0 : 0.0);
  set_metric(result, "all_interior", all_interior ? 1.0 : 0.0);
  (void)seed;
  return result;
}

ScenarioResult fig1h_phase_sweep(const Json& config, std::uint64_t seed,
                                 std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  auto [inner, outer] = loops_from_config(config);
  const Point3 target = target_from_config(config);
  const Json& sweep_cfg = block(config, "phase_sweep");

  const long points = read_integer(sweep_cfg, "points", "phase_sweep", 64);
  if (points < 8) {
    throw ConfigError("config: 'phase_sweep.points' must be >= 8");
  }
  stage = "solve";
  const CancellationSolution sol = solve(inner, outer, target);
  const double ratio =
      read_number(sweep_cfg, "ratio", "phase_sweep", sol.ratio);

  Point3 remote = target;
  if (sweep_cfg.contains("remote")) {
    const Json& r = sweep_cfg.at("remote");
    remote = Point3::from_um(
        read_length_um(r, "x", "phase_sweep.remote", target.x_um()),
        read_length_um(r, "y", "phase_sweep.remote", target.y_um()),
        read_length_um(r, "z", "phase_sweep.remote", target.z_um()));
  }

  std::vector<double> phases(points);
  for (long i = 0; i < points; ++i) {
    phases[i] = kTwoPi * i / static_cast<double>(points);
  }
  stage = "phase_sweep";
  const PhaseSweepResult sweep =
      sweep_phase(inner, outer, ratio, phases, sol.local_site, remote);

  const double remote_max =
      *std::max_element(sweep.p_remote.begin(), sweep.p_remote.end());
  Table table;
  table.name = "phase_sweep";
  table.columns = {"phase_rad", "P_local", "P_remote", "P_remote_db"};
  for (std::size_t i = 0; i < sweep.phase.size(); ++i) {
    table.add_row({sweep.phase[i], sweep.p_local[i], sweep.p_remote[i],
                   power_db(sweep.p_remote[i], remote_max)});
  }
  result.tables.push_back(table);

  result.scenario = "fig1h_phase_sweep";
  set_metric(result, "ratio", ratio);
  set_metric(result, "remote_min_phase_rad", sweep.remote_min_phase);
  set_metric(result, "fit_residual_rel", sweep.residual_rel);
  set_metric(result, "local_modulation_depth", sweep.local_modulation_depth);
  result.summary["metrics"]["model"] = "quasistatic-analytic";
  (void)seed;
  return result;
}

ScenarioResult fig3k_power_scaling(const Json& config, std::uint64_t seed,
                                   std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  const Json& scenario = block(config, "scenario");
  const SpinParams params = spin_from_config(config, std::nullopt);

  const std::vector<double> powers =
      array_or(scenario, "powers_w",
               {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2}, "scenario");
  const double coupling = read_number(scenario, "coupling_t_per_sqrt_w",
                                      "scenario", 3.1944e-3);
  const double efficiency = read_number(scenario, "antenna_efficiency_ratio",
                                        "scenario", 200.0);
  if (!(coupling > 0.0) || !(efficiency > 0.0)) {
    throw ConfigError(
        "config: scenario coupling and efficiency ratio must be > 0");
  }
  const double antenna_coupling = coupling / std::sqrt(efficiency);

  stage = "power_sweep";
  Table table;
  table.name = "power_scaling";
  table.columns = {"power_w", "f_rabi_loop_hz", "f_rabi_antenna_hz"};
  std::vector<double> log_p, log_f;
  for (double p : powers) {
    if (!(p > 0.0)) {
      throw ConfigError("config: 'scenario.powers_w' must be > 0");
    }
    const double f_loop = rabi_frequency(coupling * std::sqrt(p),
                                         params.gyromagnetic_hz_per_t);
    const double f_ant = rabi_frequency(antenna_coupling * std::sqrt(p),
                                        params.gyromagnetic_hz_per_t);
    table.add_row({p, f_loop, f_ant});
    log_p.push_back(std::log10(p));
    log_f.push_back(std::log10(f_loop));
  }
  result.tables.push_back(table);

  const Slope slope = linear_fit(log_p, log_f);
  const double f_at_50mw = rabi_frequency(coupling * std::sqrt(0.05),
                                          params.gyromagnetic_hz_per_t);

  result.scenario = "fig3k_power_scaling";
  set_metric(result, "slope", slope.slope);
  set_metric(result, "slope_err", slope.err);
  set_metric(result, "f_loop_at_50mw_hz", f_at_50mw);
  set_metric(result, "f_antenna_at_50mw_hz", f_at_50mw / std::sqrt(efficiency));
  set_metric(result, "equal_f_power_ratio", efficiency);
  set_metric(result, "coupling_t_per_sqrt_w", coupling);
  (void)seed;
  return result;
}

ScenarioResult fig4c_phase_contrast(const Json& config, std::uint64_t seed,
                                    std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  const Json& contrast_cfg = block(config, "contrast");
  const SpinParams params = spin_from_config(config, seed);

  const double inner_rabi =
      read_frequency_hz(contrast_cfg, "inner_rabi", "contrast", 1e6);
  const double outer_rabi =
      read_frequency_hz(contrast_cfg, "outer_rabi", "contrast", 1e6);
  const double static_offset = read_angle_rad(
      contrast_cfg, "static_offset", "contrast", 0.75 * std::numbers::pi);
  const long phase_points =
      read_integer(contrast_cfg, "phase_points", "contrast", 24);
  const double photons = read_number(contrast_cfg, "photons_per_point",
                                     "contrast", 5e4);
  if (phase_points < 8) {
    throw ConfigError("config: 'contrast.phase_points' must be >= 8");
  }

  std::vector<double> phases(phase_points);
  for (long i = 0; i < phase_points; ++i) {
    phases[i] = kTwoPi * i / static_cast<double>(phase_points);
  }
  stage = "contrast_vs_phase";
  DriveTone inner_tone{inner_rabi, 0.0, 0.0};
  DriveTone outer_tone{outer_rabi, 0.0, 0.0};
  const ContrastVsPhase scan = contrast_vs_phase(
      params, inner_tone, outer_tone, static_offset, phases, photons);

  Table table;
  table.name = "contrast";
  table.columns = {"phase_rad", "contrast", "contrast_err", "fit_value"};
  for (std::size_t i = 0; i < scan.phase.size(); ++i) {
    table.add_row({scan.phase[i], scan.contrast[i], scan.contrast_err[i],
                   scan.fit.value_at(scan.phase[i])});
  }
  result.tables.push_back(table);

  // Contrast-vs-power linearity below saturation, with a generous photon
  // budget so the check probes the model rather than the shot noise.
  stage = "linearity_sweep";
  const std::vector<double> fractions = linspace(0.02, 0.2, 10);
  std::vector<double> frac_used, fitted;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    SpinParams point_params = params;
    point_params.seed =
        RandomStream::for_index(params.seed, i, 0x4C494E31ULL).next_u64();
    const double rabi =
        std::sqrt(fractions[i] * params.saturation_power);
    const int n_freq = 61;
    std::vector<double> freqs(n_freq);
    for (int j = 0; j < n_freq; ++j) {
      freqs[j] = params.resonance_hz +
                 params.odmr_sigma_hz * (-6.0 + 12.0 * j / (n_freq - 1.0));
    }
    const OdmrSpectrum spectrum = odmr_spectrum(
        point_params, {DriveTone{rabi, 0.0, 0.0}}, freqs, 1e6);
    frac_used.push_back(fractions[i]);
    fitted.push_back(spectrum.fit.contrast);
  }
  const Slope linearity = linear_fit(frac_used, fitted);

  result.scenario = "fig4c_phase_contrast";
  set_metric(result, "min_phase_rad", scan.min_phase);
  set_metric(result, "min_phase_deg", scan.min_phase * 180.0 / std::numbers::pi);
  set_metric(result, "normalized_min_power", scan.normalized_min_power);
  set_metric(result, "r_squared", scan.fit.r_squared);
  set_metric(result, "fit_offset", scan.fit.offset);
  set_metric(result, "fit_amplitude", scan.fit.amplitude);
  set_metric(result, "fit_amplitude_err", scan.fit.amplitude_err);
  set_metric(result, "static_offset_rad", static_offset);
  set_metric(result, "linearity_slope", linearity.slope);
  set_metric(result, "linearity_intercept", linearity.intercept);
  set_metric(result, "linearity_r2", linearity.r_squared);
  return result;
}

Table trace_table(const RabiTrace& trace, const std::string& name) {
  Table table;
  table.name = name;
  table.columns = {"tau_ns", "population", "fit_value"};
  for (std::size_t i = 0; i < trace.tau_s.size(); ++i) {
    table.add_row({s_to_ns(trace.tau_s[i]), trace.values[i],
                   trace.fit.value_at(trace.tau_s[i])});
  }
  return table;
}

ScenarioResult fig4_rabi_suite(const Json& config, std::uint64_t seed,
                               std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  const Json& scenario = block(config, "scenario");
  const SpinParams params = spin_from_config(config, seed);
  const DriveTone drive = drive_from_config(config);
  const double target_t =
      read_time_s(scenario, "target_t", "scenario", 249e-9);
  const double suppression =
      read_number(scenario, "suppression", "scenario", 0.03);
  const std::vector<double> grid = tau_grid_from_config(config, params);

  stage = "calibrate_noise";
  const double omega_n = calibrate_noise(params, drive, target_t);

  NoiseModel off;  // clean
  NoiseModel unprotected{omega_n, 0.0, NoisePhasePolicy::kUniformRandom, 1.0};
  NoiseModel protected_noise{omega_n, 0.0, NoisePhasePolicy::kUniformRandom,
                             suppression};
  NoiseModel inphase{2.0 * omega_n, 0.0, NoisePhasePolicy::kUniformRandom,
                     1.0};

  stage = "trace_clean";
  const RabiTrace clean = rabi_trace(params, drive, off, grid);
  stage = "trace_noisy";
  const RabiTrace noisy = rabi_trace(params, drive, unprotected, grid);
  stage = "trace_protected";
  const RabiTrace prot = rabi_trace(params, drive, protected_noise, grid);
  stage = "trace_inphase";
  const RabiTrace aggressor = rabi_trace(params, drive, inphase, grid);

  result.tables.push_back(trace_table(clean, "clean"));
  result.tables.push_back(trace_table(noisy, "noisy"));
  result.tables.push_back(trace_table(prot, "protected"));
  result.tables.push_back(trace_table(aggressor, "inphase"));

  result.scenario = "fig4_rabi_suite";
  set_metric(result, "omega_n_hz", omega_n);
  set_metric(result, "suppression", suppression);
  set_metric(result, "target_t_ns", s_to_ns(target_t));
  set_metric(result, "t_clean_ns", s_to_ns(clean.fit.t_decay));
  set_metric(result, "t_clean_err_ns", s_to_ns(clean.fit.t_decay_err));
  set_metric(result, "t_noisy_ns", s_to_ns(noisy.fit.t_decay));
  set_metric(result, "t_noisy_err_ns", s_to_ns(noisy.fit.t_decay_err));
  set_metric(result, "t_protected_ns", s_to_ns(prot.fit.t_decay));
  set_metric(result, "t_protected_err_ns", s_to_ns(prot.fit.t_decay_err));
  set_metric(result, "t_inphase_ns", s_to_ns(aggressor.fit.t_decay));
  set_metric(result, "t_inphase_err_ns", s_to_ns(aggressor.fit.t_decay_err));
  set_metric(result, "f_rabi_fit_hz", clean.fit.frequency);
  const bool ordering = aggressor.fit.t_decay < noisy.fit.t_decay &&
                        noisy.fit.t_decay < prot.fit.t_decay &&
                        prot.fit.t_decay < clean.fit.t_decay;
  set_metric(result, "ordering_ok", ordering ? 1.0 : 0.0);
  // Slow-drive bookkeeping: is one Rabi period shorter than a tenth of the
  // intrinsic decay time?  Reported, not asserted.
  set_metric(result, "rabi_period_below_tenth_t_base",
             (1.0 / drive.rabi_hz < params.t_base_s / 10.0) ? 1.0 : 0.0);
  return result;
}

ScenarioResult detuning_equivalence(const Json& config, std::uint64_t seed,
                                    std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  const Json& scenario = block(config, "scenario");
  const NoiseModel noise = noise_from_config(config);
  const double noise_rabi = noise.rabi_hz > 0.0 ? noise.rabi_hz : 7e6;

  const std::vector<double> grid = array_or(
      scenario, "suppression_grid",
      {1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0}, "scenario");

  stage = "detuning_grid";
  Table table;
  table.name = "detuning";
  table.columns = {"suppression", "detuning_hz"};
  for (double s : grid) {
    table.add_row({s, equivalent_detuning(noise_rabi, s)});
  }
  result.tables.push_back(table);

  result.scenario = "detuning_equivalence";
  set_metric(result, "noise_rabi_hz", noise_rabi);
  set_metric(result, "detuning_at_0p03_hz",
             equivalent_detuning(noise_rabi, 0.03));
  (void)seed;
  return result;
}

ScenarioResult coherence_penalty_curve(const Json& config, std::uint64_t seed,
                                       std::string& stage) {
  ScenarioResult result;
  stage = "setup";
  const Json& scenario = block(config, "scenario");
  const SpinParams params = spin_from_config(config, seed);
  const DriveTone drive = drive_from_config(config);
  const double target_t =
      read_time_s(scenario, "target_t", "scenario", 249e-9);
  const double imbalance_db =
      read_number(scenario, "imbalance_db", "scenario", -20.0);
  if (imbalance_db > 0.0) {
    throw ConfigError("config: 'scenario.imbalance_db' must be <= 0");
  }

  const std::vector<double> db_grid =
      array_or(scenario, "noise_db_grid",
               {-80.0, -70.0, -60.0, -50.0, -40.0, -30.0, -20.0, -10.0},
               "scenario");

  stage = "penalty_grid";
  Table table;
  table.name = "penalty";
  table.columns = {"noise_db", "penalty", "penalty_err", "t_noisy_ns"};
  for (double db : db_grid) {
    const CoherencePenalty p = coherence_penalty(params, drive, db);
    table.add_row({db, p.reduction, p.uncertainty, s_to_ns(p.t_noisy_s)});
  }
  result.tables.push_back(table);

  // The two headline numbers: the -60 dB floor and the residual after an
  // imperfect amplitude balance, with the noise level calibrated so the
  // raw aggressor alone reproduces the target decay time.
  stage = "penalty_at_floor";
  const CoherencePenalty at_floor = coherence_penalty(params, drive, -60.0);
  stage = "calibrate_noise";
  const double omega_n = calibrate_noise(params, drive, target_t);
  stage = "penalty_at_imbalance";
  const double epsilon = std::pow(10.0, imbalance_db / 20.0);
  const double residual_db =
      20.0 * std::log10(epsilon * omega_n / drive.rabi_hz);
  const CoherencePenalty at_imbalance =
      coherence_penalty(params, drive, residual_db);

  result.scenario = "coherence_penalty_curve";
  set_metric(result, "penalty_at_minus60", at_floor.reduction);
  set_metric(result, "penalty_at_minus60_err", at_floor.uncertainty);
  set_metric(result, "omega_n_hz", omega_n);
  set_metric(result, "target_t_ns", s_to_ns(target_t));
  set_metric(result, "imbalance_db", imbalance_db);
  set_metric(result, "residual_noise_db", residual_db);
  set_metric(result, "penalty_at_imbalance", at_imbalance.reduction);
  set_metric(result, "penalty_at_imbalance_err", at_imbalance.uncertainty);
  return result;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "fig1d_line_scan",      "fig1g_ratio_sweep",
      "fig1h_phase_sweep",    "fig3k_power_scaling",
      "fig4c_phase_contrast", "fig4_rabi_suite",
      "detuning_equivalence", "coherence_penalty_curve",
  };
  return names;
}

ScenarioResult run_scenario(const Json& config,
                            std::optional<std::uint64_t> seed_override) {
  const ValidationReport report = validate_config(config);
  if (!report.ok()) {
    throw ConfigError("config validation failed:\n" + report.to_string());
  }
  const Json& scenario = block(config, "scenario");
  if (!scenario.contains("name") || !scenario.at("name").is_string()) {
    throw ConfigError(
        "config: scenario block with a 'name' string is required");
  }
  const std::string name = scenario.at("name").get<std::string>();
  const std::uint64_t seed = config_seed(config, seed_override);

  ScenarioResult result;
  std::string stage = "setup";
  try {
    if (name == "fig1d_line_scan") {
      result = fig1d_line_scan(config, seed, stage);
    } else if (name == "fig1g_ratio_sweep") {
      result = fig1g_ratio_sweep(config, seed, stage);
    } else if (name == "fig1h_phase_sweep") {
      result = fig1h_phase_sweep(config, seed, stage);
    } else if (name == "fig3k_power_scaling") {
      result = fig3k_power_scaling(config, seed, stage);
    } else if (name == "fig4c_phase_contrast") {
      result = fig4c_phase_contrast(config, seed, stage);
    } else if (name == "fig4_rabi_suite") {
      result = fig4_rabi_suite(config, seed, stage);
    } else if (name == "detuning_equivalence") {
      result = detuning_equivalence(config, seed, stage);
    } else if (name == "coherence_penalty_curve") {
      result = coherence_penalty_curve(config, seed, stage);
    } else {
      std::string valid;
      for (const std::string& candidate : scenario_names()) {
        if (!valid.empty()) valid += ", ";
        valid += candidate;
      }
      throw ConfigError("config: unknown scenario '" + name +
                        "'; valid names: " + valid);
    }
  } catch (const ConfigError&) {
    throw;  // keep the config-error type (CLI exit code 2)
  } catch (const Error& e) {
    throw Error("scenario '" + name + "' failed at stage '" + stage +
                "': " + e.what());
  }

  Json effective = config;
  effective["seed"] = seed;
  result.config_hash = config_hash8(effective);
  result.seed = seed;
  result.version = kVersion;
  result.summary["scenario"] = result.scenario;
  result.summary["config_hash"] = result.config_hash;
  result.summary["seed"] = seed;
  result.summary["version"] = result.version;
  Json tables = Json::array();
  for (const Table& t : result.tables) tables.push_back(t.name);
  result.summary["tables"] = tables;
  return result;
}

std::vector<std::filesystem::path> write_result(
    const ScenarioResult& result, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  const std::string stem = result.scenario + "__" + result.config_hash;
  if (result.tables.size() == 1) {
    const std::filesystem::path path = out_dir / (stem + ".csv");
    write_csv(result.tables.front(), path);
    written.push_back(path);
  } else {
    for (const Table& table : result.tables) {
      const std::filesystem::path path =
          out_dir / (stem + "__" + table.name + ".csv");
      write_csv(table, path);
      written.push_back(path);
    }
  }
  const std::filesystem::path summary_path =
      out_dir / (stem + ".summary.json");
  write_text_atomic(result.summary.dump(2) + "\n", summary_path);
  written.push_back(summary_path);
  return written;
}

bool ComparisonReport::pass() const {
  for (const MetricCheck& check : checks) {
    if (!check.pass) return false;
  }
  return true;
}

std::string ComparisonReport::to_string() const {
  std::string out;
  for (const MetricCheck& check : checks) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-28s value=%-14.6g ref=%-14.6g dev=%-12.4g tol=%-10.4g %s\n",
                  check.name.c_str(), check.value, check.reference,
                  check.deviation, check.tolerance,
                  check.pass ? "PASS" : "FAIL");
    out += line;
  }
  out += pass() ? "comparison: PASS\n" : "comparison: FAIL\n";
  return out;
}

ComparisonReport compare_to_reference(const ScenarioResult& result,
                                      const Json& reference) {
  if (!reference.is_object() || !reference.contains("scenario") ||
      !reference.contains("metrics") || !reference["metrics"].is_object()) {
    throw ComparisonError(
        "reference record needs 'scenario' and a 'metrics' object");
  }
  if (reference["scenario"].get<std::string>() != result.scenario) {
    throw ComparisonError("reference is for scenario '" +
                          reference["scenario"].get<std::string>() +
                          "', result is '" + result.scenario + "'");
  }
  if (!result.summary.contains("metrics")) {
    throw ComparisonError("result carries no metrics to compare");
  }
  const Json& metrics = result.summary["metrics"];

  ComparisonReport report;
  for (const auto& [name, spec] : reference["metrics"].items()) {
    if (!spec.is_object() || !spec.contains("value") ||
        !spec["value"].is_number()) {
      throw ComparisonError("reference metric '" + name +
                            "' needs a numeric 'value'");
    }
    if (!metrics.contains(name)) {
      throw ComparisonError("result has no metric '" + name + "'");
    }
    MetricCheck check;
    check.name = name;
    check.reference = spec["value"].get<double>();
    check.value = metric_as_double(metrics[name]);
    double tolerance = -1.0;
    if (spec.contains("tol_abs") && spec["tol_abs"].is_number()) {
      tolerance = std::max(tolerance, spec["tol_abs"].get<double>());
    }
    if (spec.contains("tol_rel") && spec["tol_rel"].is_number()) {
      tolerance = std::max(
          tolerance, spec["tol_rel"].get<double>() * std::abs(check.reference));
    }
    if (tolerance < 0.0) {
      throw ComparisonError("reference metric '" + name +
                            "' needs 'tol_abs' or 'tol_rel'");
    }
    check.tolerance = tolerance;
    check.deviation = std::abs(check.value - check.reference);
    check.pass = check.deviation <= check.tolerance;
    report.checks.push_back(check);
  }
  return report;
}

}  // namespace duoloop
