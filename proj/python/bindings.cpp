// Python bindings for the duoloop core library.  Configs and scenario
// summaries cross the boundary as JSON text; the duoloop package wraps the
// *_json entry points with dict-based conveniences.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "duoloop/cancellation.hpp"
#include "duoloop/config.hpp"
#include "duoloop/csv.hpp"
#include "duoloop/errors.hpp"
#include "duoloop/experiments.hpp"
#include "duoloop/fitting.hpp"
#include "duoloop/geometry.hpp"
#include "duoloop/magnetostatics.hpp"
#include "duoloop/spin.hpp"
#include "duoloop/version.hpp"

namespace py = pybind11;
using namespace duoloop;

namespace {

Json parse_json_arg(const std::string& text, const std::string& origin) {
  return parse_config_text(text, origin);
}

std::string point_repr(const Point3& p) {
  std::ostringstream out;
  out << "Point3.from_um(" << p.x_um() << ", " << p.y_um() << ", " << p.z_um()
      << ")";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Dual-loop microwave transducer simulator: loop fields, crosstalk "
      "cancellation, and spin-qubit observables.";
  m.attr("__version__") = kVersion;

  // Exceptions.  Derived classes are registered after the base so their
  // translators run first; all map onto a common duoloop.Error.
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameterError>(m, "InvalidParameterError",
                                                error.ptr());
  py::register_exception<SingularPointError>(m, "SingularPointError",
                                             error.ptr());
  py::register_exception<UnsolvableTargetError>(m, "UnsolvableTargetError",
                                                error.ptr());
  py::register_exception<InfeasibleTargetError>(m, "InfeasibleTargetError",
                                                error.ptr());
  py::register_exception<FitDomainError>(m, "FitDomainError", error.ptr());
  py::register_exception<FitFailureError>(m, "FitFailureError", error.ptr());
  py::register_exception<ContractViolationError>(m, "ContractViolationError",
                                                 error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ComparisonError>(m, "ComparisonError", error.ptr());

  // ---- geometry ----
  py::class_<Point3>(m, "Point3", "Cartesian point; stored in metres.")
      .def(py::init<>())
      .def_static("from_um", &Point3::from_um, py::arg("x_um"),
                  py::arg("y_um"), py::arg("z_um"))
      .def_readwrite("x", &Point3::x)
      .def_readwrite("y", &Point3::y)
      .def_readwrite("z", &Point3::z)
      .def("x_um", &Point3::x_um)
      .def("y_um", &Point3::y_um)
      .def("z_um", &Point3::z_um)
      .def("__repr__", &point_repr);

  py::class_<Phasor>(m, "Phasor",
                     "Amplitude/phase pair describing a drive current.")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("amplitude"), py::arg("phase"))
      .def("amplitude", &Phasor::amplitude)
      .def("phase", &Phasor::phase)
      .def("value", &Phasor::value)
      .def("__repr__", [](const Phasor& p) {
        std::ostringstream out;
        out << "Phasor(" << p.amplitude() << ", " << p.phase() << ")";
        return out.str();
      });

  py::enum_<LoopShape>(m, "LoopShape")
      .value("CIRCLE", LoopShape::kCircle)
      .value("RECTANGLE", LoopShape::kRectangle);

  py::class_<LoopSpec>(m, "LoopSpec",
                       "Planar drive loop (normal along +z).")
      .def(py::init<>())
      .def_static("circle_um", &LoopSpec::circle_um, py::arg("diameter_um"),
                  py::arg("centre") = Point3{}, py::arg("drive") = Phasor(1.0, 0.0),
                  py::arg("winding") = +1,
                  py::arg("segment_count") = kDefaultCircleSegments)
      .def_static("rectangle_um", &LoopSpec::rectangle_um, py::arg("width_um"),
                  py::arg("height_um"), py::arg("centre") = Point3{},
                  py::arg("drive") = Phasor(1.0, 0.0), py::arg("winding") = +1,
                  py::arg("segments_per_side") = 0)
      .def_readwrite("shape", &LoopSpec::shape)
      .def_readwrite("diameter", &LoopSpec::diameter)
      .def_readwrite("width", &LoopSpec::width)
      .def_readwrite("height", &LoopSpec::height)
      .def_readwrite("centre", &LoopSpec::centre)
      .def_readwrite("winding", &LoopSpec::winding)
      .def_readwrite("drive", &LoopSpec::drive)
      .def_readwrite("segment_count", &LoopSpec::segment_count)
      .def("with_drive", &LoopSpec::with_drive, py::arg("drive"))
      .def("perimeter", &LoopSpec::perimeter);

  py::class_<Segment>(m, "Segment")
      .def_readwrite("start", &Segment::start)
      .def_readwrite("end", &Segment::end);

  m.def("discretize", &discretize, py::arg("loop"),
        "Break a loop into its closed segment chain.");
  m.def("polyline_length", &polyline_length, py::arg("segments"));
  m.def("signed_area_z", &signed_area_z, py::arg("segments"));

  py::class_<Site>(m, "Site")
      .def_readwrite("position", &Site::position)
      .def_readwrite("nn_order", &Site::nn_order);

  py::class_<SiteLayout>(m, "SiteLayout")
      .def_readwrite("spacing", &SiteLayout::spacing)
      .def_readwrite("ring_count", &SiteLayout::ring_count)
      .def_readwrite("sites", &SiteLayout::sites);

  m.def("hex_sites", &hex_sites, py::arg("spacing_um"), py::arg("ring_count"),
        "Triangular-lattice sites: the origin plus full hexagonal rings.");

  // ---- magnetostatics ----
  py::class_<FieldPhasor>(m, "FieldPhasor",
                          "Complex field phasor at a point [T].")
      .def(py::init<>())
      .def_readwrite("bx", &FieldPhasor::bx)
      .def_readwrite("by", &FieldPhasor::by)
      .def_readwrite("bz", &FieldPhasor::bz)
      .def("power_total", &FieldPhasor::power_total)
      .def("power_z", &FieldPhasor::power_z)
      .def("power_transverse", &FieldPhasor::power_transverse);

  py::class_<DiscretizedLoop>(m, "DiscretizedLoop")
      .def_readwrite("segments", &DiscretizedLoop::segments)
      .def_readwrite("drive", &DiscretizedLoop::drive);

  m.def("discretize_all", &discretize_all, py::arg("loops"));
  m.def("field_per_unit_current", &field_per_unit_current,
        py::arg("segments"), py::arg("point"),
        "Real field of a segment chain carrying 1 A [T].");
  m.def("field_at",
        py::overload_cast<const std::vector<DiscretizedLoop>&, const Point3&>(
            &field_at),
        py::arg("loops"), py::arg("point"));
  m.def("field_at",
        py::overload_cast<const std::vector<LoopSpec>&, const Point3&>(
            &field_at),
        py::arg("loops"), py::arg("point"),
        "Superposed complex field of driven loops at a point.");
  m.def("power_db", &power_db, py::arg("power"), py::arg("reference"),
        "10*log10(power/reference); below the power floor maps to -inf.");

  py::class_<LineScan>(m, "LineScan")
      .def_readwrite("start", &LineScan::start)
      .def_readwrite("direction", &LineScan::direction)
      .def_readwrite("positions_um", &LineScan::positions_um)
      .def_readwrite("samples", &LineScan::samples)
      .def_readwrite("reference_power", &LineScan::reference_power)
      .def_readwrite("reference_power_z", &LineScan::reference_power_z);

  m.def("line_scan", &line_scan, py::arg("loops"), py::arg("start"),
        py::arg("direction"), py::arg("positions_um"),
        py::arg("z_offset_um") = 0.0,
        py::arg("reference_power") = std::nullopt,
        py::arg("reference_power_z") = std::nullopt,
        "Sample the field along start + t*direction.");

  py::enum_<PowerMetric>(m, "PowerMetric")
      .value("TOTAL", PowerMetric::kTotal)
      .value("Z", PowerMetric::kZ);

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("exponent", &PowerLawFit::exponent)
      .def_readonly("std_error", &PowerLawFit::std_error)
      .def_readonly("r_squared", &PowerLawFit::r_squared)
      .def_readonly("n_samples", &PowerLawFit::n_samples);

  m.def("fit_power_law", &fit_power_law, py::arg("scan"), py::arg("x_min_um"),
        py::arg("x_max_um"), py::arg("metric") = PowerMetric::kTotal,
        "Slope of log10(power) vs log10(position) over a window.");
  m.def("amplitude_decay_exponent", &amplitude_decay_exponent,
        py::arg("scan"), py::arg("x_min_um"), py::arg("x_max_um"),
        "Slope of log10(|B|) vs log10(position); -3 in the dipole regime.");

  py::class_<Table>(m, "Table", "Numeric table with named columns.")
      .def_readwrite("name", &Table::name)
      .def_readwrite("columns", &Table::columns)
      .def_readwrite("rows", &Table::rows);

  m.def("line_scan_table", &line_scan_table, py::arg("scan"), py::arg("name"));
  m.def("to_csv", &to_csv, py::arg("table"));
  m.def(
      "write_csv",
      [](const Table& table, const std::string& path) {
        write_csv(table, path);
      },
      py::arg("table"), py::arg("path"));

  // ---- cancellation ----
  py::class_<CancellationSolution>(m, "CancellationSolution")
      .def_readonly("ratio", &CancellationSolution::ratio)
      .def_readonly("phase_offset", &CancellationSolution::phase_offset)
      .def_readonly("target", &CancellationSolution::target)
      .def_readonly("local_site", &CancellationSolution::local_site)
      .def_readonly("residual_power_db",
                    &CancellationSolution::residual_power_db)
      .def_readonly("residual_total_db",
                    &CancellationSolution::residual_total_db)
      .def_readonly("local_power_factor",
                    &CancellationSolution::local_power_factor)
      .def_readonly("centre_power_ratio",
                    &CancellationSolution::centre_power_ratio);

  m.def("solve", &solve, py::arg("inner"), py::arg("outer"), py::arg("target"),
        "Outer-loop drive that nulls Bz at the target.");
  m.def("apply", &apply, py::arg("solution"), py::arg("inner"),
        py::arg("outer"), "Loop pair with the solved outer drive applied.");
  m.def("residual_at", &residual_at, py::arg("solution"), py::arg("inner"),
        py::arg("outer"), py::arg("probe"),
        "Residual |Bz|^2 at a probe, dB relative to the local site.");

  py::class_<RatioSweepPoint>(m, "RatioSweepPoint")
      .def_readonly("factor", &RatioSweepPoint::factor)
      .def_readonly("ratio", &RatioSweepPoint::ratio)
      .def_readonly("null_x_um", &RatioSweepPoint::null_x_um)
      .def_readonly("null_power_db", &RatioSweepPoint::null_power_db)
      .def_readonly("interior", &RatioSweepPoint::interior);

  m.def("sweep_ratio", &sweep_ratio, py::arg("inner"), py::arg("outer"),
        py::arg("solution"), py::arg("factors"), py::arg("x_min_um"),
        py::arg("x_max_um"),
        "Track the field null as the amplitude ratio is detuned.");

  py::class_<PhaseSweepResult>(m, "PhaseSweepResult")
      .def_readonly("phase", &PhaseSweepResult::phase)
      .def_readonly("p_local", &PhaseSweepResult::p_local)
      .def_readonly("p_remote", &PhaseSweepResult::p_remote)
      .def_readonly("remote_fit", &PhaseSweepResult::remote_fit)
      .def_readonly("residual_rel", &PhaseSweepResult::residual_rel)
      .def_readonly("remote_min_phase", &PhaseSweepResult::remote_min_phase)
      .def_readonly("local_modulation_depth",
                    &PhaseSweepResult::local_modulation_depth);

  m.def("sweep_phase", &sweep_phase, py::arg("inner"), py::arg("outer"),
        py::arg("ratio"), py::arg("phases"), py::arg("local_probe"),
        py::arg("remote_probe"),
        "Local/remote z-power versus relative drive phase.");
  m.def("extinction_ratio", &extinction_ratio, py::arg("solution"),
        py::arg("inner"), py::arg("outer"), py::arg("probe"),
        py::arg("imbalance_db"),
        "Residual z-power under an amplitude imbalance, rel. unmitigated.");

  // ---- fitting ----
  py::class_<DecaySinusoidFit>(m, "DecaySinusoidFit")
      .def_readonly("frequency", &DecaySinusoidFit::frequency)
      .def_readonly("t_decay", &DecaySinusoidFit::t_decay)
      .def_readonly("amplitude", &DecaySinusoidFit::amplitude)
      .def_readonly("offset", &DecaySinusoidFit::offset)
      .def_readonly("phase", &DecaySinusoidFit::phase)
      .def_readonly("frequency_err", &DecaySinusoidFit::frequency_err)
      .def_readonly("t_decay_err", &DecaySinusoidFit::t_decay_err)
      .def_readonly("amplitude_err", &DecaySinusoidFit::amplitude_err)
      .def_readonly("offset_err", &DecaySinusoidFit::offset_err)
      .def_readonly("phase_err", &DecaySinusoidFit::phase_err)
      .def_readonly("rss", &DecaySinusoidFit::rss)
      .def_readonly("iterations", &DecaySinusoidFit::iterations)
      .def("value_at", &DecaySinusoidFit::value_at, py::arg("t"));

  py::class_<GaussianDipFit>(m, "GaussianDipFit")
      .def_readonly("centre", &GaussianDipFit::centre)
      .def_readonly("sigma", &GaussianDipFit::sigma)
      .def_readonly("contrast", &GaussianDipFit::contrast)
      .def_readonly("baseline", &GaussianDipFit::baseline)
      .def_readonly("centre_err", &GaussianDipFit::centre_err)
      .def_readonly("sigma_err", &GaussianDipFit::sigma_err)
      .def_readonly("contrast_err", &GaussianDipFit::contrast_err)
      .def_readonly("baseline_err", &GaussianDipFit::baseline_err)
      .def_readonly("rss", &GaussianDipFit::rss)
      .def("value_at", &GaussianDipFit::value_at, py::arg("f"));

  py::class_<SinusoidFit>(m, "SinusoidFit")
      .def_readonly("offset", &SinusoidFit::offset)
      .def_readonly("amplitude", &SinusoidFit::amplitude)
      .def_readonly("phase0", &SinusoidFit::phase0)
      .def_readonly("offset_err", &SinusoidFit::offset_err)
      .def_readonly("amplitude_err", &SinusoidFit::amplitude_err)
      .def_readonly("r_squared", &SinusoidFit::r_squared)
      .def_readonly("rms_residual", &SinusoidFit::rms_residual)
      .def("value_at", &SinusoidFit::value_at, py::arg("x"));

  m.def("fit_decaying_sinusoid", &fit_decaying_sinusoid, py::arg("t"),
        py::arg("y"), "Fit A*cos(2*pi*f*t + phi)*exp(-t/T) + c.");
  m.def("fit_gaussian_dip", &fit_gaussian_dip, py::arg("f"), py::arg("y"),
        "Fit baseline - contrast*exp(-(f-centre)^2/(2*sigma^2)).");
  m.def("fit_sinusoid", &fit_sinusoid, py::arg("x"), py::arg("y"),
        "Fit offset + amplitude*cos(x - phase0).");

  // ---- spin ----
  py::class_<SpinParams>(m, "SpinParams", "Spin-qubit model parameters.")
      .def(py::init<>())
      .def_readwrite("resonance_hz", &SpinParams::resonance_hz)
      .def_readwrite("zero_field_splitting_hz",
                     &SpinParams::zero_field_splitting_hz)
      .def_readwrite("gyromagnetic_hz_per_t",
                     &SpinParams::gyromagnetic_hz_per_t)
      .def_readwrite("t_base_s", &SpinParams::t_base_s)
      .def_readwrite("contrast_max", &SpinParams::contrast_max)
      .def_readwrite("saturation_power", &SpinParams::saturation_power)
      .def_readwrite("odmr_sigma_hz", &SpinParams::odmr_sigma_hz)
      .def_readwrite("shots", &SpinParams::shots)
      .def_readwrite("readout_photons", &SpinParams::readout_photons)
      .def_readwrite("seed", &SpinParams::seed)
      .def_readwrite("polarize_pulse_s", &SpinParams::polarize_pulse_s)
      .def_readwrite("readout_pulse_s", &SpinParams::readout_pulse_s)
      .def_readwrite("signal_window_s", &SpinParams::signal_window_s)
      .def_readwrite("reference_window_s", &SpinParams::reference_window_s);

  m.def("validate_spin_params", &validate, py::arg("params"),
        "Raise InvalidParameterError if the parameters are out of range.");

  py::class_<DriveTone>(m, "DriveTone")
      .def(py::init<>())
      .def(py::init([](double rabi_hz, double phase, double detuning_hz) {
             DriveTone tone;
             tone.rabi_hz = rabi_hz;
             tone.phase = phase;
             tone.detuning_hz = detuning_hz;
             return tone;
           }),
           py::arg("rabi_hz"), py::arg("phase") = 0.0,
           py::arg("detuning_hz") = 0.0)
      .def_readwrite("rabi_hz", &DriveTone::rabi_hz)
      .def_readwrite("phase", &DriveTone::phase)
      .def_readwrite("detuning_hz", &DriveTone::detuning_hz);

  py::enum_<NoisePhasePolicy>(m, "NoisePhasePolicy")
      .value("FIXED", NoisePhasePolicy::kFixed)
      .value("UNIFORM_RANDOM", NoisePhasePolicy::kUniformRandom);

  py::class_<NoiseModel>(m, "NoiseModel",
                         "Residual crosstalk drive acting on the spin.")
      .def(py::init<>())
      .def(py::init([](double rabi_hz, double phase, NoisePhasePolicy policy,
                       double suppression) {
             NoiseModel noise;
             noise.rabi_hz = rabi_hz;
             noise.phase = phase;
             noise.policy = policy;
             noise.suppression = suppression;
             return noise;
           }),
           py::arg("rabi_hz"), py::arg("phase") = 0.0,
           py::arg("policy") = NoisePhasePolicy::kUniformRandom,
           py::arg("suppression") = 1.0)
      .def_readwrite("rabi_hz", &NoiseModel::rabi_hz)
      .def_readwrite("phase", &NoiseModel::phase)
      .def_readwrite("policy", &NoiseModel::policy)
      .def_readwrite("suppression", &NoiseModel::suppression);

  m.def("rabi_frequency", &rabi_frequency, py::arg("b_perp_t"),
        py::arg("gamma_hz_per_t"), "Rabi frequency of a transverse field.");
  m.def("equivalent_detuning", &equivalent_detuning, py::arg("noise_rabi_hz"),
        py::arg("suppression"),
        "Detuning with the same protection as power suppression s.");
  m.def("shot_population", &shot_population, py::arg("tau_s"),
        py::arg("tones"),
        "Excited-state population after a resonant multi-tone pulse.");

  py::class_<ToneSegment>(m, "ToneSegment")
      .def(py::init<>())
      .def(py::init([](double duration_s, std::vector<DriveTone> tones) {
             ToneSegment seg;
             seg.duration_s = duration_s;
             seg.tones = std::move(tones);
             return seg;
           }),
           py::arg("duration_s"), py::arg("tones"))
      .def_readwrite("duration_s", &ToneSegment::duration_s)
      .def_readwrite("tones", &ToneSegment::tones);

  m.def("bloch_evolve", &bloch_evolve, py::arg("schedule"),
        "Evolve |0> through the schedule; returns (p0, p1).");

  py::class_<RabiTrace>(m, "RabiTrace")
      .def_readonly("tau_s", &RabiTrace::tau_s)
      .def_readonly("values", &RabiTrace::values)
      .def_readonly("fit", &RabiTrace::fit)
      .def_readonly("seed", &RabiTrace::seed);

  m.def("default_tau_grid", &default_tau_grid, py::arg("params"));
  m.def("rabi_trace", &rabi_trace, py::arg("params"), py::arg("drive"),
        py::arg("noise"), py::arg("tau_s"),
        "Monte-Carlo Rabi trace with its decaying-sinusoid fit.");
  m.def("calibrate_noise", &calibrate_noise, py::arg("params"),
        py::arg("drive"), py::arg("target_t_s"),
        "Noise Rabi amplitude that decays the fitted trace to the target.");

  py::class_<OdmrSpectrum>(m, "OdmrSpectrum")
      .def_readonly("frequency_hz", &OdmrSpectrum::frequency_hz)
      .def_readonly("pl", &OdmrSpectrum::pl)
      .def_readonly("fit", &OdmrSpectrum::fit)
      .def_readonly("drive_power", &OdmrSpectrum::drive_power)
      .def_readonly("true_contrast", &OdmrSpectrum::true_contrast);

  m.def("odmr_spectrum", &odmr_spectrum, py::arg("params"), py::arg("tones"),
        py::arg("frequency_hz"), py::arg("photons_per_point"),
        "CW ODMR spectrum with Poisson shot noise and its dip fit.");

  py::class_<ContrastVsPhase>(m, "ContrastVsPhase")
      .def_readonly("phase", &ContrastVsPhase::phase)
      .def_readonly("contrast", &ContrastVsPhase::contrast)
      .def_readonly("contrast_err", &ContrastVsPhase::contrast_err)
      .def_readonly("fit", &ContrastVsPhase::fit)
      .def_readonly("min_phase", &ContrastVsPhase::min_phase)
      .def_readonly("normalized_min_power",
                    &ContrastVsPhase::normalized_min_power);

  m.def("contrast_vs_phase", &contrast_vs_phase, py::arg("params"),
        py::arg("inner"), py::arg("outer"), py::arg("static_offset"),
        py::arg("phase_grid"), py::arg("photons_per_point"),
        "ODMR contrast versus relative phase of two resonant tones.");

  py::class_<CoherencePenalty>(m, "CoherencePenalty")
      .def_readonly("reduction", &CoherencePenalty::reduction)
      .def_readonly("uncertainty", &CoherencePenalty::uncertainty)
      .def_readonly("t_clean_s", &CoherencePenalty::t_clean_s)
      .def_readonly("t_noisy_s", &CoherencePenalty::t_noisy_s);

  m.def("coherence_penalty", &coherence_penalty, py::arg("params"),
        py::arg("drive"), py::arg("noise_power_db"),
        "Fractional Rabi-decay-time reduction from residual crosstalk.");

  // ---- config / experiments (JSON-text bridge) ----
  m.def(
      "validate_config_json",
      [](const std::string& config_text) {
        const Json config = parse_json_arg(config_text, "<python>");
        const ValidationReport report = validate_config(config);
        std::vector<std::pair<std::string, std::string>> errors;
        std::vector<std::pair<std::string, std::string>> warnings;
        for (const auto& issue : report.errors)
          errors.emplace_back(issue.path, issue.message);
        for (const auto& issue : report.warnings)
          warnings.emplace_back(issue.path, issue.message);
        return py::make_tuple(report.ok(), errors, warnings,
                              report.to_string());
      },
      py::arg("config_text"),
      "Validate config JSON text; returns (ok, errors, warnings, report).");
  m.def(
      "config_hash8_json",
      [](const std::string& config_text) {
        return config_hash8(parse_json_arg(config_text, "<python>"));
      },
      py::arg("config_text"), "Eight-hex-digit hash of a config.");
  m.def(
      "config_seed_json",
      [](const std::string& config_text,
         std::optional<std::uint64_t> override) {
        return config_seed(parse_json_arg(config_text, "<python>"), override);
      },
      py::arg("config_text"), py::arg("override") = std::nullopt);

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("scenario", &ScenarioResult::scenario)
      .def_readonly("config_hash", &ScenarioResult::config_hash)
      .def_readonly("seed", &ScenarioResult::seed)
      .def_readonly("version", &ScenarioResult::version)
      .def_readonly("tables", &ScenarioResult::tables)
      .def_property_readonly("summary_json", [](const ScenarioResult& r) {
        return r.summary.dump(2);
      });

  m.def("scenario_names", [] { return scenario_names(); });
  m.def(
      "run_scenario_json",
      [](const std::string& config_text,
         std::optional<std::uint64_t> seed_override) {
        return run_scenario(parse_json_arg(config_text, "<python>"),
                            seed_override);
      },
      py::arg("config_text"), py::arg("seed") = std::nullopt,
      "Run the scenario named in the config (JSON text).");
  m.def("write_result", &write_result, py::arg("result"), py::arg("out_dir"),
        "Write the result's CSV tables and summary JSON; returns paths.");

  py::class_<MetricCheck>(m, "MetricCheck")
      .def_readonly("name", &MetricCheck::name)
      .def_readonly("value", &MetricCheck::value)
      .def_readonly("reference", &MetricCheck::reference)
      .def_readonly("deviation", &MetricCheck::deviation)
      .def_readonly("tolerance", &MetricCheck::tolerance)
      .def_readonly("passed", &MetricCheck::pass);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("checks", &ComparisonReport::checks)
      .def("passed", &ComparisonReport::pass)
      .def("__str__", &ComparisonReport::to_string);

  m.def(
      "compare_to_reference_json",
      [](const ScenarioResult& result, const std::string& reference_text) {
        return compare_to_reference(
            result, parse_json_arg(reference_text, "<reference>"));
      },
      py::arg("result"), py::arg("reference_text"),
      "Check result metrics against a reference record (JSON text).");
}
