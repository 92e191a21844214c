#include "duoloop/spin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "duoloop/errors.hpp"
#include "duoloop/rng.hpp"
#include "duoloop/units.hpp"

namespace duoloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream tags keep independent random consumers off each other's indices.
constexpr std::uint64_t kTagShotPhase = 0x5348'4F54'5048'5331ULL;
constexpr std::uint64_t kTagReadout = 0x5245'4144'4F55'5431ULL;
constexpr std::uint64_t kTagOdmr = 0x4F44'4D52'5054'5331ULL;
constexpr std::uint64_t kTagPhaseScan = 0x5048'4153'4553'4331ULL;

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidParameterError(std::string(name) +
                                " must be finite and >= 0");
  }
}

void validate_tone(const DriveTone& tone) {
  require_finite_nonneg(tone.rabi_hz, "tone rabi_hz");
  if (!std::isfinite(tone.phase) || !std::isfinite(tone.detuning_hz)) {
    throw InvalidParameterError("tone phase/detuning must be finite");
  }
}

// Coherent phasor sum of resonant tones [Hz].
std::complex<double> tone_phasor(const std::vector<DriveTone>& tones) {
  std::complex<double> sum{0.0, 0.0};
  for (const DriveTone& t : tones) {
    validate_tone(t);
    sum += std::polar(t.rabi_hz, t.phase);
  }
  return sum;
}

void check_tau_grid(const std::vector<double>& tau_s) {
  if (tau_s.size() < 20) {
    throw InvalidParameterError("tau grid needs at least 20 points");
  }
  for (std::size_t i = 0; i < tau_s.size(); ++i) {
    if (!std::isfinite(tau_s[i]) || tau_s[i] < 0.0) {
      throw InvalidParameterError("tau grid must be finite and >= 0");
    }
    if (i > 0 && tau_s[i] <= tau_s[i - 1]) {
      throw InvalidParameterError("tau grid must be strictly increasing");
    }
  }
}

}  // namespace

void validate(const SpinParams& p) {
  if (!(p.resonance_hz > 0.0) || !std::isfinite(p.resonance_hz)) {
    throw InvalidParameterError("resonance_hz must be > 0");
  }
  if (!(p.gyromagnetic_hz_per_t > 0.0)) {
    throw InvalidParameterError("gyromagnetic_hz_per_t must be > 0");
  }
  if (!(p.t_base_s > 0.0) || !std::isfinite(p.t_base_s)) {
    throw InvalidParameterError("t_base_s must be > 0");
  }
  if (!(p.contrast_max > 0.0) || p.contrast_max > 1.0) {
    throw InvalidParameterError("contrast_max must be in (0, 1]");
  }
  if (!(p.saturation_power > 0.0)) {
    throw InvalidParameterError("saturation_power must be > 0");
  }
  if (!(p.odmr_sigma_hz > 0.0)) {
    throw InvalidParameterError("odmr_sigma_hz must be > 0");
  }
  if (p.shots < 1) {
    throw InvalidParameterError("shots must be >= 1");
  }
  require_finite_nonneg(p.readout_photons, "readout_photons");
  for (double window : {p.polarize_pulse_s, p.readout_pulse_s,
                        p.signal_window_s, p.reference_window_s}) {
    if (!(window > 0.0) || !std::isfinite(window)) {
      throw InvalidParameterError("pulse windows must be > 0");
    }
  }
  if (p.signal_window_s + p.reference_window_s > p.readout_pulse_s) {
    throw InvalidParameterError(
        "signal + reference windows exceed the readout pulse");
  }
}

double rabi_frequency(double b_perp_t, double gamma_hz_per_t) {
  require_finite_nonneg(b_perp_t, "b_perp_t");
  if (!(gamma_hz_per_t > 0.0)) {
    throw InvalidParameterError("gamma_hz_per_t must be > 0");
  }
  return 0.5 * gamma_hz_per_t * b_perp_t;
}

double equivalent_detuning(double noise_rabi_hz, double suppression) {
  require_finite_nonneg(noise_rabi_hz, "noise_rabi_hz");
  if (!(suppression > 0.0) || suppression > 1.0) {
    throw InvalidParameterError("suppression must be in (0, 1]");
  }
  return noise_rabi_hz * std::sqrt(1.0 / suppression - 1.0);
}

double shot_population(double tau_s, const std::vector<DriveTone>& tones) {
  require_finite_nonneg(tau_s, "tau_s");
  int detuned = 0;
  for (const DriveTone& t : tones) {
    validate_tone(t);
    if (t.detuning_hz != 0.0) ++detuned;
  }
  if (detuned == 0) {
    const double f_tot = std::abs(tone_phasor(tones));
    const double s = std::sin(std::numbers::pi * f_tot * tau_s);
    return s * s;
  }
  if (tones.size() == 1) {
    // Generalized Rabi: oscillation at sqrt(f^2 + delta^2), amplitude
    // capped at f^2/(f^2 + delta^2).
    const double f = tones[0].rabi_hz;
    const double d = tones[0].detuning_hz;
    const double f_gen = std::hypot(f, d);
    if (f_gen == 0.0) return 0.0;
    const double s = std::sin(std::numbers::pi * f_gen * tau_s);
    return (f * f) / (f_gen * f_gen) * s * s;
  }
  throw ContractViolationError(
      "shot_population: multiple tones with nonzero detuning have no "
      "closed form; use bloch_evolve");
}

std::array<double, 2> bloch_evolve(const std::vector<ToneSegment>& schedule) {
  // State in the rotating frame, starting in |0>.
  std::complex<double> a{1.0, 0.0};
  std::complex<double> b{0.0, 0.0};
  for (const ToneSegment& seg : schedule) {
    require_finite_nonneg(seg.duration_s, "segment duration");
    if (seg.duration_s == 0.0) continue;
    double detuning = 0.0;
    std::complex<double> omega{0.0, 0.0};
    for (std::size_t i = 0; i < seg.tones.size(); ++i) {
      validate_tone(seg.tones[i]);
      if (i == 0) {
        detuning = seg.tones[i].detuning_hz;
      } else if (seg.tones[i].detuning_hz != detuning) {
        throw ContractViolationError(
            "bloch_evolve: tones within one segment must share a detuning");
      }
      omega += std::polar(seg.tones[i].rabi_hz, seg.tones[i].phase);
    }
    // Rotation vector (radians/s): v = 2*pi*(Re omega, Im omega, delta).
    const double vx = kTwoPi * omega.real();
    const double vy = kTwoPi * omega.imag();
    const double vz = kTwoPi * detuning;
    const double v = std::sqrt(vx * vx + vy * vy + vz * vz);
    if (v == 0.0) continue;
    const double theta = v * seg.duration_s;
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta) / v;
    // U = c*I - i*s*(v . sigma)
    const std::complex<double> i_unit{0.0, 1.0};
    const std::complex<double> u00 = c - i_unit * (s * vz);
    const std::complex<double> u01 = -i_unit * s * (vx - i_unit * vy);
    const std::complex<double> u10 = -i_unit * s * (vx + i_unit * vy);
    const std::complex<double> u11 = c + i_unit * (s * vz);
    const std::complex<double> a_new = u00 * a + u01 * b;
    const std::complex<double> b_new = u10 * a + u11 * b;
    a = a_new;
    b = b_new;
  }
  const double p0 = std::norm(a);
  const double p1 = std::norm(b);
  const double total = p0 + p1;
  return {p0 / total, p1 / total};
}

std::vector<double> default_tau_grid(const SpinParams& params) {
  const int n = 201;
  const double t_max = 1.314 * params.t_base_s;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = t_max * i / static_cast<double>(n - 1);
  }
  return grid;
}

RabiTrace rabi_trace(const SpinParams& params, const DriveTone& drive,
                     const NoiseModel& noise,
                     const std::vector<double>& tau_s) {
  validate(params);
  validate_tone(drive);
  if (drive.detuning_hz != 0.0) {
    throw ContractViolationError(
        "rabi_trace: the drive tone must be resonant");
  }
  if (!(drive.rabi_hz > 0.0)) {
    throw InvalidParameterError("rabi_trace: drive rabi_hz must be > 0");
  }
  require_finite_nonneg(noise.rabi_hz, "noise rabi_hz");
  if (!std::isfinite(noise.phase)) {
    throw InvalidParameterError("noise phase must be finite");
  }
  if (!(noise.suppression >= 0.0) || noise.suppression > 1.0) {
    throw InvalidParameterError("noise suppression must be in [0, 1]");
  }
  check_tau_grid(tau_s);
  const double span = tau_s.back() - tau_s.front();
  if (span * drive.rabi_hz < 3.0) {
    throw InvalidParameterError(
        "rabi_trace: tau grid must span at least 3 drive periods");
  }

  const double g = std::sqrt(noise.suppression) * noise.rabi_hz;
  const std::size_t n = tau_s.size();
  std::vector<double> mean_cos(n, 0.0);

  const bool stochastic =
      g > 0.0 && noise.policy == NoisePhasePolicy::kUniformRandom;
  if (stochastic && params.shots < 100) {
    throw InvalidParameterError(
        "rabi_trace: stochastic noise needs at least 100 shots");
  }
  const int shots = stochastic ? params.shots : 1;
  const std::complex<double> drive_phasor =
      std::polar(drive.rabi_hz, drive.phase);
  for (int shot = 0; shot < shots; ++shot) {
    double noise_phase = noise.phase;
    if (stochastic) {
      RandomStream stream = RandomStream::for_index(
          params.seed, static_cast<std::uint64_t>(shot), kTagShotPhase);
      noise_phase = kTwoPi * stream.uniform();
    }
    const double f_tot =
        std::abs(drive_phasor + std::polar(g, drive.phase + noise_phase));
    for (std::size_t i = 0; i < n; ++i) {
      mean_cos[i] += std::cos(kTwoPi * f_tot * tau_s[i]);
    }
  }

  RabiTrace trace;
  trace.tau_s = tau_s;
  trace.seed = params.seed;
  trace.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.values[i] = mean_cos[i] / static_cast<double>(shots) *
                      std::exp(-tau_s[i] / params.t_base_s);
  }
  if (params.readout_photons > 0.0) {
    const double sigma =
        1.0 / std::sqrt(params.readout_photons *
                        static_cast<double>(std::max(shots, 1)));
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream stream = RandomStream::for_index(
          params.seed, static_cast<std::uint64_t>(i), kTagReadout);
      trace.values[i] += sigma * stream.normal();
    }
  }
  trace.fit = fit_decaying_sinusoid(trace.tau_s, trace.values);
  return trace;
}

double calibrate_noise(const SpinParams& params, const DriveTone& drive,
                       double target_t_s) {
  validate(params);
  validate_tone(drive);
  if (!(target_t_s > 0.0) || !std::isfinite(target_t_s)) {
    throw InvalidParameterError("calibrate_noise: target must be > 0");
  }
  if (target_t_s >= params.t_base_s) {
    throw InfeasibleTargetError(
        "calibrate_noise: target decay time is not below t_base; adding "
        "noise can only shorten the trace");
  }

  const std::vector<double> grid = default_tau_grid(params);
  const auto fitted_t = [&](double noise_rabi_hz) {
    NoiseModel noise;
    noise.rabi_hz = noise_rabi_hz;
    noise.policy = NoisePhasePolicy::kUniformRandom;
    noise.suppression = 1.0;
    return rabi_trace(params, drive, noise, grid).fit.t_decay;
  };

  double lo = 0.0;
  double hi = 0.25 * drive.rabi_hz;
  double t_hi = fitted_t(hi);
  int expand = 0;
  while (t_hi > target_t_s && expand < 6) {
    lo = hi;
    hi *= 2.0;
    t_hi = fitted_t(hi);
    ++expand;
  }
  if (t_hi > target_t_s) {
    throw InfeasibleTargetError(
        "calibrate_noise: target not reachable with noise up to 16x the "
        "drive amplitude");
  }

  double mid = hi;
  double t_mid = t_hi;
  for (int iter = 0; iter < 48; ++iter) {
    mid = 0.5 * (lo + hi);
    t_mid = fitted_t(mid);
    if (std::abs(t_mid - target_t_s) <= 0.01 * target_t_s) break;
    if (t_mid > target_t_s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(t_mid - target_t_s) > 0.02 * target_t_s) {
    throw FitFailureError(
        "calibrate_noise: bisection stalled at " +
            std::to_string(t_mid * 1e9) + " ns for target " +
            std::to_string(target_t_s * 1e9) + " ns",
        std::abs(t_mid - target_t_s) / target_t_s);
  }
  return mid;
}

OdmrSpectrum odmr_spectrum(const SpinParams& params,
                           const std::vector<DriveTone>& tones,
                           const std::vector<double>& frequency_hz,
                           double photons_per_point) {
  validate(params);
  require_finite_nonneg(photons_per_point, "photons_per_point");
  if (frequency_hz.size() < 7) {
    throw InvalidParameterError("odmr_spectrum: need at least 7 frequencies");
  }
  for (std::size_t i = 0; i < frequency_hz.size(); ++i) {
    if (!std::isfinite(frequency_hz[i])) {
      throw InvalidParameterError("odmr_spectrum: frequencies must be finite");
    }
    if (i > 0 && frequency_hz[i] <= frequency_hz[i - 1]) {
      throw InvalidParameterError(
          "odmr_spectrum: frequencies must be strictly increasing");
    }
  }
  if (params.resonance_hz < frequency_hz.front() ||
      params.resonance_hz > frequency_hz.back()) {
    throw InvalidParameterError(
        "odmr_spectrum: frequency grid must span the resonance");
  }
  for (const DriveTone& t : tones) {
    validate_tone(t);
    if (t.detuning_hz != 0.0) {
      throw ContractViolationError(
          "odmr_spectrum: tone detunings are swept by the frequency axis "
          "and must be zero");
    }
  }

  OdmrSpectrum spectrum;
  spectrum.frequency_hz = frequency_hz;
  spectrum.drive_power = std::norm(tone_phasor(tones));
  spectrum.true_contrast =
      params.contrast_max *
      std::min(1.0, spectrum.drive_power / params.saturation_power);

  spectrum.pl.resize(frequency_hz.size());
  for (std::size_t i = 0; i < frequency_hz.size(); ++i) {
    const double u =
        (frequency_hz[i] - params.resonance_hz) / params.odmr_sigma_hz;
    const double pl = 1.0 - spectrum.true_contrast * std::exp(-0.5 * u * u);
    if (photons_per_point > 0.0) {
      RandomStream stream = RandomStream::for_index(
          params.seed, static_cast<std::uint64_t>(i), kTagOdmr);
      spectrum.pl[i] =
          static_cast<double>(stream.poisson(photons_per_point * pl)) /
          photons_per_point;
    } else {
      spectrum.pl[i] = pl;
    }
  }
  spectrum.fit = fit_gaussian_dip(spectrum.frequency_hz, spectrum.pl);
  return spectrum;
}

ContrastVsPhase contrast_vs_phase(const SpinParams& params,
                                  const DriveTone& inner,
                                  const DriveTone& outer,
                                  double static_offset,
                                  const std::vector<double>& phase_grid,
                                  double photons_per_point) {
  validate(params);
  validate_tone(inner);
  validate_tone(outer);
  if (!std::isfinite(static_offset)) {
    throw InvalidParameterError("static_offset must be finite");
  }
  if (phase_grid.size() < 8) {
    throw InvalidParameterError(
        "contrast_vs_phase: need at least 8 phase points");
  }

  // Fixed probe grid spanning +-6 sigma around the dip.
  const int n_freq = 61;
  std::vector<double> freqs(n_freq);
  for (int i = 0; i < n_freq; ++i) {
    freqs[i] = params.resonance_hz +
               params.odmr_sigma_hz * (-6.0 + 12.0 * i / (n_freq - 1.0));
  }

  ContrastVsPhase result;
  result.phase = phase_grid;
  result.contrast.reserve(phase_grid.size());
  result.contrast_err.reserve(phase_grid.size());
  for (std::size_t i = 0; i < phase_grid.size(); ++i) {
    if (!std::isfinite(phase_grid[i])) {
      throw InvalidParameterError("phase grid must be finite");
    }
    DriveTone outer_shifted = outer;
    outer_shifted.phase = outer.phase + static_offset + phase_grid[i];
    // Every phase point gets its own independent photon-noise stream.
    SpinParams point_params = params;
    point_params.seed =
        RandomStream::for_index(params.seed, i, kTagPhaseScan).next_u64();
    const OdmrSpectrum spectrum = odmr_spectrum(
        point_params, {inner, outer_shifted}, freqs, photons_per_point);
    result.contrast.push_back(spectrum.fit.contrast);
    result.contrast_err.push_back(spectrum.fit.contrast_err);
  }

  result.fit = fit_sinusoid(result.phase, result.contrast);
  result.min_phase = wrap_phase(result.fit.phase0 + std::numbers::pi);
  const double peak = result.fit.offset + result.fit.amplitude;
  result.normalized_min_power =
      peak > 0.0 ? (result.fit.offset - result.fit.amplitude) / peak : 0.0;
  return result;
}

CoherencePenalty coherence_penalty(const SpinParams& params,
                                   const DriveTone& drive,
                                   double noise_power_db) {
  validate(params);
  validate_tone(drive);
  if (std::isnan(noise_power_db) ||
      noise_power_db == std::numeric_limits<double>::infinity()) {
    throw InvalidParameterError(
        "coherence_penalty: noise_power_db must be finite or -inf");
  }

  const std::vector<double> grid = default_tau_grid(params);
  NoiseModel clean;
  clean.rabi_hz = 0.0;
  const RabiTrace trace_clean = rabi_trace(params, drive, clean, grid);

  NoiseModel noisy;
  noisy.rabi_hz = drive.rabi_hz * std::pow(10.0, noise_power_db / 20.0);
  noisy.policy = NoisePhasePolicy::kUniformRandom;
  noisy.suppression = 1.0;
  const RabiTrace trace_noisy = rabi_trace(params, drive, noisy, grid);

  CoherencePenalty penalty;
  penalty.t_clean_s = trace_clean.fit.t_decay;
  penalty.t_noisy_s = trace_noisy.fit.t_decay;
  const double ratio = penalty.t_noisy_s / penalty.t_clean_s;
  penalty.reduction = 1.0 - ratio;
  const double rel_n =
      trace_noisy.fit.t_decay_err / std::max(penalty.t_noisy_s, 1e-300);
  const double rel_c =
      trace_clean.fit.t_decay_err / std::max(penalty.t_clean_s, 1e-300);
  penalty.uncertainty = ratio * std::sqrt(rel_n * rel_n + rel_c * rel_c);
  return penalty;
}

}  // namespace duoloop
