#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "duoloop/fitting.hpp"

namespace duoloop {

/// Two-level spin and measurement parameters.  Frequencies are Hz, times
/// seconds.  Drive "power" is expressed in squared Rabi frequency [Hz^2]
/// throughout the spin module.
struct SpinParams {
  double resonance_hz = 3.14e9;
  double zero_field_splitting_hz = 2.87e9;
  double gyromagnetic_hz_per_t = 2.8e10;
  /// Intrinsic Rabi decay time [s]: the envelope exp(-tau/t_base) applied
  /// to every simulated trace before crosstalk dephasing.
  double t_base_s = 761e-9;
  /// Saturated ODMR dip contrast.
  double contrast_max = 0.3;
  /// Drive power [Hz^2] at which the dip contrast saturates.
  double saturation_power = 8e12;
  /// ODMR dip Gaussian width [Hz].
  double odmr_sigma_hz = 5e6;
  int shots = 2000;
  /// Per-shot PL photon budget for trace readout jitter; 0 disables it.
  double readout_photons = 0.0;
  std::uint64_t seed = 1;
  /// Pulse-schedule bookkeeping [s] (polarize, readout, and the signal /
  /// reference integration windows inside the readout pulse).
  double polarize_pulse_s = 3.0e-6;
  double readout_pulse_s = 3.0e-6;
  double signal_window_s = 0.5e-6;
  double reference_window_s = 1.5e-6;
};

/// Throws InvalidParameterError if any field is out of range.
void validate(const SpinParams& params);

/// One microwave tone in the rotating frame.
struct DriveTone {
  double rabi_hz = 0.0;      // Rabi frequency, >= 0
  double phase = 0.0;        // drive phase [rad]
  double detuning_hz = 0.0;  // offset from the spin resonance
};

enum class NoisePhasePolicy { kFixed, kUniformRandom };

/// Residual crosstalk drive acting on the spin.  The phase is redrawn per
/// shot under kUniformRandom (a phase shifter ahead of the power splitter
/// randomizes the aggressor phase between repetitions); kFixed pins it.
struct NoiseModel {
  double rabi_hz = 0.0;
  double phase = 0.0;
  NoisePhasePolicy policy = NoisePhasePolicy::kUniformRandom;
  /// Residual power fraction s in [0, 1]: the noise amplitude is scaled
  /// by sqrt(s) before it reaches the spin.
  double suppression = 1.0;
};

/// Rabi frequency of a transverse field: gamma * B_perp / 2.
double rabi_frequency(double b_perp_t, double gamma_hz_per_t);

/// Static detuning that dephases as strongly as a residual resonant drive:
/// delta = noise_rabi * sqrt(1/s - 1) for residual power fraction s.
double equivalent_detuning(double noise_rabi_hz, double suppression);

/// Excited-state population after driving for tau_s from the ground state.
/// Resonant tones combine as phasors into one effective Rabi frequency;
/// a single detuned tone uses the generalized Rabi formula.  Mixed nonzero
/// detunings are outside this closed form (use bloch_evolve).
double shot_population(double tau_s, const std::vector<DriveTone>& tones);

/// Piecewise-constant drive interval: all tones in a segment must share
/// one detuning value so the rotating-frame Hamiltonian is well defined.
struct ToneSegment {
  double duration_s = 0.0;
  std::vector<DriveTone> tones;
};

/// Evolve |0> through the schedule with exact SU(2) rotations; returns
/// {ground, excited} populations.
std::array<double, 2> bloch_evolve(const std::vector<ToneSegment>& schedule);

/// Monte-Carlo Rabi trace.  `values` holds PL contrast normalized to
/// [-1, 1]: the shot-averaged cos(2*pi*f_tot*tau) under the per-shot noise
/// phasor, damped by exp(-tau/t_base) (readout jitter on top if enabled).
struct RabiTrace {
  std::vector<double> tau_s;
  std::vector<double> values;
  DecaySinusoidFit fit;
  std::uint64_t seed = 0;
};

/// Default trace grid: 201 points from 0 to 1.314 * t_base (about seven
/// drive periods at the reference operating point).
std::vector<double> default_tau_grid(const SpinParams& params);

RabiTrace rabi_trace(const SpinParams& params, const DriveTone& drive,
                     const NoiseModel& noise,
                     const std::vector<double>& tau_s);

/// Find the noise Rabi amplitude (uniform random phase, s = 1) that decays
/// the fitted trace time to `target_t_s`.  Bisection on the monotone
/// response; the returned amplitude reproduces the target within 2%.
/// Throws InfeasibleTargetError if the target is not below t_base or not
/// reachable, FitFailureError if the bisection cannot close the gap.
double calibrate_noise(const SpinParams& params, const DriveTone& drive,
                       double target_t_s);

/// Continuous-wave ODMR spectrum with Poisson photon shot noise.
struct OdmrSpectrum {
  std::vector<double> frequency_hz;
  std::vector<double> pl;  // normalized PL, dips below 1 at the resonance
  GaussianDipFit fit;
  double drive_power = 0.0;    // coherent tone-phasor power [Hz^2]
  double true_contrast = 0.0;  // noiseless dip depth used to generate pl
};

/// Tones must be resonant (their phasor sum sets the power); the frequency
/// axis is the swept probe and must span the resonance.
/// `photons_per_point` of 0 disables shot noise.
OdmrSpectrum odmr_spectrum(const SpinParams& params,
                           const std::vector<DriveTone>& tones,
                           const std::vector<double>& frequency_hz,
                           double photons_per_point);

/// Fitted ODMR contrast versus relative drive phase of two tones.
struct ContrastVsPhase {
  std::vector<double> phase;
  std::vector<double> contrast;
  std::vector<double> contrast_err;
  SinusoidFit fit;            // contrast = a + b*cos(phase - phase0)
  double min_phase = 0.0;     // fitted contrast minimum [rad]
  double normalized_min_power = 0.0;  // (a - b) / (a + b)
};

/// Sweep the relative phase of `outer` against `inner` (both resonant)
/// with a constant extra offset `static_offset` added to the outer phase;
/// each grid point runs a full noisy spectrum and dip fit.
ContrastVsPhase contrast_vs_phase(const SpinParams& params,
                                  const DriveTone& inner,
                                  const DriveTone& outer,
                                  double static_offset,
                                  const std::vector<double>& phase_grid,
                                  double photons_per_point);

/// Fractional Rabi-decay-time reduction caused by residual crosstalk noise
/// at `noise_power_db` relative to the drive power (amplitude ratio
/// 10^(db/20)), with the uncertainty propagated from both trace fits.
struct CoherencePenalty {
  double reduction = 0.0;
  double uncertainty = 0.0;
  double t_clean_s = 0.0;
  double t_noisy_s = 0.0;
};

CoherencePenalty coherence_penalty(const SpinParams& params,
                                   const DriveTone& drive,
                                   double noise_power_db);

}  // namespace duoloop
