#pragma once

#include <vector>

namespace duoloop {

/// Result of fitting A*cos(2*pi*f*t + phi)*exp(-t/T) + c to samples.
/// Times are seconds, frequencies hertz.  Parameter errors come from the
/// fit covariance (rss/(n-p) times the inverse normal matrix).
struct DecaySinusoidFit {
  double frequency = 0.0;
  double t_decay = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
  double frequency_err = 0.0;
  double t_decay_err = 0.0;
  double amplitude_err = 0.0;
  double offset_err = 0.0;
  double phase_err = 0.0;
  double rss = 0.0;
  int iterations = 0;

  double value_at(double t) const;
};

/// Nonlinear least squares for a decaying sinusoid.  The frequency guess
/// comes from an oversampled discrete spectrum, the decay-time guess from a
/// log fit to the block-wise envelope; a handful of deterministic restarts
/// guards against local minima.  Throws InvalidParameterError for malformed
/// input (< 20 samples, mismatched/non-finite arrays, non-increasing time)
/// and FitFailureError when no oscillation is detectable or the optimizer
/// fails to converge.
DecaySinusoidFit fit_decaying_sinusoid(const std::vector<double>& t,
                                       const std::vector<double>& y);

/// Result of fitting baseline - contrast*exp(-(f-centre)^2/(2*sigma^2)).
struct GaussianDipFit {
  double centre = 0.0;
  double sigma = 0.0;
  double contrast = 0.0;
  double baseline = 0.0;
  double centre_err = 0.0;
  double sigma_err = 0.0;
  double contrast_err = 0.0;
  double baseline_err = 0.0;
  double rss = 0.0;

  double value_at(double f) const;
};

GaussianDipFit fit_gaussian_dip(const std::vector<double>& f,
                                const std::vector<double>& y);

/// Linear least squares for y = offset + amplitude*cos(x - phase0).
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;  // >= 0
  double phase0 = 0.0;     // position of the maximum, in [0, 2*pi)
  double offset_err = 0.0;
  double amplitude_err = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;

  double value_at(double x) const;
};

SinusoidFit fit_sinusoid(const std::vector<double>& x,
                         const std::vector<double>& y);

}  // namespace duoloop
