#include "duoloop/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "duoloop/errors.hpp"
#include "duoloop/rng.hpp"
#include "duoloop/units.hpp"

namespace duoloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_xy(const std::vector<double>& x, const std::vector<double>& y,
              std::size_t min_samples, const char* op) {
  if (x.size() != y.size()) {
    throw InvalidParameterError(std::string(op) +
                                ": abscissa/ordinate size mismatch");
  }
  if (x.size() < min_samples) {
    throw InvalidParameterError(std::string(op) + ": need at least " +
                                std::to_string(min_samples) + " samples");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidParameterError(std::string(op) +
                                  ": samples must be finite");
    }
  }
}

// Fills residuals r (model - y) and the Jacobian dr/dp.
using ResidualFn =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                       Eigen::MatrixXd&)>;

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd errors;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Levenberg-Marquardt with multiplicative damping and box constraints
// (trial steps are clamped into [lo, hi]).  Dimensions here are tiny
// (<= 5 parameters), so dense solves are the right tool.
LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p,
                             const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi,
                             int max_iterations = 200) {
  const auto clamp = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = std::clamp(v[i], lo[i], hi[i]);
    }
  };
  clamp(p);

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  fn(p, r, J);
  double rss = r.squaredNorm();

  double lambda = 1e-3;
  LmResult result;
  bool converged = false;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd jtr = J.transpose() * r;
    if (jtr.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + rss)) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index i = 0; i < damped.rows(); ++i) {
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      }
      Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      Eigen::VectorXd trial = p + step;
      clamp(trial);

      Eigen::VectorXd r_trial;
      Eigen::MatrixXd j_trial;
      fn(trial, r_trial, j_trial);
      const double rss_trial = r_trial.squaredNorm();
      if (rss_trial < rss) {
        const double improvement = rss - rss_trial;
        const double step_norm = (trial - p).norm();
        p = trial;
        r.swap(r_trial);
        J.swap(j_trial);
        rss = rss_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (improvement < 1e-14 * (1.0 + rss) ||
            step_norm < 1e-12 * (1.0 + p.norm())) {
          converged = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!stepped) {
      converged = true;  // no damping level improves: accept the minimum
      break;
    }
    if (converged) break;
  }

  result.params = p;
  result.rss = rss;
  result.converged = converged;
  result.iterations = iter;

  // Covariance-based parameter errors; meaningless (zero) when the system
  // has no residual degrees of freedom.
  const Eigen::Index n = r.size();
  const Eigen::Index k = p.size();
  result.errors = Eigen::VectorXd::Zero(k);
  if (n > k) {
    const double sigma2 = rss / static_cast<double>(n - k);
    Eigen::MatrixXd jtj = J.transpose() * J;
    for (Eigen::Index i = 0; i < k; ++i) jtj(i, i) += 1e-300;
    const Eigen::MatrixXd cov = sigma2 * jtj.inverse();
    for (Eigen::Index i = 0; i < k; ++i) {
      result.errors[i] = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : 0.0;
    }
  }
  return result;
}

// Oversampled discrete spectrum peak of the demeaned samples; returns the
// peak frequency and the complex amplitude there.
struct SpectrumPeak {
  double frequency = 0.0;
  std::complex<double> amplitude{0.0, 0.0};
};

SpectrumPeak spectrum_peak(const std::vector<double>& t,
                           const std::vector<double>& y, double mean_y) {
  const std::size_t n = t.size();
  const double span = t.back() - t.front();
  const int oversample = 8;
  const int bins = static_cast<int>(n / 2) * oversample;
  SpectrumPeak peak;
  double best_power = -1.0;
  for (int k = oversample; k <= bins; ++k) {
    const double f = static_cast<double>(k) /
                     (static_cast<double>(oversample) * span);
    std::complex<double> z{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = -kTwoPi * f * (t[i] - t.front());
      z += (y[i] - mean_y) * std::complex<double>(std::cos(arg),
                                                  std::sin(arg));
    }
    if (std::norm(z) > best_power) {
      best_power = std::norm(z);
      peak.frequency = f;
      peak.amplitude = z;
    }
  }
  return peak;
}

// Decay-time guess from a log-linear fit to block-wise RMS envelopes.
double envelope_decay_guess(const std::vector<double>& t,
                            const std::vector<double>& y, double mean_y) {
  const std::size_t n = t.size();
  const double span = t.back() - t.front();
  const int blocks = 8;
  std::vector<double> bt, blog;
  for (int b = 0; b < blocks; ++b) {
    const std::size_t i0 = b * n / blocks;
    const std::size_t i1 = (b + 1) * n / blocks;
    if (i1 <= i0) continue;
    double ss = 0.0, tm = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      ss += (y[i] - mean_y) * (y[i] - mean_y);
      tm += t[i];
    }
    const double amp = std::sqrt(2.0 * ss / static_cast<double>(i1 - i0));
    if (amp > 0.0) {
      bt.push_back(tm / static_cast<double>(i1 - i0));
      blog.push_back(std::log(amp));
    }
  }
  double t_guess = 10.0 * span;
  if (bt.size() >= 3) {
    const auto nn = static_cast<double>(bt.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < bt.size(); ++i) {
      sx += bt[i];
      sy += blog[i];
      sxx += bt[i] * bt[i];
      sxy += bt[i] * blog[i];
    }
    const double denom = nn * sxx - sx * sx;
    if (denom > 0.0) {
      const double slope = (nn * sxy - sx * sy) / denom;
      if (slope < -1e-12) t_guess = -1.0 / slope;
    }
  }
  return std::clamp(t_guess, span / 50.0, 100.0 * span);
}

}  // namespace

double DecaySinusoidFit::value_at(double t) const {
  return amplitude * std::cos(kTwoPi * frequency * t + phase) *
             std::exp(-t / t_decay) +
         offset;
}

DecaySinusoidFit fit_decaying_sinusoid(const std::vector<double>& t,
                                       const std::vector<double>& y) {
  check_xy(t, y, 20, "fit_decaying_sinusoid");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] <= t[i - 1]) {
      throw InvalidParameterError(
          "fit_decaying_sinusoid: time axis must be strictly increasing");
    }
  }
  const std::size_t n = t.size();
  const double span = t.back() - t.front();
  const double mean_y =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  double var = 0.0;
  for (double v : y) var += (v - mean_y) * (v - mean_y);
  if (var <= 0.0) {
    throw FitFailureError(
        "fit_decaying_sinusoid: constant input, no oscillation to fit", 0.0);
  }

  const SpectrumPeak peak = spectrum_peak(t, y, mean_y);
  if (peak.frequency * span < 2.0) {
    throw FitFailureError(
        "fit_decaying_sinusoid: fewer than two oscillation periods detected",
        var);
  }

  const double a0 = 2.0 * std::abs(peak.amplitude) / static_cast<double>(n);
  const double phi0 = std::arg(peak.amplitude) + kTwoPi * peak.frequency *
                                                     t.front();
  const double t0 = envelope_decay_guess(t, y, mean_y);
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double range = *ymax_it - *ymin_it;

  // Parameters: A, f, phi, T, c.
  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                             Eigen::MatrixXd& J) {
    r.resize(n);
    J.resize(n, 5);
    const double a = p[0], f = p[1], phi = p[2], tau = p[3], c = p[4];
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-t[i] / tau);
      const double arg = kTwoPi * f * t[i] + phi;
      const double cs = std::cos(arg);
      const double sn = std::sin(arg);
      r[i] = a * cs * e + c - y[i];
      J(i, 0) = cs * e;
      J(i, 1) = -a * kTwoPi * t[i] * sn * e;
      J(i, 2) = -a * sn * e;
      J(i, 3) = a * cs * e * t[i] / (tau * tau);
      J(i, 4) = 1.0;
    }
  };

  Eigen::VectorXd lo(5), hi(5);
  lo << 0.0, std::max(0.5 / span, peak.frequency / 4.0), -8.0, span / 100.0,
      *ymin_it - range;
  hi << 4.0 * range, 4.0 * peak.frequency, 8.0, 1e4 * span, *ymax_it + range;

  Eigen::VectorXd p0(5);
  p0 << a0, peak.frequency, std::remainder(phi0, kTwoPi), t0, mean_y;

  LmResult best;
  best.rss = std::numeric_limits<double>::infinity();
  RandomStream restarts(0xF17DECAF5ULL);
  for (int attempt = 0; attempt < 5; ++attempt) {
    Eigen::VectorXd p = p0;
    if (attempt > 0) {
      p[0] *= 0.7 + 0.6 * restarts.uniform();
      p[1] *= 0.85 + 0.3 * restarts.uniform();
      p[2] = kTwoPi * restarts.uniform() - std::numbers::pi;
      p[3] *= std::pow(2.0, 2.0 * restarts.uniform() - 1.0);
    }
    const LmResult run = levenberg_marquardt(residuals, p, lo, hi);
    if (run.converged && run.rss < best.rss) best = run;
  }
  if (!std::isfinite(best.rss)) {
    throw FitFailureError("fit_decaying_sinusoid: optimizer did not converge",
                          var);
  }

  DecaySinusoidFit fit;
  fit.amplitude = best.params[0];
  fit.frequency = best.params[1];
  fit.phase = best.params[2];
  fit.t_decay = best.params[3];
  fit.offset = best.params[4];
  fit.amplitude_err = best.errors[0];
  fit.frequency_err = best.errors[1];
  fit.phase_err = best.errors[2];
  fit.t_decay_err = best.errors[3];
  fit.offset_err = best.errors[4];
  fit.rss = best.rss;
  fit.iterations = best.iterations;
  if (fit.amplitude < 0.0) {  // canonical form: A >= 0, phase wrapped
    fit.amplitude = -fit.amplitude;
    fit.phase += std::numbers::pi;
  }
  fit.phase = wrap_phase(fit.phase);
  return fit;
}

double GaussianDipFit::value_at(double f) const {
  const double u = (f - centre) / sigma;
  return baseline - contrast * std::exp(-0.5 * u * u);
}

GaussianDipFit fit_gaussian_dip(const std::vector<double>& f,
                                const std::vector<double>& y) {
  check_xy(f, y, 7, "fit_gaussian_dip");
  const std::size_t n = f.size();
  const auto [fmin_it, fmax_it] = std::minmax_element(f.begin(), f.end());
  const double span = *fmax_it - *fmin_it;
  if (span <= 0.0) {
    throw InvalidParameterError("fit_gaussian_dip: degenerate frequency axis");
  }

  // Baseline from the spectrum edges, centre from the deepest sample.
  const std::size_t edge = std::max<std::size_t>(1, n / 10);
  double b0 = 0.0;
  for (std::size_t i = 0; i < edge; ++i) b0 += y[i] + y[n - 1 - i];
  b0 /= static_cast<double>(2 * edge);
  const std::size_t imin =
      std::distance(y.begin(), std::min_element(y.begin(), y.end()));
  const double c0 = std::max(b0 - y[imin], 1e-6);
  const double ymax = *std::max_element(y.begin(), y.end());

  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                             Eigen::MatrixXd& J) {
    r.resize(n);
    J.resize(n, 4);
    const double b = p[0], c = p[1], f0 = p[2], s = p[3];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (f[i] - f0) / s;
      const double g = std::exp(-0.5 * u * u);
      r[i] = b - c * g - y[i];
      J(i, 0) = 1.0;
      J(i, 1) = -g;
      J(i, 2) = -c * g * u / s;
      J(i, 3) = -c * g * u * u / s;
    }
  };

  const double df = span / static_cast<double>(n - 1);
  Eigen::VectorXd lo(4), hi(4);
  lo << 0.0, -0.5, *fmin_it, 0.5 * df;
  hi << 2.0 * std::max(ymax, 1.0), 1.5, *fmax_it, 4.0 * span;

  LmResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (double sigma_scale : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd p(4);
    p << b0, c0, f[imin], sigma_scale * span / 8.0;
    const LmResult run = levenberg_marquardt(residuals, p, lo, hi);
    if (run.converged && run.rss < best.rss) best = run;
  }
  if (!std::isfinite(best.rss)) {
    throw FitFailureError("fit_gaussian_dip: optimizer did not converge", 0.0);
  }

  GaussianDipFit fit;
  fit.baseline = best.params[0];
  fit.contrast = best.params[1];
  fit.centre = best.params[2];
  fit.sigma = best.params[3];
  fit.baseline_err = best.errors[0];
  fit.contrast_err = best.errors[1];
  fit.centre_err = best.errors[2];
  fit.sigma_err = best.errors[3];
  fit.rss = best.rss;
  return fit;
}

double SinusoidFit::value_at(double x) const {
  return offset + amplitude * std::cos(x - phase0);
}

SinusoidFit fit_sinusoid(const std::vector<double>& x,
                         const std::vector<double>& y) {
  check_xy(x, y, 4, "fit_sinusoid");
  const std::size_t n = x.size();

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(x[i]);
    design(i, 2) = std::sin(x[i]);
    rhs[i] = y[i];
  }
  const Eigen::MatrixXd xtx = design.transpose() * design;
  if (std::abs(xtx.determinant()) < 1e-12) {
    throw FitDomainError("fit_sinusoid: degenerate phase grid");
  }
  const Eigen::VectorXd beta = xtx.ldlt().solve(design.transpose() * rhs);

  const Eigen::VectorXd resid = design * beta - rhs;
  const double rss = resid.squaredNorm();
  const double mean_y = rhs.mean();
  double tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tss += (y[i] - mean_y) * (y[i] - mean_y);
  }

  SinusoidFit fit;
  fit.offset = beta[0];
  fit.amplitude = std::hypot(beta[1], beta[2]);
  fit.phase0 = wrap_phase(std::atan2(beta[2], beta[1]));
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.rms_residual = std::sqrt(rss / static_cast<double>(n));

  if (n > 3) {
    const double sigma2 = rss / static_cast<double>(n - 3);
    const Eigen::MatrixXd cov = sigma2 * xtx.inverse();
    fit.offset_err = std::sqrt(std::max(cov(0, 0), 0.0));
    if (fit.amplitude > 1e-12) {
      const double gc = beta[1] / fit.amplitude;
      const double gs = beta[2] / fit.amplitude;
      const double v = gc * gc * cov(1, 1) + gs * gs * cov(2, 2) +
                       2.0 * gc * gs * cov(1, 2);
      fit.amplitude_err = std::sqrt(std::max(v, 0.0));
    } else {
      fit.amplitude_err = std::sqrt(
          std::max(0.5 * (cov(1, 1) + cov(2, 2)), 0.0));
    }
  }
  return fit;
}

}  // namespace duoloop
