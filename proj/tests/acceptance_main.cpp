// Acceptance gate for the dual-loop transducer library.
//
// Each numbered criterion prints exactly one PASS/FAIL line with the measured
// value and the bound it is held to; the process exits nonzero if any line
// fails. Everything runs off the default scenario configs plus a handful of
// direct library calls, so this binary doubles as an end-to-end smoke test.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "duoloop/cancellation.hpp"
#include "duoloop/csv.hpp"
#include "duoloop/experiments.hpp"
#include "duoloop/geometry.hpp"
#include "duoloop/magnetostatics.hpp"
#include "duoloop/rng.hpp"
#include "duoloop/spin.hpp"

using namespace duoloop;

namespace {

int g_failures = 0;

void report(int id, bool pass, const char* label, const std::string& detail) {
  std::printf("[%2d] %s  %-46s %s\n", id, pass ? "PASS" : "FAIL", label,
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double metric(const ScenarioResult& result, const std::string& name) {
  const Json& value = result.summary.at("metrics").at(name);
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return value.get<double>();
}

Json scenario_config(const std::string& name) {
  return Json{{"scenario", {{"name", name}}}};
}

}  // namespace

int main() {
  std::printf("dual-loop transducer acceptance gate\n");
  std::printf("------------------------------------\n");

  // Line-scan scenario: covers the single-loop attenuation, the solved
  // cancellation residual, both power-law exponents, the centre power ratio
  // and the added attenuation at the 2nd/3rd-neighbour radii.
  const ScenarioResult fig1d = run_scenario(scenario_config("fig1d_line_scan"));

  {
    const double db = metric(fig1d, "single_power_db_at_1nn");
    report(1, std::abs(db - (-60.0)) <= 3.0,
           "single-loop |B|^2 at 60 um vs local site",
           fmt("%.3f dB (need -60 +/- 3)", db));
  }
  {
    const double db = metric(fig1d, "residual_bz_db");
    report(2, db <= -120.0, "cancelled |Bz|^2 residual at target",
           fmt("%.1f dB (need <= -120)", db));
  }
  {
    const double single = metric(fig1d, "single_exponent");
    const double dual = metric(fig1d, "dual_exponent");
    const bool ok =
        std::abs(single - (-6.0)) <= 1.0 && std::abs(dual - (-15.0)) <= 2.0;
    report(3, ok, "|B|^2 power-law exponents single/dual",
           fmt("%.3f / %.3f (need -6 +/- 1 and -15 +/- 2)", single, dual));
  }
  {
    const double ratio = metric(fig1d, "centre_power_ratio");
    report(4, std::abs(ratio - 6.3) <= 0.5,
           "inner:outer power ratio at local centre",
           fmt("%.3f (need 6.3 +/- 0.5)", ratio));
  }
  {
    const double a2 = metric(fig1d, "add_atten_2nn_db");
    const double a3 = metric(fig1d, "add_atten_3nn_db");
    const bool ok = a2 <= -15.0 && a3 <= -15.0;
    report(5, ok, "added dual-loop attenuation at 2nd/3rd NN",
           fmt("%.2f / %.2f dB (need <= -15)", a2, a3));
  }

  {
    // On-axis far field of the single inner loop: |B| ~ z^-3.
    const LoopSpec inner =
        LoopSpec::circle_um(15.0, Point3{0, 0, 0}, Phasor(1.0, 0.0));
    std::vector<double> z_um;
    for (double z = 100.0; z <= 500.0 + 1e-9; z += 10.0) z_um.push_back(z);
    const LineScan scan = line_scan({inner}, Point3{0, 0, 0},
                                    Point3{0, 0, 1}, z_um);
    const double exponent =
        amplitude_decay_exponent(scan, 100.0, 500.0).exponent;
    report(6, std::abs(exponent - (-3.0)) <= 0.2,
           "on-axis |B| far-field exponent",
           fmt("%.4f (need -3 +/- 0.2)", exponent));
  }

  {
    const ScenarioResult fig3k =
        run_scenario(scenario_config("fig3k_power_scaling"));
    const double slope = metric(fig3k, "slope");
    report(7, std::abs(slope - 0.5) <= 0.02, "f_Rabi vs power log-log slope",
           fmt("%.5f (need 0.50 +/- 0.02)", slope));
  }

  {
    const ScenarioResult fig4c =
        run_scenario(scenario_config("fig4c_phase_contrast"));
    const double min_deg = metric(fig4c, "min_phase_deg");
    const double min_power = metric(fig4c, "normalized_min_power");
    const double r2 = metric(fig4c, "r_squared");
    const bool ok = std::abs(min_deg - 45.0) <= 3.0 && min_power <= 0.12 &&
                    r2 >= 0.99;
    report(8, ok, "two-tone contrast minimum (135 deg offset)",
           fmt("min %.2f deg, power %.4f, R^2 %.4f "
               "(need 45 +/- 3, <= 0.12, >= 0.99)",
               min_deg, min_power, r2));
  }

  const ScenarioResult fig4 = run_scenario(scenario_config("fig4_rabi_suite"));
  {
    const double t_noisy = metric(fig4, "t_noisy_ns");
    const double t_prot = metric(fig4, "t_protected_ns");
    const double t_inphase = metric(fig4, "t_inphase_ns");
    const bool calibrated = std::abs(t_noisy - 249.0) <= 0.05 * 249.0;
    const bool protected_ok = t_prot >= 600.0 && t_prot <= 810.0;
    const bool inphase_ok =
        t_inphase < 249.0 && std::abs(t_inphase - 162.0) <= 0.40 * 162.0;
    const bool ordering = t_inphase < t_noisy && t_noisy < t_prot;
    report(9, calibrated && protected_ok && inphase_ok && ordering,
           "Rabi decay suite ordering and recovery",
           fmt("T = %.1f / %.1f / %.1f ns in-phase/noisy/protected "
               "(need <249 and 162 +/- 40%%, 249 +/- 5%%, in [600,810], "
               "strictly ordered)",
               t_inphase, t_noisy, t_prot));
  }

  {
    const double detuning = equivalent_detuning(7e6, 0.03);
    report(10, std::abs(detuning - 40e6) <= 2e6,
           "equivalent detuning at 3% suppression",
           fmt("%.3f MHz (need 40 +/- 2)", detuning / 1e6));
  }

  {
    const ScenarioResult curve =
        run_scenario(scenario_config("coherence_penalty_curve"));
    const double floor = metric(curve, "penalty_at_minus60");
    const double floor_err = metric(curve, "penalty_at_minus60_err");
    const double residual = metric(curve, "penalty_at_imbalance");
    const bool ok = floor <= 0.01 && floor_err < 0.005 &&
                    std::abs(residual - 0.02) <= 0.01;
    report(11, ok, "coherence penalty floor and -20 dB residual",
           fmt("%.4f%% +/- %.4f%% at -60 dB, %.2f%% at residual "
               "(need <= 1%%, err < 0.5 pp, 2 +/- 1%%)",
               100.0 * floor, 100.0 * floor_err, 100.0 * residual));
  }

  {
    // Oracle agreement, part 1: the SU(2) propagator against the closed-form
    // resonant multi-tone population, over randomized drive sets.
    RandomStream rng = RandomStream::for_index(987654321ULL, 0, 0xACCE9ULL);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<DriveTone> tones;
      const int n_tones = 1 + static_cast<int>(rng.uniform() * 3.0);
      for (int k = 0; k < n_tones; ++k) {
        tones.push_back(DriveTone{0.5e6 + 9.5e6 * rng.uniform(),
                                  2.0 * std::numbers::pi * rng.uniform(),
                                  0.0});
      }
      const double tau = 1e-6 * rng.uniform();
      const double closed = shot_population(tau, tones);
      const auto probs = bloch_evolve({ToneSegment{tau, tones}});
      worst = std::max(worst, std::abs(probs[1] - closed));
    }

    // Part 2: segment-summed Biot-Savart against the textbook on-axis field
    // of a circular loop at 1024 segments.
    const LoopSpec loop =
        LoopSpec::circle_um(15.0, Point3{0, 0, 0}, Phasor(1.0, 0.0), +1, 1024);
    const std::vector<DiscretizedLoop> discretized = discretize_all({loop});
    const double radius = 7.5e-6;
    double worst_rel = 0.0;
    for (double z_um : {1.0, 5.0, 20.0, 100.0}) {
      const double z = z_um * 1e-6;
      const FieldPhasor field =
          field_at(discretized, Point3::from_um(0.0, 0.0, z_um));
      const double exact = 2.0e-7 * std::numbers::pi * radius * radius /
                           std::pow(radius * radius + z * z, 1.5);
      worst_rel =
          std::max(worst_rel, std::abs(field.bz.real() - exact) / exact);
    }
    const bool ok = worst <= 1e-9 && worst_rel <= 1e-4;
    report(12, ok, "closed-form oracles (Bloch, Biot-Savart)",
           fmt("max |dp| %.2e (need <= 1e-9), max rel dB %.2e (need <= 1e-4)",
               worst, worst_rel));
  }

  {
    const ScenarioResult again = run_scenario(scenario_config("fig4_rabi_suite"));
    bool identical = again.tables.size() == fig4.tables.size();
    for (std::size_t i = 0; identical && i < fig4.tables.size(); ++i) {
      identical = to_csv(fig4.tables[i]) == to_csv(again.tables[i]);
    }
    identical = identical && fig4.summary.dump() == again.summary.dump();
    report(13, identical, "seeded rerun reproduces byte-identical output",
           identical ? "all tables and summaries match" : "outputs differ");
  }

  std::printf("------------------------------------\n");
  if (g_failures == 0) {
    std::printf("acceptance: all 13 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
