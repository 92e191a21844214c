#include <doctest.h>

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "duoloop/config.hpp"
#include "duoloop/csv.hpp"
#include "duoloop/errors.hpp"
#include "duoloop/experiments.hpp"

using namespace duoloop;
namespace fs = std::filesystem;

namespace {

Json scenario_config(const std::string& name) {
  return Json{{"scenario", {{"name", name}}}};
}

double metric(const ScenarioResult& result, const std::string& key) {
  const Json& metrics = result.summary.at("metrics");
  REQUIRE_MESSAGE(metrics.contains(key), "missing metric ", key);
  const Json& value = metrics.at(key);
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return value.get<double>();
}

const Table& table_named(const ScenarioResult& result,
                         const std::string& name) {
  for (const Table& t : result.tables) {
    if (t.name == name) return t;
  }
  REQUIRE_MESSAGE(false, "missing table ", name);
  return result.tables.front();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("scenario registry") {
  const auto& names = scenario_names();
  CHECK(names.size() == 8);
  CHECK(std::find(names.begin(), names.end(), "fig1d_line_scan") !=
        names.end());
  CHECK(std::find(names.begin(), names.end(), "coherence_penalty_curve") !=
        names.end());

  CHECK_THROWS_WITH_AS(run_scenario(scenario_config("made_up")),
                       doctest::Contains("fig1d_line_scan"), ConfigError);
  CHECK_THROWS_AS(run_scenario(Json{{"scenario", Json::object()}}),
                  ConfigError);
  CHECK_THROWS_AS(run_scenario(Json{{"bogus", 1}}), ConfigError);
}

TEST_CASE("scenario errors carry the failing stage") {
  Json config = scenario_config("fig4_rabi_suite");
  config["scenario"]["target_t_ns"] = 2000.0;  // above t_base: infeasible
  try {
    run_scenario(config);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("fig4_rabi_suite") != std::string::npos);
    CHECK(what.find("calibrate_noise") != std::string::npos);
  }
}

TEST_CASE("results carry provenance and honour seed overrides") {
  const Json config = scenario_config("detuning_equivalence");
  const ScenarioResult result = run_scenario(config);
  CHECK(result.scenario == "detuning_equivalence");
  CHECK(result.seed == 1);
  CHECK(result.version == "0.1.0");
  CHECK(result.config_hash.size() == 8);
  CHECK(result.summary.at("scenario") == "detuning_equivalence");
  CHECK(result.summary.at("seed") == 1);
  CHECK(result.summary.at("tables").is_array());

  const ScenarioResult seeded = run_scenario(config, 9);
  CHECK(seeded.seed == 9);
  CHECK(seeded.config_hash != result.config_hash);
}

TEST_CASE("fig1d_line_scan metrics") {
  const ScenarioResult result = run_scenario(scenario_config("fig1d_line_scan"));
  CHECK(metric(result, "ratio") == doctest::Approx(0.140897206).epsilon(1e-5));
  CHECK(metric(result, "single_exponent") == doctest::Approx(-6.0).epsilon(0.17));
  CHECK(metric(result, "dual_exponent") == doctest::Approx(-15.0).epsilon(0.14));
  CHECK(metric(result, "centre_power_ratio") ==
        doctest::Approx(6.138).epsilon(1e-3));
  CHECK(metric(result, "local_power_factor") ==
        doctest::Approx(0.8895).epsilon(1e-3));
  CHECK(metric(result, "single_power_db_at_1nn") ==
        doctest::Approx(-59.82).epsilon(1e-3));
  CHECK(metric(result, "add_atten_2nn_db") < -15.0);
  CHECK(metric(result, "add_atten_3nn_db") < -15.0);
  CHECK(metric(result, "residual_bz_db") <= -120.0);

  const Table& single = table_named(result, "single");
  const Table& dual = table_named(result, "dual");
  CHECK(single.columns.size() == 12);
  CHECK(dual.columns.size() == 12);
  CHECK(single.rows.size() == dual.rows.size());
  CHECK(single.rows.front()[0] == doctest::Approx(2.0));
  CHECK(single.rows.back()[0] == doctest::Approx(200.0));
}

TEST_CASE("fig1g_ratio_sweep tracks the null monotonically") {
  Json config = scenario_config("fig1g_ratio_sweep");
  config["scenario"]["factors"] = Json::array({0.8, 0.9, 1.0, 1.05});
  const ScenarioResult result = run_scenario(config);
  CHECK(metric(result, "monotonic") == 1.0);
  CHECK(metric(result, "all_interior") == 1.0);
  const Table& nulls = table_named(result, "nulls");
  CHECK(nulls.columns ==
        std::vector<std::string>{"ratio_factor", "null_x_um", "null_power_db"});
  REQUIRE(nulls.rows.size() == 4);
  CHECK(nulls.rows[2][1] == doctest::Approx(60.0).epsilon(1e-3));
}

TEST_CASE("fig1h_phase_sweep pins the remote minimum at pi") {
  const ScenarioResult result = run_scenario(scenario_config("fig1h_phase_sweep"));
  CHECK(metric(result, "remote_min_phase_rad") ==
        doctest::Approx(3.14159265).epsilon(1e-4));
  CHECK(metric(result, "fit_residual_rel") < 1e-9);
  CHECK(metric(result, "local_modulation_depth") ==
        doctest::Approx(0.20366).epsilon(1e-3));
  CHECK(result.summary.at("metrics").at("model") == "quasistatic-analytic");
}

TEST_CASE("fig3k_power_scaling slope is one half") {
  const ScenarioResult result =
      run_scenario(scenario_config("fig3k_power_scaling"));
  CHECK(metric(result, "slope") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(metric(result, "f_loop_at_50mw_hz") ==
        doctest::Approx(1.0e7).epsilon(1e-3));
  CHECK(metric(result, "equal_f_power_ratio") ==
        doctest::Approx(200.0).epsilon(1e-6));
}

TEST_CASE("fig4_rabi_suite orders the decay times") {
  const ScenarioResult result = run_scenario(scenario_config("fig4_rabi_suite"));
  const double t_clean = metric(result, "t_clean_ns");
  const double t_noisy = metric(result, "t_noisy_ns");
  const double t_protected = metric(result, "t_protected_ns");
  const double t_inphase = metric(result, "t_inphase_ns");
  CHECK(metric(result, "ordering_ok") == 1.0);
  CHECK(t_inphase < t_noisy);
  CHECK(t_noisy < t_protected);
  CHECK(t_protected < t_clean * 1.07);
  CHECK(t_noisy == doctest::Approx(249.0).epsilon(0.05));
  CHECK(result.tables.size() == 4);
  for (const Table& t : result.tables) {
    CHECK(t.columns ==
          std::vector<std::string>{"tau_ns", "population", "fit_value"});
  }
}

TEST_CASE("detuning_equivalence closed form") {
  const ScenarioResult result =
      run_scenario(scenario_config("detuning_equivalence"));
  CHECK(metric(result, "detuning_at_0p03_hz") ==
        doctest::Approx(39803684.92).epsilon(1e-6));
  const Table& t = result.tables.front();
  CHECK(t.columns == std::vector<std::string>{"suppression", "detuning_hz"});
  REQUIRE(t.rows.size() >= 9);
  // Detuning falls monotonically as more noise power is let through.
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i][1] < t.rows[i - 1][1]);
  }
}

TEST_CASE("experiments rerun deterministically") {
  const Json config = scenario_config("fig4_rabi_suite");
  const ScenarioResult a = run_scenario(config);
  const ScenarioResult b = run_scenario(config);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    CHECK(to_csv(a.tables[i]) == to_csv(b.tables[i]));
  }
  CHECK(a.summary.dump() == b.summary.dump());
}

TEST_CASE("write_result lays out the documented files atomically") {
  const fs::path dir = fs::temp_directory_path() / "duoloop_write_result";
  fs::remove_all(dir);

  SUBCASE("multi-table scenarios suffix the table name") {
    const ScenarioResult result = run_scenario(scenario_config("fig4_rabi_suite"));
    const auto paths = write_result(result, dir);
    REQUIRE(paths.size() == 5);  // four traces + summary
    for (const fs::path& p : paths) CHECK(fs::exists(p));
    const std::string stem =
        result.scenario + "__" + result.config_hash;
    CHECK(fs::exists(dir / (stem + "__clean.csv")));
    CHECK(fs::exists(dir / (stem + "__inphase.csv")));
    CHECK(fs::exists(dir / (stem + ".summary.json")));
    // Atomic writes leave no temporaries.
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      CHECK(name.find(".tmp") == std::string::npos);
    }
  }

  SUBCASE("single-table scenarios use the bare stem") {
    const ScenarioResult result =
        run_scenario(scenario_config("detuning_equivalence"));
    const auto paths = write_result(result, dir);
    REQUIRE(paths.size() == 2);
    const std::string stem = result.scenario + "__" + result.config_hash;
    CHECK(fs::exists(dir / (stem + ".csv")));
    CHECK(fs::exists(dir / (stem + ".summary.json")));
    // The summary parses and echoes the tables it sits beside.
    const Json summary =
        parse_config_text(slurp(dir / (stem + ".summary.json")), "summary");
    CHECK(summary.at("scenario") == "detuning_equivalence");
    CHECK(summary.at("config_hash") == result.config_hash);
  }

  fs::remove_all(dir);
}

TEST_CASE("compare_to_reference checks metrics with tolerances") {
  const ScenarioResult result =
      run_scenario(scenario_config("detuning_equivalence"));

  Json reference{{"scenario", "detuning_equivalence"},
                 {"metrics",
                  {{"detuning_at_0p03_hz",
                    {{"value", 39.8e6}, {"tol_rel", 0.02}}},
                   {"noise_rabi_hz", {{"value", 7e6}, {"tol_abs", 1.0}}}}}};
  const ComparisonReport report = compare_to_reference(result, reference);
  CHECK(report.pass());
  CHECK(report.checks.size() == 2);
  CHECK(report.to_string().find("PASS") != std::string::npos);

  SUBCASE("failing tolerances flip the verdict") {
    reference["metrics"]["noise_rabi_hz"]["value"] = 1.0;
    const ComparisonReport bad = compare_to_reference(result, reference);
    CHECK_FALSE(bad.pass());
    CHECK(bad.to_string().find("FAIL") != std::string::npos);
  }

  SUBCASE("schema problems raise ComparisonError") {
    Json wrong = reference;
    wrong["scenario"] = "fig1d_line_scan";
    CHECK_THROWS_AS(compare_to_reference(result, wrong), ComparisonError);

    Json missing = reference;
    missing["metrics"]["no_such_metric"] = Json{{"value", 1.0},
                                                {"tol_abs", 1.0}};
    CHECK_THROWS_AS(compare_to_reference(result, missing), ComparisonError);

    Json no_tol = reference;
    no_tol["metrics"]["noise_rabi_hz"] = Json{{"value", 7e6}};
    CHECK_THROWS_AS(compare_to_reference(result, no_tol), ComparisonError);
  }
}
