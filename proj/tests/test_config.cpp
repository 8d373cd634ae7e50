#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "beaconsim/config.hpp"
#include "beaconsim/metrics.hpp"

using namespace beaconsim;

namespace {

const char* kDoc = R"({
  "params": {"alpha": 1.0, "beta": 2.8e-5, "tx_power_mw": 1000, "path_loss_exp": 2.0},
  "scenario": {"kind": "all_in_range", "road_length_m": 1000, "count": 20, "rng_seed": 5},
  "run": {"controller": "fabric", "synchronous": true, "steps": 10, "seed": 1}
})";

}  // namespace

TEST_CASE("config document loads into params, scenario and run") {
  const Config cfg = config_from_json_text(kDoc, {});
  CHECK(cfg.params.tx_power_mw == 1000);
  CHECK(cfg.run.scenario.kind == ScenarioSpec::Kind::all_in_range);
  CHECK(cfg.run.scenario.count == 20);
  CHECK(cfg.run.controller == ControllerKind::fabric);
  CHECK(cfg.run.steps == 10);
}

TEST_CASE("dotted overrides rewrite existing keys") {
  const Config cfg = config_from_json_text(
      kDoc, {"params.alpha=2", "run.controller=limeric", "scenario.count=40"});
  CHECK(cfg.params.alpha == 2.0);
  CHECK(cfg.run.controller == ControllerKind::limeric);
  CHECK(cfg.run.scenario.count == 40);
}

TEST_CASE("overrides naming unknown keys are rejected") {
  CHECK_THROWS_AS(config_from_json_text(kDoc, {"params.nonsense=1"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text(kDoc, {"nope.alpha=1"}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text(kDoc, {"params.alpha"}), std::invalid_argument);
}

TEST_CASE("config round-trips through its document form") {
  const Config cfg = config_from_json_text(kDoc, {"params.alpha=6"});
  const auto doc = cfg.to_document();
  const Config back = Config::from_document(doc);
  CHECK(back.params.alpha == 6.0);
  CHECK(back.run.scenario.count == cfg.run.scenario.count);
  CHECK(back.to_document() == doc);
}

TEST_CASE("a manifest with resolved_config reproduces the run") {
  const Config cfg = config_from_json_text(kDoc, {});
  nlohmann::json manifest;
  manifest["artifact_version"] = "x";
  manifest["resolved_config"] = cfg.to_document();
  const Config again = config_from_json_text(manifest.dump(), {});
  CHECK(again.to_document() == cfg.to_document());
}

TEST_CASE("steps.csv has the fixed header and is reproducible") {
  const Config cfg = config_from_json_text(kDoc, {});
  const auto r1 = run(cfg.run, cfg.params);
  const auto r2 = run(cfg.run, cfg.params);
  const std::string c1 = steps_csv(r1), c2 = steps_csv(r2);
  CHECK(c1 == c2);  // byte-identical rerun
  CHECK(c1.rfind("step,time,vehicle,x,y,rate,price,cbt,rx_count\n", 0) == 0);
  // One line per vehicle per step plus the header.
  const auto lines = std::count(c1.begin(), c1.end(), '\n');
  CHECK(lines == 1 + 10 * 20);
}

TEST_CASE("oracle.csv layout") {
  std::vector<double> xs{0.0, 10.0};
  std::vector<double> rates{5.0, 6.0};
  std::vector<double> prices{0.0, 1e-3};
  const std::string csv = oracle_csv(xs, rates, prices);
  CHECK(csv.rfind("vehicle,x,rate,price\n", 0) == 0);
  CHECK(csv.find("0,0,5,0") != std::string::npos);
  CHECK(csv.find("1,10,6,0.001") != std::string::npos);
}
