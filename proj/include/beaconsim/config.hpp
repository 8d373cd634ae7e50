#pragma once

#include <string>
#include <vector>

#include "beaconsim/engine.hpp"
#include "beaconsim/model.hpp"

namespace beaconsim {

// One JSON document drives a run: {"params": {...}, "scenario": {...},
// "run": {...}}. Overrides use dotted paths into that document
// ("params.alpha=2", "run.controller=limeric", "scenario.density=0.2") and
// must name keys that already exist.
struct Config {
  SimParams params;
  RunConfig run;

  nlohmann::json to_document() const;
  static Config from_document(const nlohmann::json& doc);
};

Config load_config(const std::string& path,
                   const std::vector<std::string>& overrides);

Config config_from_json_text(const std::string& text,
                             const std::vector<std::string>& overrides);

// Applies "a.b.c=value" onto a JSON document, parsing value as JSON when
// possible and as a string otherwise. Throws on unknown keys.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// steps.csv body for a run: step,time,vehicle,x,y,rate,price,cbt,rx_count.
std::string steps_csv(const RunResult& result);

// oracle.csv body: vehicle,x,rate,price.
std::string oracle_csv(std::span<const double> xs, std::span<const double> rates,
                       std::span<const double> prices);

}  // namespace beaconsim
