#pragma once

#include <vector>

#include "beaconsim/channel.hpp"
#include "beaconsim/controllers.hpp"
#include "beaconsim/model.hpp"
#include "beaconsim/scenario.hpp"

namespace beaconsim {

struct RunConfig {
  ScenarioSpec scenario;
  ControllerKind controller = ControllerKind::fabric;
  bool synchronous = true;
  int steps = 100;
  std::uint64_t seed = 1;
  int replications = 1;
  // When non-empty, accumulate effective-delivery counters at these distances.
  std::vector<double> delivery_distances;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

struct StepTraceRow {
  int vehicle = 0;
  double x = 0.0, y = 0.0;
  double rate = 0.0;
  double price = 0.0;
  double offered_cbt = 0.0;
  int rx_count = 0;
};

struct StepTrace {
  int step = 0;
  double time = 0.0;
  std::vector<StepTraceRow> rows;  // one per alive vehicle, id order
};

// Effective-delivery counters accumulated while the simulation runs:
// per transmitter and per distance threshold, copies receivable above the
// sensitivity and copies actually received.
struct DeliveryCounters {
  std::vector<double> distances;
  std::vector<std::vector<long long>> receivable;  // [vehicle][distance]
  std::vector<std::vector<long long>> received;

  void ensure_size(std::size_t n) {
    receivable.resize(n, std::vector<long long>(distances.size(), 0));
    received.resize(n, std::vector<long long>(distances.size(), 0));
  }
};

struct RunResult {
  std::vector<StepTrace> steps;
  DeliveryCounters deliveries;
  int initial_vehicle_count = 0;  // before any spawn event
  int final_vehicle_count = 0;
};

RunResult run(const RunConfig& cfg, const SimParams& p);

// Replication 0 reproduces run(cfg) exactly; further replications derive
// fresh placement and channel seeds from cfg.seed.
std::vector<RunResult> replicate(const RunConfig& cfg, const SimParams& p, int n);

}  // namespace beaconsim
