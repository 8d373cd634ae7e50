#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beaconsim/model.hpp"
#include "beaconsim/rng.hpp"

namespace beaconsim {

struct ScenarioSpec {
  enum class Kind {
    all_in_range,
    multihop_line,
    jam_clusters,
    single_approach,
    bridge,
    queue,
    custom
  };

  Kind kind = Kind::all_in_range;
  std::uint64_t rng_seed = 1;

  // Line scenarios.
  double road_length_m = 1000.0;
  double density = 0.1;               // vehicles/m for Poisson placement
  std::optional<int> count;           // exact-count placement instead of a draw
  double speed_mps = 32.0;

  // jam_clusters geometry.
  int jam_size = 150;
  int cluster_a_size = 20;
  int cluster_b_size = 3;
  double cluster_spacing_m = 5.0;
  double ab_separation_m = 900.0;
  double b_jam_overlap_m = 62.5;      // how far cluster B's mid reaches into the jam

  // single_approach.
  double approach_start_m = 1320.0;   // behind the nearest cluster car

  // bridge.
  double bridge_static_len_m = 1500.0;
  double bridge_static_density = 200.0 / 1500.0;
  double bridge_moving_len_m = 600.0;
  int bridge_moving_count = 100;
  double bridge_start_m = 1500.0;     // moving cluster head to crossing

  // queue.
  int queue_initial = 76;
  double queue_spacing_m = 2.0;
  double queue_position_jitter_m = 0.5;
  int queue_batch_size = 3;
  double queue_batch_interval_s = 5.0;
  int queue_batches = 8;
  double queue_spawn_distance_m = 700.0;
  double queue_stop_gap_m = 2.0;

  // custom.
  std::vector<Vec2> custom_positions;
  std::vector<Vec2> custom_velocities;
};

const char* to_string(ScenarioSpec::Kind k);
ScenarioSpec::Kind scenario_kind_from_string(const std::string& s);

void to_json(nlohmann::json& j, const ScenarioSpec& s);
void from_json(const nlohmann::json& j, ScenarioSpec& s);

struct MobilityEvent {
  double time = 0.0;
  std::vector<Vec2> spawn_positions;
  std::vector<Vec2> spawn_velocities;
};

struct Scenario {
  std::vector<VehicleState> initial;
  std::vector<MobilityEvent> events;  // times non-decreasing
  bool queue_stop_rule = false;
  double stop_gap_m = 2.0;
};

// Equally spaced line: x = 0, d, 2d, ..., (n-1)d.
std::vector<double> place_deterministic(int n, double spacing_m);

// Homogeneous Poisson process on [0, length]: exponential gaps of rate rho.
std::vector<double> place_poisson(double length_m, double rho, Rng& rng);

// Exactly n points, uniform on [0, length], sorted (a Poisson process
// conditioned on its count).
std::vector<double> place_uniform_count(int n, double length_m, Rng& rng);

Scenario build_scenario(const ScenarioSpec& spec, const SimParams& p);

// Advances positions by velocity*dt, applies spawn events with time in
// (t, t+dt], and parks queue-bound vehicles behind the current tail.
void step_mobility(std::vector<VehicleState>& states, const Scenario& scenario,
                   std::size_t& next_event, double t, double dt,
                   const SimParams& p);

}  // namespace beaconsim
