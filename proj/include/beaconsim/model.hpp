#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace beaconsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Simulation constants. Defaults reproduce the common parameter set used by
// all scenarios; individual runs override fields through the JSON config.
struct SimParams {
  double data_rate_bps = 6e6;
  double beacon_payload_bytes = 500;
  double header_bytes = 76;
  double mbl_fraction = 0.6;           // fraction of data rate usable by beacons
  double alpha = 1.0;                  // fairness exponent
  double weights_default = 1.0;
  double beta = 2.8e-5;                // price step
  double price_init = 1.252e-3;
  double anti_flap_f = 0.22;           // dead-band fraction of capacity
  double sample_period_Ts = 0.2;       // s
  double neighbor_expiry = 1.0;        // s
  double r_min = 1.0;                  // beacons/s
  double r_max = 10.0;                 // beacons/s
  double tx_power_mw = 251.0;
  double sensitivity_dbm = -92.0;
  double freq_hz = 5.9e9;
  double path_loss_exp = 2.5;
  std::optional<double> nakagami_m;    // absent -> deterministic free space
  double limeric_alpha = 0.1;
  double limeric_beta = 1.0 / 150.0;
  double p_min_link = 0.05;            // nakagami neighbor membership threshold
  // Price gradient source: piggybacked rate reports (default) or the channel
  // occupancy actually measured from received beacons.
  bool gradient_from_cbt = false;

  // Channel capacity in beacons/s: the beaconing-load ceiling divided by the
  // airtime of one beacon.
  double capacity_C() const {
    return mbl_fraction * data_rate_bps / (8.0 * (beacon_payload_bytes + header_bytes));
  }

  // Seconds of channel time consumed by one beacon.
  double airtime_s() const {
    return 8.0 * (beacon_payload_bytes + header_bytes) / data_rate_bps;
  }
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Checks every invariant and reports all violations, not just the first.
ValidationReport validate_params(const SimParams& p);

void to_json(nlohmann::json& j, const SimParams& p);
void from_json(const nlohmann::json& j, SimParams& p);

// What a vehicle remembers about one neighbor, refreshed by each received
// beacon. measured_cbt / max_two_hop_cbt are only meaningful for the
// LIMERIC+PULSAR payload family.
struct NeighborEntry {
  double last_rate = 0.0;
  double last_price = 0.0;
  double measured_cbt = 0.0;
  double max_two_hop_cbt = 0.0;
  double last_heard_time = 0.0;
};

struct VehicleState {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  double rate_r = 0.0;
  double price_pi = 0.0;
  double phase_offset = 0.0;  // update instant within the sample period [0, Ts)
  // Per-vehicle overrides; default to the global values.
  double weight = 1.0;
  double r_min = 1.0;
  double r_max = 10.0;
  // Own channel measurements broadcast in the LIMERIC+PULSAR payload.
  double measured_cbt = 0.0;
  double max_two_hop_cbt = 0.0;
  // Beacons actually received during the last sample period.
  int rx_count_last_period = 0;
  // Ordered map so that sums over neighbors are evaluated in a fixed order.
  std::map<int, NeighborEntry> neighbor_table;

  void drop_stale_neighbors(double now, double expiry) {
    for (auto it = neighbor_table.begin(); it != neighbor_table.end();) {
      if (now - it->second.last_heard_time > expiry)
        it = neighbor_table.erase(it);
      else
        ++it;
    }
  }
};

struct RateAllocation {
  std::vector<double> rates;  // indexed by vehicle id
};

// Per-vehicle neighbor sets (self-inclusive) plus the loss probability of
// each directed link. Vehicles are indexed 0..n-1; neighbor lists are sorted.
struct NeighborGraph {
  std::vector<std::vector<int>> neighbor_sets;
  std::vector<std::vector<double>> link_loss;  // parallel to neighbor_sets[v]:
                                               // loss of link (u -> v), self 0

  std::size_t size() const { return neighbor_sets.size(); }

  bool contains(int v, int u) const {
    const auto& s = neighbor_sets[v];
    return std::binary_search(s.begin(), s.end(), u);
  }
};

}  // namespace beaconsim
