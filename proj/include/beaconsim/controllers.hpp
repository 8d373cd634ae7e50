#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "beaconsim/model.hpp"

namespace beaconsim {

enum class ControllerKind { dual_gradient, fabric, limeric, limeric_pulsar, fixed };

const char* to_string(ControllerKind k);
ControllerKind controller_from_string(const std::string& s);

// What a vehicle piggybacks on its beacons. Exactly one feedback family is
// populated: price for the dual-decomposition controllers, the CBT pair for
// LIMERIC+PULSAR. Two extra 32-bit fields either way.
struct BeaconPayload {
  std::uint32_t sender = 0;
  float rate = 0.0f;
  float price_or_cbt = 0.0f;  // price | measured CBT
  float aux = 0.0f;           // unused | max two-hop CBT

  std::array<std::uint8_t, 16> to_wire() const;
  static BeaconPayload from_wire(const std::array<std::uint8_t, 16>& bytes);
  std::string to_csv_row() const;
};

BeaconPayload make_payload(ControllerKind kind, const VehicleState& v);

// Immutable per-step snapshot a controller acts on: own state plus the live
// neighbor table.
struct LocalView {
  const VehicleState* self = nullptr;
  double now = 0.0;
};

// Closed-form rate for a given sum of neighborhood prices (weight w):
// clamp((w / sum_pi)^(1/alpha)); sum_pi <= 0 yields r_max.
double rate_from_prices(double sum_pi, double alpha, double r_min, double r_max,
                        double w = 1.0);

// max(0, pi - beta * (C - sum_rates))
double dual_gradient_price_update(double pi, double beta, double C, double sum_rates);

// Sign variant with the anti-flapping dead band: the gradient is treated as
// zero when |C - sum_rates| < f * C.
double fabric_price_update(double pi, double beta, double C, double sum_rates,
                           double f);

// clamp((1 - alpha_L) r + beta_L (goal_total - measured_total))
double limeric_rate_update(double r, double alpha_L, double beta_L,
                           double goal_total, double measured_total, double r_min,
                           double r_max);

// Worst channel occupancy within two hops: own measurement, neighbors'
// measurements and neighbors' advertised one-hop maxima.
double pulsar_feedback(const LocalView& view);

struct ControllerResult {
  double new_rate = 0.0;
  double new_price = 0.0;
  double measured_cbt = 0.0;
  double max_two_hop_cbt = 0.0;
};

// One algorithm step for one vehicle from its local view only.
ControllerResult controller_step(ControllerKind kind, const LocalView& view,
                                 const SimParams& p);

}  // namespace beaconsim
