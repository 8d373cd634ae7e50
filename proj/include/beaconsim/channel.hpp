#pragma once

#include <span>
#include <vector>

#include "beaconsim/model.hpp"
#include "beaconsim/rng.hpp"

namespace beaconsim {

// Simplified radio layer. Mean received power follows a 1 m Friis reference
// with a configurable path-loss exponent beyond it; the nakagami variant adds
// Gamma-distributed fading on top of the mean and turns links probabilistic.
struct ChannelModel {
  enum class Kind { free_space, nakagami };

  Kind kind = Kind::free_space;
  double path_loss_exp = 2.0;
  double nakagami_m = 1.0;       // used when kind == nakagami
  double reference_loss_db = 0;  // path loss at 1 m, from the carrier frequency

  static ChannelModel from_params(const SimParams& p);
};

double received_power_dbm(const ChannelModel& model, double tx_power_mw,
                          double distance_m);

// Distance at which the mean received power equals the sensitivity.
double max_range_m(const ChannelModel& model, double tx_power_mw,
                   double sensitivity_dbm);

// Probability that a single beacon is decodable at the given distance.
// free_space: hard threshold on mean power. nakagami: Q(m, m*S/Pmean) with
// powers in linear units.
double reception_probability(const ChannelModel& model, double tx_power_mw,
                             double distance_m, double sensitivity_dbm);

// Regularized upper incomplete gamma Q(a, x); exposed for tests.
double gamma_q(double a, double x);

NeighborGraph build_neighbor_graph(std::span<const Vec2> positions,
                                   const ChannelModel& model, const SimParams& p);

// One record per directed in-range link for one sample period.
struct DeliveryReport {
  struct Link {
    int tx = 0;
    int rx = 0;
    int sent = 0;
    int received = 0;
    bool price_heard() const { return received >= 1; }
  };
  std::vector<Link> links;
};

// Every vehicle sends max(1, round(rate * Ts)) beacons; each beacon on each
// in-range link is received independently with probability 1 - loss.
DeliveryReport deliver_beacons(const NeighborGraph& graph,
                               std::span<const VehicleState> states, Rng& rng,
                               const SimParams& p);

// Ground-truth offered channel load per vehicle (loss-free):
// airtime * sum of rates over the vehicle's self-inclusive neighbor set.
std::vector<double> offered_cbt(const NeighborGraph& graph,
                                std::span<const double> rates, const SimParams& p);

}  // namespace beaconsim
