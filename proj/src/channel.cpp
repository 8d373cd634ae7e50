#include "beaconsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beaconsim {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

ChannelModel ChannelModel::from_params(const SimParams& p) {
  ChannelModel m;
  m.kind = p.nakagami_m ? Kind::nakagami : Kind::free_space;
  m.path_loss_exp = p.path_loss_exp;
  m.nakagami_m = p.nakagami_m.value_or(1.0);
  const double lambda = kSpeedOfLight / p.freq_hz;
  m.reference_loss_db = 20.0 * std::log10(4.0 * M_PI / lambda);
  return m;
}

double received_power_dbm(const ChannelModel& model, double tx_power_mw,
                          double distance_m) {
  if (distance_m <= 0.0)
    throw std::invalid_argument("received_power: distance must be positive");
  const double tx_dbm = 10.0 * std::log10(tx_power_mw);
  const double d = std::max(distance_m, 1.0);  // reference applies beyond 1 m
  return tx_dbm - model.reference_loss_db - 10.0 * model.path_loss_exp * std::log10(d);
}

double max_range_m(const ChannelModel& model, double tx_power_mw,
                   double sensitivity_dbm) {
  const double tx_dbm = 10.0 * std::log10(tx_power_mw);
  const double exp10 =
      (tx_dbm - model.reference_loss_db - sensitivity_dbm) / (10.0 * model.path_loss_exp);
  return std::pow(10.0, exp10);
}

// Q(a, x) = Gamma(a, x) / Gamma(a). Series for x < a+1, continued fraction
// otherwise (Lentz). Plenty for the m >= 0.5 fading shapes used here.
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P.
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

double reception_probability(const ChannelModel& model, double tx_power_mw,
                             double distance_m, double sensitivity_dbm) {
  const double mean_dbm = received_power_dbm(model, tx_power_mw, distance_m);
  if (model.kind == ChannelModel::Kind::free_space)
    return mean_dbm >= sensitivity_dbm ? 1.0 : 0.0;
  // Gamma(m) fading around the mean power: P(recv) = Q(m, m * S / Pmean).
  const double x = model.nakagami_m * std::pow(10.0, (sensitivity_dbm - mean_dbm) / 10.0);
  return gamma_q(model.nakagami_m, x);
}

NeighborGraph build_neighbor_graph(std::span<const Vec2> positions,
                                   const ChannelModel& model, const SimParams& p) {
  const int n = static_cast<int>(positions.size());
  NeighborGraph g;
  g.neighbor_sets.assign(n, {});
  g.link_loss.assign(n, {});
  const bool fading = model.kind == ChannelModel::Kind::nakagami;
  const double range = max_range_m(model, p.tx_power_mw, p.sensitivity_dbm);
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      if (u == v) {
        g.neighbor_sets[v].push_back(v);
        g.link_loss[v].push_back(0.0);
        continue;
      }
      const double d = distance(positions[u], positions[v]);
      if (!fading) {
        if (d <= range) {
          g.neighbor_sets[v].push_back(u);
          g.link_loss[v].push_back(0.0);
        }
      } else {
        const double pr = d <= 0.0 ? 1.0
                                   : reception_probability(model, p.tx_power_mw, d,
                                                           p.sensitivity_dbm);
        if (pr > p.p_min_link) {
          g.neighbor_sets[v].push_back(u);
          g.link_loss[v].push_back(1.0 - pr);
        }
      }
    }
  }
  return g;
}

DeliveryReport deliver_beacons(const NeighborGraph& graph,
                               std::span<const VehicleState> states, Rng& rng,
                               const SimParams& p) {
  DeliveryReport rep;
  const int n = static_cast<int>(graph.size());
  std::vector<int> beacons(n);
  for (int u = 0; u < n; ++u)
    beacons[u] = std::max(1, static_cast<int>(std::lround(states[u].rate_r *
                                                          p.sample_period_Ts)));
  for (int v = 0; v < n; ++v) {
    const auto& nbrs = graph.neighbor_sets[v];
    const auto& loss = graph.link_loss[v];
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const int u = nbrs[i];
      if (u == v) continue;
      DeliveryReport::Link link;
      link.tx = u;
      link.rx = v;
      link.sent = beacons[u];
      if (loss[i] <= 0.0)
        link.received = link.sent;  // no RNG draw on lossless links
      else if (loss[i] >= 1.0)
        link.received = 0;
      else
        link.received = rng.binomial(link.sent, 1.0 - loss[i]);
      rep.links.push_back(link);
    }
  }
  return rep;
}

std::vector<double> offered_cbt(const NeighborGraph& graph,
                                std::span<const double> rates, const SimParams& p) {
  const double airtime = p.airtime_s();
  std::vector<double> cbt(graph.size(), 0.0);
  for (std::size_t v = 0; v < graph.size(); ++v) {
    double sum = 0.0;
    for (int u : graph.neighbor_sets[v]) sum += rates[u];
    cbt[v] = airtime * sum;
  }
  return cbt;
}

}  // namespace beaconsim
