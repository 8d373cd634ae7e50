#include "beaconsim/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace beaconsim {

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::dual_gradient: return "dual_gradient";
    case ControllerKind::fabric: return "fabric";
    case ControllerKind::limeric: return "limeric";
    case ControllerKind::limeric_pulsar: return "limeric_pulsar";
    case ControllerKind::fixed: return "fixed";
  }
  return "?";
}

ControllerKind controller_from_string(const std::string& s) {
  if (s == "dual_gradient") return ControllerKind::dual_gradient;
  if (s == "fabric") return ControllerKind::fabric;
  if (s == "limeric") return ControllerKind::limeric;
  if (s == "limeric_pulsar") return ControllerKind::limeric_pulsar;
  if (s == "fixed") return ControllerKind::fixed;
  throw std::invalid_argument("unknown controller: " + s);
}

std::array<std::uint8_t, 16> BeaconPayload::to_wire() const {
  std::array<std::uint8_t, 16> out{};
  auto put32 = [&out](int off, std::uint32_t v) {
    out[off + 0] = static_cast<std::uint8_t>(v & 0xff);
    out[off + 1] = static_cast<std::uint8_t>((v >> 8) & 0xff);
    out[off + 2] = static_cast<std::uint8_t>((v >> 16) & 0xff);
    out[off + 3] = static_cast<std::uint8_t>((v >> 24) & 0xff);
  };
  auto putf = [&put32](int off, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put32(off, bits);
  };
  put32(0, sender);
  putf(4, rate);
  putf(8, price_or_cbt);
  putf(12, aux);
  return out;
}

BeaconPayload BeaconPayload::from_wire(const std::array<std::uint8_t, 16>& b) {
  auto get32 = [&b](int off) {
    return static_cast<std::uint32_t>(b[off]) |
           (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
  };
  auto getf = [&get32](int off) {
    const std::uint32_t bits = get32(off);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  };
  BeaconPayload p;
  p.sender = get32(0);
  p.rate = getf(4);
  p.price_or_cbt = getf(8);
  p.aux = getf(12);
  return p;
}

std::string BeaconPayload::to_csv_row() const {
  std::ostringstream os;
  os << sender << ',' << rate << ',' << price_or_cbt << ',' << aux;
  return os.str();
}

BeaconPayload make_payload(ControllerKind kind, const VehicleState& v) {
  BeaconPayload p;
  p.sender = static_cast<std::uint32_t>(v.id);
  p.rate = static_cast<float>(v.rate_r);
  if (kind == ControllerKind::limeric_pulsar || kind == ControllerKind::limeric) {
    p.price_or_cbt = static_cast<float>(v.measured_cbt);
    p.aux = static_cast<float>(v.max_two_hop_cbt);
  } else {
    p.price_or_cbt = static_cast<float>(v.price_pi);
  }
  return p;
}

double rate_from_prices(double sum_pi, double alpha, double r_min, double r_max,
                        double w) {
  if (sum_pi <= 0.0) return r_max;
  if (alpha <= 0.0) return sum_pi < w ? r_max : r_min;
  return std::clamp(std::pow(w / sum_pi, 1.0 / alpha), r_min, r_max);
}

double dual_gradient_price_update(double pi, double beta, double C,
                                  double sum_rates) {
  return std::max(0.0, pi - beta * (C - sum_rates));
}

double fabric_price_update(double pi, double beta, double C, double sum_rates,
                           double f) {
  const double g = C - sum_rates;
  double s = 0.0;
  if (std::abs(g) >= f * C) s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
  return std::max(0.0, pi - beta * s);
}

double limeric_rate_update(double r, double alpha_L, double beta_L,
                           double goal_total, double measured_total, double r_min,
                           double r_max) {
  return std::clamp((1.0 - alpha_L) * r + beta_L * (goal_total - measured_total),
                    r_min, r_max);
}

namespace {

// Sum of last-heard rates over live table entries plus the vehicle's own rate.
double heard_rate_sum(const VehicleState& v) {
  double sum = v.rate_r;
  for (const auto& [id, e] : v.neighbor_table) sum += e.last_rate;
  return sum;
}

double heard_price_sum(const VehicleState& v) {
  double sum = 0.0;
  for (const auto& [id, e] : v.neighbor_table) sum += e.last_price;
  return sum;
}

}  // namespace

double pulsar_feedback(const LocalView& view) {
  const VehicleState& v = *view.self;
  double fb = v.measured_cbt;
  for (const auto& [id, e] : v.neighbor_table) {
    fb = std::max(fb, e.measured_cbt);
    fb = std::max(fb, e.max_two_hop_cbt);
  }
  return fb;
}

ControllerResult controller_step(ControllerKind kind, const LocalView& view,
                                 const SimParams& p) {
  const VehicleState& self = *view.self;
  const double C = p.capacity_C();
  ControllerResult out;
  out.new_rate = self.rate_r;
  out.new_price = self.price_pi;

  switch (kind) {
    case ControllerKind::fixed: {
      out.new_rate = self.r_max;
      out.new_price = 0.0;
      break;
    }
    case ControllerKind::dual_gradient:
    case ControllerKind::fabric: {
      // Perceived load: piggybacked rate reports by default, or the rate
      // implied by beacons actually received when measuring the channel.
      const double sum_rates =
          p.gradient_from_cbt
              ? self.rate_r + self.rx_count_last_period / p.sample_period_Ts
              : heard_rate_sum(self);
      out.new_price =
          kind == ControllerKind::fabric
              ? fabric_price_update(self.price_pi, p.beta, C, sum_rates, p.anti_flap_f)
              : dual_gradient_price_update(self.price_pi, p.beta, C, sum_rates);
      const double sum_pi = out.new_price + heard_price_sum(self);
      out.new_rate =
          rate_from_prices(sum_pi, p.alpha, self.r_min, self.r_max, self.weight);
      break;
    }
    case ControllerKind::limeric:
    case ControllerKind::limeric_pulsar: {
      const double own_total = heard_rate_sum(self);
      const double own_cbt = p.airtime_s() * own_total;
      double measured_total = own_total;
      if (kind == ControllerKind::limeric_pulsar) {
        // Two-hop congestion view, converted back to beacons/s.
        VehicleState tmp_self_view = self;  // measured_cbt of this period
        tmp_self_view.measured_cbt = own_cbt;
        LocalView vw{&tmp_self_view, view.now};
        measured_total = pulsar_feedback(vw) / p.airtime_s();
      }
      out.new_rate = limeric_rate_update(self.rate_r, p.limeric_alpha, p.limeric_beta,
                                         C, measured_total, self.r_min, self.r_max);
      out.new_price = 0.0;
      out.measured_cbt = own_cbt;
      // Advertised one-hop maximum, rebuilt from this period's inputs.
      double adv = own_cbt;
      for (const auto& [id, e] : self.neighbor_table)
        adv = std::max(adv, e.measured_cbt);
      out.max_two_hop_cbt = adv;
      break;
    }
  }
  return out;
}

}  // namespace beaconsim
