#include "beaconsim/model.hpp"

#include <cmath>

namespace beaconsim {

ValidationReport validate_params(const SimParams& p) {
  ValidationReport rep;
  auto bad = [&rep](const std::string& msg) { rep.errors.push_back(msg); };

  if (!(p.data_rate_bps > 0)) bad("data_rate_bps must be positive");
  if (!(p.beacon_payload_bytes > 0)) bad("beacon_payload_bytes must be positive");
  if (!(p.header_bytes >= 0)) bad("header_bytes must be non-negative");
  if (!(p.mbl_fraction > 0.0 && p.mbl_fraction <= 1.0))
    bad("mbl_fraction must be in (0, 1]");
  if (!(p.alpha >= 0.0)) bad("alpha must be >= 0");
  if (!(p.weights_default > 0.0)) bad("weights_default must be positive");
  if (!(p.beta > 0.0)) bad("beta must be positive");
  if (!(p.price_init >= 0.0)) bad("price_init must be >= 0");
  if (!(p.anti_flap_f >= 0.0 && p.anti_flap_f < 1.0))
    bad("anti_flap_f must be in [0, 1)");
  if (!(p.sample_period_Ts > 0.0)) bad("sample_period_Ts must be positive");
  if (!(p.neighbor_expiry > 0.0)) bad("neighbor_expiry must be positive");
  if (!(p.r_min > 0.0)) bad("r_min must be positive");
  if (p.r_min > p.r_max) bad("rate bounds inverted: r_min > r_max");
  if (!(p.tx_power_mw > 0.0)) bad("tx_power_mw must be positive");
  if (!(p.freq_hz > 0.0)) bad("freq_hz must be positive");
  if (!(p.path_loss_exp >= 2.0)) bad("path_loss_exp must be >= 2");
  if (p.nakagami_m && !(*p.nakagami_m >= 0.5)) bad("nakagami_m must be >= 0.5");
  if (!(p.limeric_alpha > 0.0)) bad("limeric_alpha must be positive");
  if (!(p.limeric_beta > 0.0)) bad("limeric_beta must be positive");
  if (!(p.p_min_link > 0.0 && p.p_min_link < 1.0)) bad("p_min_link must be in (0, 1)");
  return rep;
}

void to_json(nlohmann::json& j, const SimParams& p) {
  j = nlohmann::json{{"data_rate_bps", p.data_rate_bps},
                     {"beacon_payload_bytes", p.beacon_payload_bytes},
                     {"header_bytes", p.header_bytes},
                     {"mbl_fraction", p.mbl_fraction},
                     {"capacity_C", p.capacity_C()},
                     {"alpha", p.alpha},
                     {"weights_default", p.weights_default},
                     {"beta", p.beta},
                     {"price_init", p.price_init},
                     {"anti_flap_f", p.anti_flap_f},
                     {"sample_period_Ts", p.sample_period_Ts},
                     {"neighbor_expiry", p.neighbor_expiry},
                     {"r_min", p.r_min},
                     {"r_max", p.r_max},
                     {"tx_power_mw", p.tx_power_mw},
                     {"sensitivity_dbm", p.sensitivity_dbm},
                     {"freq_hz", p.freq_hz},
                     {"path_loss_exp", p.path_loss_exp},
                     {"limeric_alpha", p.limeric_alpha},
                     {"limeric_beta", p.limeric_beta},
                     {"p_min_link", p.p_min_link},
                     {"gradient_from_cbt", p.gradient_from_cbt}};
  j["nakagami_m"] = p.nakagami_m ? nlohmann::json(*p.nakagami_m) : nlohmann::json();
}

void from_json(const nlohmann::json& j, SimParams& p) {
  auto get = [&j](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  get("data_rate_bps", p.data_rate_bps);
  get("beacon_payload_bytes", p.beacon_payload_bytes);
  get("header_bytes", p.header_bytes);
  get("mbl_fraction", p.mbl_fraction);
  get("alpha", p.alpha);
  get("weights_default", p.weights_default);
  get("beta", p.beta);
  get("price_init", p.price_init);
  get("anti_flap_f", p.anti_flap_f);
  get("sample_period_Ts", p.sample_period_Ts);
  get("neighbor_expiry", p.neighbor_expiry);
  get("r_min", p.r_min);
  get("r_max", p.r_max);
  get("tx_power_mw", p.tx_power_mw);
  get("sensitivity_dbm", p.sensitivity_dbm);
  get("freq_hz", p.freq_hz);
  get("path_loss_exp", p.path_loss_exp);
  get("limeric_alpha", p.limeric_alpha);
  get("limeric_beta", p.limeric_beta);
  get("p_min_link", p.p_min_link);
  if (j.contains("gradient_from_cbt"))
    p.gradient_from_cbt = j.at("gradient_from_cbt").get<bool>();
  if (j.contains("nakagami_m") && !j.at("nakagami_m").is_null())
    p.nakagami_m = j.at("nakagami_m").get<double>();
  // capacity_C is derived; if the document carries one, it must agree.
  if (j.contains("capacity_C")) {
    const double given = j.at("capacity_C").get<double>();
    if (std::abs(given - p.capacity_C()) > 1e-6 * std::max(1.0, p.capacity_C()))
      throw std::invalid_argument("capacity_C in config disagrees with derived value");
  }
}

}  // namespace beaconsim
