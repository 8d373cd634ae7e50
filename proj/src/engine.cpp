#include "beaconsim/engine.hpp"

#include <algorithm>
#include <numeric>

namespace beaconsim {

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"controller", to_string(c.controller)},
                     {"synchronous", c.synchronous},
                     {"steps", c.steps},
                     {"seed", c.seed},
                     {"replications", c.replications}};
  j["delivery_distances"] = c.delivery_distances;
  j["scenario"] = c.scenario;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (j.contains("controller"))
    c.controller = controller_from_string(j.at("controller").get<std::string>());
  if (j.contains("synchronous")) c.synchronous = j.at("synchronous").get<bool>();
  if (j.contains("steps")) c.steps = j.at("steps").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("replications")) c.replications = j.at("replications").get<int>();
  if (j.contains("delivery_distances"))
    c.delivery_distances = j.at("delivery_distances").get<std::vector<double>>();
  if (j.contains("scenario")) c.scenario = j.at("scenario").get<ScenarioSpec>();
}

namespace {

void accumulate_deliveries(DeliveryCounters& acc, const DeliveryReport& report,
                           const std::vector<VehicleState>& states,
                           const ChannelModel& model, const SimParams& p) {
  if (acc.distances.empty()) return;
  acc.ensure_size(states.size());
  for (const auto& link : report.links) {
    const double d = distance(states[link.tx].position, states[link.rx].position);
    const double mean =
        d <= 0.0 ? 0.0 : received_power_dbm(model, p.tx_power_mw, d);
    const bool above = d <= 0.0 || mean >= p.sensitivity_dbm;
    for (std::size_t i = 0; i < acc.distances.size(); ++i) {
      if (d > acc.distances[i]) continue;
      if (above) acc.receivable[link.tx][i] += link.sent;
      acc.received[link.tx][i] += link.received;
    }
  }
}

void write_table_entry(VehicleState& rx, const VehicleState& tx, double now) {
  NeighborEntry& e = rx.neighbor_table[tx.id];
  e.last_rate = tx.rate_r;
  e.last_price = tx.price_pi;
  e.measured_cbt = tx.measured_cbt;
  e.max_two_hop_cbt = tx.max_two_hop_cbt;
  e.last_heard_time = now;
}

void apply_result(VehicleState& v, const ControllerResult& res) {
  v.rate_r = res.new_rate;
  v.price_pi = res.new_price;
  v.measured_cbt = res.measured_cbt;
  v.max_two_hop_cbt = res.max_two_hop_cbt;
}

}  // namespace

RunResult run(const RunConfig& cfg, const SimParams& p) {
  const Scenario scenario = build_scenario(cfg.scenario, p);
  const ChannelModel model = ChannelModel::from_params(p);
  Rng rng(cfg.seed);

  std::vector<VehicleState> states = scenario.initial;
  if (!cfg.synchronous)
    for (auto& v : states) v.phase_offset = rng.uniform(0.0, p.sample_period_Ts);

  RunResult result;
  result.deliveries.distances = cfg.delivery_distances;
  result.initial_vehicle_count = static_cast<int>(states.size());
  std::size_t next_event = 0;

  for (int k = 1; k <= cfg.steps; ++k) {
    const double t = k * p.sample_period_Ts;
    const std::size_t before = states.size();
    step_mobility(states, scenario, next_event, t, p.sample_period_Ts, p);
    if (!cfg.synchronous)
      for (std::size_t i = before; i < states.size(); ++i)
        states[i].phase_offset = rng.uniform(0.0, p.sample_period_Ts);

    std::vector<Vec2> positions(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) positions[i] = states[i].position;
    const NeighborGraph graph = build_neighbor_graph(positions, model, p);
    const DeliveryReport report = deliver_beacons(graph, states, rng, p);
    accumulate_deliveries(result.deliveries, report, states, model, p);

    std::vector<int> rx_count(states.size(), 0);
    for (const auto& link : report.links) rx_count[link.rx] += link.received;
    for (std::size_t i = 0; i < states.size(); ++i)
      states[i].rx_count_last_period = rx_count[i];

    if (cfg.synchronous) {
      // Everyone reads the start-of-period broadcasts, then updates at once.
      const std::vector<VehicleState> snapshot = states;
      for (const auto& link : report.links)
        if (link.price_heard())
          write_table_entry(states[link.rx], snapshot[link.tx], t);
      for (auto& v : states) v.drop_stale_neighbors(t, p.neighbor_expiry);
      std::vector<ControllerResult> results(states.size());
      for (std::size_t i = 0; i < states.size(); ++i) {
        LocalView view{&states[i], t};
        results[i] = controller_step(cfg.controller, view, p);
      }
      for (std::size_t i = 0; i < states.size(); ++i) apply_result(states[i], results[i]);
    } else {
      // Vehicles update at their phase instant: a vehicle that updates later
      // in the period sees the in-period broadcasts of earlier ones.
      std::vector<std::vector<const DeliveryReport::Link*>> incoming(states.size());
      for (const auto& link : report.links)
        if (link.price_heard()) incoming[link.rx].push_back(&link);
      std::vector<int> order(states.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (states[a].phase_offset != states[b].phase_offset)
          return states[a].phase_offset < states[b].phase_offset;
        return a < b;
      });
      for (int idx : order) {
        VehicleState& v = states[idx];
        for (const auto* link : incoming[idx]) write_table_entry(v, states[link->tx], t);
        v.drop_stale_neighbors(t, p.neighbor_expiry);
        LocalView view{&v, t};
        apply_result(v, controller_step(cfg.controller, view, p));
      }
    }

    std::vector<double> rates(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) rates[i] = states[i].rate_r;
    const std::vector<double> cbt = offered_cbt(graph, rates, p);

    StepTrace trace;
    trace.step = k;
    trace.time = t;
    trace.rows.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      StepTraceRow row;
      row.vehicle = states[i].id;
      row.x = states[i].position.x;
      row.y = states[i].position.y;
      row.rate = states[i].rate_r;
      row.price = states[i].price_pi;
      row.offered_cbt = cbt[i];
      row.rx_count = rx_count[i];
      trace.rows.push_back(row);
    }
    result.steps.push_back(std::move(trace));
  }
  result.final_vehicle_count = static_cast<int>(states.size());
  return result;
}

std::vector<RunResult> replicate(const RunConfig& cfg, const SimParams& p, int n) {
  std::vector<RunResult> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    RunConfig c = cfg;
    if (i > 0) {
      c.scenario.rng_seed = derive_seed(cfg.seed, 2 * i);
      c.seed = derive_seed(cfg.seed, 2 * i + 1);
    }
    out.push_back(run(c, p));
  }
  return out;
}

}  // namespace beaconsim
