#include "beaconsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "beaconsim/channel.hpp"

namespace beaconsim {

const char* to_string(ScenarioSpec::Kind k) {
  switch (k) {
    case ScenarioSpec::Kind::all_in_range: return "all_in_range";
    case ScenarioSpec::Kind::multihop_line: return "multihop_line";
    case ScenarioSpec::Kind::jam_clusters: return "jam_clusters";
    case ScenarioSpec::Kind::single_approach: return "single_approach";
    case ScenarioSpec::Kind::bridge: return "bridge";
    case ScenarioSpec::Kind::queue: return "queue";
    case ScenarioSpec::Kind::custom: return "custom";
  }
  return "?";
}

ScenarioSpec::Kind scenario_kind_from_string(const std::string& s) {
  using K = ScenarioSpec::Kind;
  if (s == "all_in_range") return K::all_in_range;
  if (s == "multihop_line") return K::multihop_line;
  if (s == "jam_clusters") return K::jam_clusters;
  if (s == "single_approach") return K::single_approach;
  if (s == "bridge") return K::bridge;
  if (s == "queue") return K::queue;
  if (s == "custom") return K::custom;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)},
                     {"rng_seed", s.rng_seed},
                     {"road_length_m", s.road_length_m},
                     {"density", s.density},
                     {"speed_mps", s.speed_mps},
                     {"jam_size", s.jam_size},
                     {"cluster_a_size", s.cluster_a_size},
                     {"cluster_b_size", s.cluster_b_size},
                     {"cluster_spacing_m", s.cluster_spacing_m},
                     {"ab_separation_m", s.ab_separation_m},
                     {"b_jam_overlap_m", s.b_jam_overlap_m},
                     {"approach_start_m", s.approach_start_m},
                     {"bridge_static_len_m", s.bridge_static_len_m},
                     {"bridge_static_density", s.bridge_static_density},
                     {"bridge_moving_len_m", s.bridge_moving_len_m},
                     {"bridge_moving_count", s.bridge_moving_count},
                     {"bridge_start_m", s.bridge_start_m},
                     {"queue_initial", s.queue_initial},
                     {"queue_spacing_m", s.queue_spacing_m},
                     {"queue_position_jitter_m", s.queue_position_jitter_m},
                     {"queue_batch_size", s.queue_batch_size},
                     {"queue_batch_interval_s", s.queue_batch_interval_s},
                     {"queue_batches", s.queue_batches},
                     {"queue_spawn_distance_m", s.queue_spawn_distance_m},
                     {"queue_stop_gap_m", s.queue_stop_gap_m}};
  j["count"] = s.count ? nlohmann::json(*s.count) : nlohmann::json();
  auto arr = nlohmann::json::array();
  for (const auto& v : s.custom_positions) arr.push_back({v.x, v.y});
  j["custom_positions"] = arr;
  auto varr = nlohmann::json::array();
  for (const auto& v : s.custom_velocities) varr.push_back({v.x, v.y});
  j["custom_velocities"] = varr;
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  if (j.contains("kind")) s.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
  auto getd = [&j](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  auto geti = [&j](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  getd("road_length_m", s.road_length_m);
  getd("density", s.density);
  if (j.contains("count") && !j.at("count").is_null()) s.count = j.at("count").get<int>();
  getd("speed_mps", s.speed_mps);
  geti("jam_size", s.jam_size);
  geti("cluster_a_size", s.cluster_a_size);
  geti("cluster_b_size", s.cluster_b_size);
  getd("cluster_spacing_m", s.cluster_spacing_m);
  getd("ab_separation_m", s.ab_separation_m);
  getd("b_jam_overlap_m", s.b_jam_overlap_m);
  getd("approach_start_m", s.approach_start_m);
  getd("bridge_static_len_m", s.bridge_static_len_m);
  getd("bridge_static_density", s.bridge_static_density);
  getd("bridge_moving_len_m", s.bridge_moving_len_m);
  geti("bridge_moving_count", s.bridge_moving_count);
  getd("bridge_start_m", s.bridge_start_m);
  geti("queue_initial", s.queue_initial);
  getd("queue_spacing_m", s.queue_spacing_m);
  getd("queue_position_jitter_m", s.queue_position_jitter_m);
  geti("queue_batch_size", s.queue_batch_size);
  getd("queue_batch_interval_s", s.queue_batch_interval_s);
  geti("queue_batches", s.queue_batches);
  getd("queue_spawn_distance_m", s.queue_spawn_distance_m);
  getd("queue_stop_gap_m", s.queue_stop_gap_m);
  if (j.contains("custom_positions")) {
    s.custom_positions.clear();
    for (const auto& e : j.at("custom_positions"))
      s.custom_positions.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    s.custom_velocities.assign(s.custom_positions.size(), {});
    if (j.contains("custom_velocities")) {
      s.custom_velocities.clear();
      for (const auto& e : j.at("custom_velocities"))
        s.custom_velocities.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    }
  }
}

std::vector<double> place_deterministic(int n, double spacing_m) {
  if (n < 1) throw std::invalid_argument("place_deterministic: n must be >= 1");
  if (!(spacing_m > 0)) throw std::invalid_argument("place_deterministic: spacing must be > 0");
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = i * spacing_m;
  return xs;
}

std::vector<double> place_poisson(double length_m, double rho, Rng& rng) {
  if (!(length_m > 0) || !(rho > 0))
    throw std::invalid_argument("place_poisson: length and rho must be > 0");
  std::vector<double> xs;
  double x = rng.exponential(rho);
  while (x <= length_m) {
    xs.push_back(x);
    x += rng.exponential(rho);
  }
  return xs;
}

std::vector<double> place_uniform_count(int n, double length_m, Rng& rng) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = rng.uniform(0.0, length_m);
  std::sort(xs.begin(), xs.end());
  return xs;
}

namespace {

VehicleState make_vehicle(int id, Vec2 pos, Vec2 vel, const SimParams& p) {
  VehicleState v;
  v.id = id;
  v.position = pos;
  v.velocity = vel;
  v.rate_r = p.r_max;
  v.price_pi = p.price_init;
  v.weight = p.weights_default;
  v.r_min = p.r_min;
  v.r_max = p.r_max;
  return v;
}

std::vector<VehicleState> line_vehicles(const std::vector<double>& xs,
                                        const SimParams& p) {
  std::vector<VehicleState> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.push_back(make_vehicle(static_cast<int>(i), {xs[i], 0.0}, {0.0, 0.0}, p));
  return out;
}

std::vector<double> line_positions(const ScenarioSpec& spec, Rng& rng) {
  if (spec.count) return place_uniform_count(*spec.count, spec.road_length_m, rng);
  return place_poisson(spec.road_length_m, spec.density, rng);
}

}  // namespace

Scenario build_scenario(const ScenarioSpec& spec, const SimParams& p) {
  Rng rng(spec.rng_seed);
  Scenario sc;
  switch (spec.kind) {
    case ScenarioSpec::Kind::all_in_range:
    case ScenarioSpec::Kind::multihop_line: {
      sc.initial = line_vehicles(line_positions(spec, rng), p);
      break;
    }
    case ScenarioSpec::Kind::jam_clusters: {
      // Cluster A at the origin, cluster B one separation to its right, the
      // jam placed so that B's middle vehicle reaches b_jam_overlap_m worth of
      // jam vehicles. A must stay out of jam range; B must reach both A and
      // the first jam vehicles, which requires range >= A-to-B extent.
      const auto model = ChannelModel::from_params(p);
      const double range = max_range_m(model, p.tx_power_mw, p.sensitivity_dbm);
      const double d = spec.cluster_spacing_m;
      std::vector<double> xs;
      const double a_end = (spec.cluster_a_size - 1) * d;
      for (int i = 0; i < spec.cluster_a_size; ++i) xs.push_back(i * d);
      const double b_start = a_end + spec.ab_separation_m;
      for (int i = 0; i < spec.cluster_b_size; ++i) xs.push_back(b_start + i * d);
      const double b_mid = b_start + (spec.cluster_b_size - 1) * d / 2.0;
      const double jam_start = b_mid + range - spec.b_jam_overlap_m;
      for (int i = 0; i < spec.jam_size; ++i) xs.push_back(jam_start + i * d);
      sc.initial = line_vehicles(xs, p);
      break;
    }
    case ScenarioSpec::Kind::single_approach: {
      auto xs = line_positions(spec, rng);
      sc.initial = line_vehicles(xs, p);
      const double x0 = xs.empty() ? 0.0 : xs.front();
      sc.initial.push_back(make_vehicle(static_cast<int>(sc.initial.size()),
                                        {x0 - spec.approach_start_m, 0.0},
                                        {spec.speed_mps, 0.0}, p));
      break;
    }
    case ScenarioSpec::Kind::bridge: {
      // Static cluster on the north-south axis, crossing at the origin.
      auto ys = place_poisson(spec.bridge_static_len_m, spec.bridge_static_density, rng);
      int id = 0;
      for (double y : ys)
        sc.initial.push_back(
            make_vehicle(id++, {0.0, y - spec.bridge_static_len_m / 2.0}, {0.0, 0.0}, p));
      // Moving cluster west of the crossing heading east.
      auto xs = place_uniform_count(spec.bridge_moving_count, spec.bridge_moving_len_m, rng);
      for (double x : xs)
        sc.initial.push_back(make_vehicle(
            id++, {x - spec.bridge_start_m - spec.bridge_moving_len_m, 0.0},
            {spec.speed_mps, 0.0}, p));
      break;
    }
    case ScenarioSpec::Kind::queue: {
      for (int i = 0; i < spec.queue_initial; ++i) {
        double x = spec.queue_spawn_distance_m + i * spec.queue_spacing_m;
        if (spec.queue_position_jitter_m > 0)
          x += rng.uniform(-spec.queue_position_jitter_m, spec.queue_position_jitter_m);
        sc.initial.push_back(make_vehicle(i, {x, 0.0}, {0.0, 0.0}, p));
      }
      for (int b = 0; b < spec.queue_batches; ++b) {
        MobilityEvent ev;
        ev.time = b * spec.queue_batch_interval_s;
        for (int i = 0; i < spec.queue_batch_size; ++i) {
          ev.spawn_positions.push_back({-5.0 * i, 0.0});
          ev.spawn_velocities.push_back({spec.speed_mps, 0.0});
        }
        sc.events.push_back(ev);
      }
      sc.queue_stop_rule = true;
      sc.stop_gap_m = spec.queue_stop_gap_m;
      break;
    }
    case ScenarioSpec::Kind::custom: {
      if (spec.custom_positions.empty())
        throw std::invalid_argument("custom scenario needs custom_positions");
      for (std::size_t i = 0; i < spec.custom_positions.size(); ++i) {
        Vec2 vel = i < spec.custom_velocities.size() ? spec.custom_velocities[i] : Vec2{};
        sc.initial.push_back(
            make_vehicle(static_cast<int>(i), spec.custom_positions[i], vel, p));
      }
      break;
    }
  }
  return sc;
}

void step_mobility(std::vector<VehicleState>& states, const Scenario& scenario,
                   std::size_t& next_event, double t, double dt, const SimParams& p) {
  // Spawn events with time in (t - dt, t].
  while (next_event < scenario.events.size() &&
         scenario.events[next_event].time <= t + 1e-12) {
    const auto& ev = scenario.events[next_event];
    for (std::size_t i = 0; i < ev.spawn_positions.size(); ++i) {
      VehicleState v;
      v.id = static_cast<int>(states.size());
      v.position = ev.spawn_positions[i];
      v.velocity = i < ev.spawn_velocities.size() ? ev.spawn_velocities[i] : Vec2{};
      v.rate_r = p.r_max;
      v.price_pi = p.price_init;
      v.weight = p.weights_default;
      v.r_min = p.r_min;
      v.r_max = p.r_max;
      states.push_back(v);
    }
    ++next_event;
  }
  for (auto& v : states) {
    v.position.x += v.velocity.x * dt;
    v.position.y += v.velocity.y * dt;
  }
  if (!scenario.queue_stop_rule) return;
  // Park movers that reached the queue tail, front-most first so a batch
  // stacks up behind the tail in arrival order.
  double tail = std::numeric_limits<double>::infinity();
  for (const auto& v : states)
    if (v.velocity.x == 0.0 && v.velocity.y == 0.0) tail = std::min(tail, v.position.x);
  if (!std::isfinite(tail)) return;
  std::vector<int> movers;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].velocity.x > 0.0) movers.push_back(static_cast<int>(i));
  std::sort(movers.begin(), movers.end(), [&](int a, int b) {
    return states[a].position.x > states[b].position.x;
  });
  for (int idx : movers) {
    auto& v = states[idx];
    if (v.position.x >= tail - scenario.stop_gap_m) {
      v.position.x = tail - scenario.stop_gap_m;
      v.velocity = {0.0, 0.0};
      tail = v.position.x;
    }
  }
}

}  // namespace beaconsim
