#include "beaconsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beaconsim {

double rmse_vs_oracle(const StepTrace& step, const RateAllocation& oracle) {
  if (step.rows.size() != oracle.rates.size())
    throw std::invalid_argument("rmse_vs_oracle: vehicle sets differ");
  double sum = 0.0;
  for (const auto& row : step.rows) {
    const double d = row.rate - oracle.rates[row.vehicle];
    sum += d * d;
  }
  return std::sqrt(sum / step.rows.size());
}

double fraction_below_mbl(const StepTrace& step, const SimParams& p) {
  if (step.rows.empty()) return 0.0;
  int below = 0;
  for (const auto& row : step.rows)
    if (row.offered_cbt <= p.mbl_fraction + 1e-12) ++below;
  return static_cast<double>(below) / step.rows.size();
}

std::optional<double> effective_delivery_ratio(const DeliveryCounters& acc,
                                               int vehicle, double distance) {
  auto it = std::find(acc.distances.begin(), acc.distances.end(), distance);
  if (it == acc.distances.end()) return std::nullopt;
  const std::size_t di = it - acc.distances.begin();
  if (vehicle < 0 || vehicle >= static_cast<int>(acc.receivable.size()))
    return std::nullopt;
  const long long n_s = acc.receivable[vehicle][di];
  if (n_s == 0) return std::nullopt;
  return static_cast<double>(acc.received[vehicle][di]) / static_cast<double>(n_s);
}

double effective_rate(double rate, double delivery_ratio) {
  return rate * delivery_ratio;
}

std::vector<std::optional<double>> mean_irt(const RunResult& result,
                                            const SimParams& p) {
  if (result.steps.empty()) return {};
  const int n = result.final_vehicle_count;
  std::vector<long long> rx(n, 0);
  std::vector<int> periods(n, 0);
  for (const auto& st : result.steps) {
    for (const auto& row : st.rows) {
      rx[row.vehicle] += row.rx_count;
      periods[row.vehicle] += 1;
    }
  }
  std::vector<std::optional<double>> out(n);
  for (int v = 0; v < n; ++v)
    if (rx[v] > 0)
      out[v] = periods[v] * p.sample_period_Ts / static_cast<double>(rx[v]);
  return out;
}

std::optional<double> convergence_time(std::span<const double> times,
                                       std::span<const double> rates, double r_max,
                                       double band_fraction, int dwell,
                                       std::span<const double> reference) {
  const std::size_t n = rates.size();
  if (n == 0) return std::nullopt;
  std::size_t depart = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (rates[i] < r_max - 1e-9) {
      depart = i;
      break;
    }
  }
  if (depart == n) return 0.0;  // never left r_max
  const double t_start = depart > 0 ? times[depart - 1] : times[0];
  auto ref_at = [&](std::size_t i) {
    return reference.empty() ? rates[n - 1] : reference[i];
  };
  for (std::size_t i = depart; i < n; ++i) {
    const std::size_t end = std::min(n, i + static_cast<std::size_t>(dwell));
    if (end - i < 2) break;  // a lone trailing sample does not count as settled
    bool ok = true;
    for (std::size_t j = i; j < end && ok; ++j) {
      const double ref = ref_at(j);
      ok = std::abs(rates[j] - ref) <= band_fraction * std::max(std::abs(ref), 1e-9);
    }
    if (ok) return times[i] - t_start;
  }
  return std::nullopt;
}

std::vector<double> vehicle_rate_series(const RunResult& result, int vehicle,
                                        std::vector<double>& times_out) {
  std::vector<double> rates;
  times_out.clear();
  for (const auto& st : result.steps) {
    for (const auto& row : st.rows) {
      if (row.vehicle == vehicle) {
        rates.push_back(row.rate);
        times_out.push_back(st.time);
        break;
      }
    }
  }
  return rates;
}

MetricReport compute_metrics(const RunResult& result, const SimParams& p,
                             const RateAllocation* oracle, double band, int dwell) {
  MetricReport rep;
  rep.convergence_band = band;
  rep.convergence_dwell = dwell;
  for (const auto& st : result.steps) {
    MetricReport::StepAggregate agg;
    agg.step = st.step;
    agg.time = st.time;
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0, sum = 0.0;
    for (const auto& row : st.rows) {
      mn = std::min(mn, row.rate);
      mx = std::max(mx, row.rate);
      sum += row.rate;
    }
    agg.mean_rate = st.rows.empty() ? 0.0 : sum / st.rows.size();
    agg.min_rate = st.rows.empty() ? 0.0 : mn;
    agg.max_rate = mx;
    agg.fraction_below_mbl = fraction_below_mbl(st, p);
    if (oracle && st.rows.size() == oracle->rates.size())
      agg.rmse_vs_oracle = rmse_vs_oracle(st, *oracle);
    rep.per_step.push_back(agg);
  }
  const int n = result.final_vehicle_count;
  rep.final_rates.assign(n, 0.0);
  if (!result.steps.empty())
    for (const auto& row : result.steps.back().rows) rep.final_rates[row.vehicle] = row.rate;
  // Vehicles spawned mid-run are measured against the established
  // population's moving mean rate (the "value of the queue"); vehicles
  // present from the start settle against their own terminal value.
  const int established = result.initial_vehicle_count > 0
                              ? result.initial_vehicle_count
                              : n;
  std::vector<double> ref_series;
  if (established < n) {
    for (const auto& st : result.steps) {
      double s = 0;
      int c = 0;
      for (const auto& row : st.rows)
        if (row.vehicle < established) {
          s += row.rate;
          ++c;
        }
      ref_series.push_back(c ? s / c : 0.0);
    }
  }
  rep.convergence_times.resize(n);
  for (int v = 0; v < n; ++v) {
    std::vector<double> times;
    const auto rates = vehicle_rate_series(result, v, times);
    if (v >= established && !ref_series.empty()) {
      // Align the reference with this vehicle's lifetime.
      const std::size_t skip = result.steps.size() - rates.size();
      std::vector<double> ref(ref_series.begin() + skip, ref_series.end());
      rep.convergence_times[v] =
          convergence_time(times, rates, p.r_max, band, dwell, ref);
    } else {
      rep.convergence_times[v] = convergence_time(times, rates, p.r_max, band, dwell);
    }
  }
  rep.irt = mean_irt(result, p);
  return rep;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["convergence_band"] = convergence_band;
  j["convergence_dwell"] = convergence_dwell;
  auto steps = nlohmann::json::array();
  for (const auto& a : per_step) {
    nlohmann::json s{{"step", a.step},
                     {"time", a.time},
                     {"mean_rate", a.mean_rate},
                     {"min_rate", a.min_rate},
                     {"max_rate", a.max_rate},
                     {"fraction_below_mbl", a.fraction_below_mbl}};
    if (a.rmse_vs_oracle) s["rmse_vs_oracle"] = *a.rmse_vs_oracle;
    steps.push_back(s);
  }
  j["per_step"] = steps;
  j["final_rates"] = final_rates;
  auto conv = nlohmann::json::array();
  for (const auto& c : convergence_times)
    conv.push_back(c ? nlohmann::json(*c) : nlohmann::json());
  j["convergence_times"] = conv;
  auto irts = nlohmann::json::array();
  for (const auto& c : irt) irts.push_back(c ? nlohmann::json(*c) : nlohmann::json());
  j["mean_irt"] = irts;
  return j;
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "step,time,mean_rate,min_rate,max_rate,fraction_below_mbl,rmse_vs_oracle\n";
  for (const auto& a : per_step) {
    os << a.step << ',' << a.time << ',' << a.mean_rate << ',' << a.min_rate << ','
       << a.max_rate << ',' << a.fraction_below_mbl << ',';
    if (a.rmse_vs_oracle) os << *a.rmse_vs_oracle;
    os << '\n';
  }
  return os.str();
}

}  // namespace beaconsim
