#pragma once

#include <optional>
#include <span>
#include <vector>

#include "beaconsim/engine.hpp"
#include "beaconsim/model.hpp"

namespace beaconsim {

// Root-mean-square error of one step's rates against a reference allocation.
// Throws on vehicle-set mismatch.
double rmse_vs_oracle(const StepTrace& step, const RateAllocation& oracle);

// Fraction of vehicles whose offered channel load is at or below the MBL.
double fraction_below_mbl(const StepTrace& step, const SimParams& p);

// D_v(d) from accumulated counters; absent when nothing was receivable.
std::optional<double> effective_delivery_ratio(const DeliveryCounters& acc,
                                               int vehicle, double distance);

// r_hat = r * Dbar.
double effective_rate(double rate, double delivery_ratio);

// Mean inter-beacon reception time per vehicle, estimated from per-period
// reception counts: total listening time / total receptions. Vehicles that
// never received anything get no value.
std::vector<std::optional<double>> mean_irt(const RunResult& result,
                                            const SimParams& p);

// Time from the last sample at r_max (departure) until the rate first stays
// within band of the reference for `dwell` consecutive samples (or to the end
// of the series). The reference is the terminal value unless an explicit
// per-sample reference series is supplied (e.g. the queue's own rate).
// A vehicle that never leaves r_max converges in 0 s; one that never settles
// yields no value.
std::optional<double> convergence_time(std::span<const double> times,
                                       std::span<const double> rates, double r_max,
                                       double band_fraction = 0.05, int dwell = 10,
                                       std::span<const double> reference = {});

// Per-vehicle rate series extracted from a run (absent entries before spawn).
std::vector<double> vehicle_rate_series(const RunResult& result, int vehicle,
                                        std::vector<double>& times_out);

struct MetricReport {
  struct StepAggregate {
    int step = 0;
    double time = 0.0;
    double mean_rate = 0.0, min_rate = 0.0, max_rate = 0.0;
    double fraction_below_mbl = 0.0;
    std::optional<double> rmse_vs_oracle;
  };
  std::vector<StepAggregate> per_step;
  std::vector<double> final_rates;                       // by vehicle id
  std::vector<std::optional<double>> convergence_times;  // by vehicle id
  std::vector<std::optional<double>> irt;                // by vehicle id
  double convergence_band = 0.05;
  int convergence_dwell = 10;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // per-step aggregates
};

MetricReport compute_metrics(const RunResult& result, const SimParams& p,
                             const RateAllocation* oracle = nullptr,
                             double band = 0.05, int dwell = 10);

}  // namespace beaconsim
