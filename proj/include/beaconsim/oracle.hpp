#pragma once

#include <span>
#include <vector>

#include "beaconsim/model.hpp"
#include "beaconsim/rng.hpp"

namespace beaconsim {

// Centralized formulation of the rate-allocation problem:
//   max sum_v U_v(r_v)  s.t.  sum_{u in n(v)} r_u <= C  and  r in [r_min, r_max].
struct NumProblem {
  std::vector<std::vector<int>> neighbor_sets;  // self-inclusive, sorted
  double capacity_C = 0.0;
  double alpha = 1.0;
  std::vector<double> weights;
  std::vector<double> r_min;
  std::vector<double> r_max;

  std::size_t size() const { return neighbor_sets.size(); }

  // Strict feasibility of the box minimum against every load constraint.
  bool feasible() const;

  static NumProblem from_graph(const NeighborGraph& g, const SimParams& p);
  static NumProblem from_graph(const NeighborGraph& g, const SimParams& p,
                               std::span<const VehicleState> states);
};

struct OracleSolution {
  RateAllocation rates;
  std::vector<double> prices;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Utility of one vehicle: w*r (alpha=0), w*log r (alpha=1),
// w*r^(1-alpha)/(1-alpha) otherwise.
double utility(double r, double alpha, double w);

// Solves the problem through its dual: projected gradient on the prices with
// adaptive steps, then a Newton polish on the active constraint set.
// Throws std::invalid_argument when the problem is infeasible.
OracleSolution solve_num(const NumProblem& prob, double tol = 1e-8,
                         int max_iter = 20000);

// max over primal violation, complementary slackness and the gap between the
// rates and the price-induced rates.
double kkt_residual(const NumProblem& prob, std::span<const double> rates,
                    std::span<const double> prices);

struct FairnessCertificate {
  bool pass = false;
  double worst_margin = 0.0;  // max over samples of sum_v w_v (r_v - r*_v)/r*_v^alpha
  int trials = 0;
};

// Samples random feasible allocations (uniform in the box, pulled toward the
// r_min anchor until every load constraint holds) and checks the fairness
// inequality against each.
FairnessCertificate check_alpha_fair(const NumProblem& prob,
                                     const RateAllocation& candidate, int trials,
                                     Rng& rng, double eps_total);

}  // namespace beaconsim
