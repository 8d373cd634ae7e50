#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "beaconsim/oracle.hpp"

using namespace beaconsim;

namespace {

NumProblem chain_problem(double alpha, double rmin, double rmax) {
  NumProblem p;
  p.neighbor_sets = {{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}};
  p.capacity_C = 3.0;
  p.alpha = alpha;
  p.weights.assign(4, 1.0);
  p.r_min.assign(4, rmin);
  p.r_max.assign(4, rmax);
  return p;
}

NumProblem all_in_range(int n, double alpha = 1.0) {
  NumProblem p;
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  p.neighbor_sets.assign(n, all);
  p.capacity_C = 781.25;
  p.alpha = alpha;
  p.weights.assign(n, 1.0);
  p.r_min.assign(n, 1.0);
  p.r_max.assign(n, 10.0);
  return p;
}

// Independent check for the symmetric 4-chain: by symmetry and strict
// concavity the optimum has r = (a, b, b, a); grid-search the two remaining
// degrees of freedom.
std::pair<double, double> chain_grid_oracle(double alpha, double rmin, double rmax,
                                            double step = 1e-3) {
  double best_a = rmin, best_b = rmin, best = -1e300;
  for (double a = rmin; a <= rmax + 1e-12; a += step) {
    // a + 2b <= 3 binds the middle constraints; a + b <= 3 is weaker here.
    const double bmax = std::min(rmax, (3.0 - a) / 2.0);
    for (double b = rmin; b <= bmax + 1e-12; b += step) {
      const double val = 2 * utility(a, alpha, 1.0) + 2 * utility(b, alpha, 1.0);
      if (val > best) {
        best = val;
        best_a = a;
        best_b = b;
      }
    }
  }
  return {best_a, best_b};
}

}  // namespace

TEST_CASE("utility family values") {
  CHECK(utility(1.0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(utility(5.0, 0.0, 2.0) == doctest::Approx(10.0));
  CHECK(utility(4.0, 2.0, 1.0) == doctest::Approx(-0.25));
  CHECK_THROWS_AS(utility(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("symmetric instances split the capacity evenly") {
  auto sol = solve_num(all_in_range(100), 1e-10);
  REQUIRE(sol.converged);
  for (double r : sol.rates.rates) CHECK(r == doctest::Approx(7.8125).epsilon(1e-9));
  sol = solve_num(all_in_range(200), 1e-10);
  REQUIRE(sol.converged);
  for (double r : sol.rates.rates) CHECK(r == doctest::Approx(3.90625).epsilon(1e-9));
}

TEST_CASE("symmetric solution is independent of alpha") {
  for (double alpha : {1.0, 2.0, 6.0}) {
    const auto sol = solve_num(all_in_range(100, alpha), 1e-9);
    REQUIRE(sol.converged);
    for (double r : sol.rates.rates) CHECK(r == doctest::Approx(7.8125).epsilon(1e-7));
  }
}

TEST_CASE("4-chain, alpha=1: the analytic optimum (1.5, .75, .75, 1.5)") {
  const auto sol = solve_num(chain_problem(1.0, 0.01, 10.0), 1e-12);
  REQUIRE(sol.converged);
  CHECK(sol.rates.rates[0] == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(sol.rates.rates[1] == doctest::Approx(0.75).epsilon(1e-5));
  CHECK(sol.rates.rates[2] == doctest::Approx(0.75).epsilon(1e-5));
  CHECK(sol.rates.rates[3] == doctest::Approx(1.5).epsilon(1e-5));
  // Brute-force grid agrees to its own resolution.
  const auto [ga, gb] = chain_grid_oracle(1.0, 0.01, 10.0, 1e-3);
  CHECK(std::abs(ga - 1.5) <= 2e-3);
  CHECK(std::abs(gb - 0.75) <= 2e-3);
}

TEST_CASE("4-chain, alpha=6 with the default floor: the max-min point (1,1,1,1)") {
  const auto sol = solve_num(chain_problem(6.0, 1.0, 10.0), 1e-12);
  REQUIRE(sol.converged);
  for (double r : sol.rates.rates) CHECK(r == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("4-chain, alpha=6 with a loose floor: grid search confirms the optimum") {
  // With r_min far below 1 the alpha=6 optimum is NOT the max-min limit:
  // edge vehicles trade 2^(1/6) above the middle ones.
  const auto sol = solve_num(chain_problem(6.0, 0.01, 10.0), 1e-12);
  REQUIRE(sol.converged);
  const double ratio = std::pow(2.0, 1.0 / 6.0);
  const double b = 3.0 / (2.0 + ratio);
  CHECK(sol.rates.rates[0] == doctest::Approx(b * ratio).epsilon(1e-5));
  CHECK(sol.rates.rates[1] == doctest::Approx(b).epsilon(1e-5));
  const auto [ga, gb] = chain_grid_oracle(6.0, 0.01, 10.0, 1e-3);
  CHECK(std::abs(ga - b * ratio) <= 2e-3);
  CHECK(std::abs(gb - b) <= 2e-3);
}

TEST_CASE("spread of the chain allocation shrinks as alpha grows") {
  double prev = 1e9;
  for (double alpha : {1.0, 2.0, 4.0, 6.0}) {
    const auto sol = solve_num(chain_problem(alpha, 0.01, 10.0), 1e-10);
    REQUIRE(sol.converged);
    const auto [mn, mx] =
        std::minmax_element(sol.rates.rates.begin(), sol.rates.rates.end());
    const double spread = *mx - *mn;
    CHECK(spread <= prev + 1e-9);
    prev = spread;
  }
}

TEST_CASE("kkt residual: optimal solutions sit below tolerance") {
  const auto prob = chain_problem(1.0, 0.01, 10.0);
  const auto sol = solve_num(prob, 1e-12);
  CHECK(kkt_residual(prob, sol.rates.rates, sol.prices) <= 1e-10);
}

TEST_CASE("kkt residual: all-max rates with zero prices show the primal violation") {
  const auto prob = chain_problem(1.0, 0.01, 10.0);
  std::vector<double> rates(4, 10.0), prices(4, 0.0);
  // Worst neighborhood holds 3 vehicles at 10 against capacity 3.
  CHECK(kkt_residual(prob, rates, prices) == doctest::Approx(27.0));
}

TEST_CASE("kkt residual: perturbing one optimal rate is detected") {
  const auto prob = chain_problem(1.0, 0.01, 10.0);
  auto sol = solve_num(prob, 1e-12);
  auto rates = sol.rates.rates;
  rates[0] += 0.1;
  CHECK(kkt_residual(prob, rates, sol.prices) >= 0.09);
}

TEST_CASE("weight scaling leaves the allocation unchanged") {
  auto prob = chain_problem(2.0, 0.01, 10.0);
  const auto base = solve_num(prob, 1e-11);
  for (auto& w : prob.weights) w *= 7.5;
  const auto scaled = solve_num(prob, 1e-11);
  for (int v = 0; v < 4; ++v)
    CHECK(scaled.rates.rates[v] == doctest::Approx(base.rates.rates[v]).epsilon(1e-6));
}

TEST_CASE("fairness certificate holds for oracle output and is exact at r*") {
  const auto prob = chain_problem(1.0, 0.01, 10.0);
  const auto sol = solve_num(prob, 1e-12);
  Rng rng(11);
  const auto cert = check_alpha_fair(prob, sol.rates, 1000, rng, 1e-6 * 4);
  CHECK(cert.pass);
  CHECK(cert.worst_margin <= 1e-6 * 4);
  // Identical allocation: the fairness sum is exactly zero.
  double sum = 0.0;
  for (int v = 0; v < 4; ++v)
    sum += (sol.rates.rates[v] - sol.rates.rates[v]) /
           std::pow(sol.rates.rates[v], prob.alpha);
  CHECK(sum == 0.0);
}

TEST_CASE("alpha=0 certificate: the throughput maximizer dominates all samples") {
  // All-in-range with alpha=0: any allocation filling the capacity maximizes
  // the throughput; the even split is one such maximizer.
  auto prob = all_in_range(100, 0.0);
  RateAllocation cand;
  cand.rates.assign(100, 7.8125);
  Rng rng(5);
  const auto cert = check_alpha_fair(prob, cand, 500, rng, 1e-9);
  CHECK(cert.pass);
  CHECK(cert.worst_margin <= 1e-9);
}

TEST_CASE("alpha=0 best effort: averaged recovery is feasible and near-optimal") {
  // Linear utilities make the problem an LP; the solver returns the averaged
  // subgradient recovery. Optimal throughput on this instance is C = 20.
  auto prob = all_in_range(4, 0.0);
  prob.capacity_C = 20.0;
  const auto sol = solve_num(prob, 1e-9, 4000);
  double total = 0.0;
  for (double r : sol.rates.rates) {
    CHECK(r >= prob.r_min[0] - 1e-9);
    CHECK(r <= prob.r_max[0] + 1e-9);
    total += r;
  }
  CHECK(total <= prob.capacity_C + 1e-9);
  CHECK(total >= 0.98 * prob.capacity_C);
}

TEST_CASE("infeasible problems are rejected") {
  auto prob = chain_problem(1.0, 2.0, 10.0);  // 3 * 2 > 3 in the middle
  CHECK_FALSE(prob.feasible());
  CHECK_THROWS_AS(solve_num(prob), std::invalid_argument);
}

TEST_CASE("uncongested problems short-circuit to the box maximum") {
  NumProblem p;
  p.neighbor_sets = {{0, 1}, {0, 1}};
  p.capacity_C = 100.0;
  p.alpha = 1.0;
  p.weights.assign(2, 1.0);
  p.r_min.assign(2, 1.0);
  p.r_max.assign(2, 10.0);
  const auto sol = solve_num(p);
  CHECK(sol.converged);
  CHECK(sol.iterations == 0);
  CHECK(sol.rates.rates == std::vector<double>{10.0, 10.0});
  CHECK(sol.kkt_residual == 0.0);
}

TEST_CASE("dual iteration: primal objective improves once feasible on a symmetric instance") {
  // Plain projected gradient with diminishing step on the 10-vehicle
  // all-in-range instance; once the recovered rates become feasible the
  // objective of each recovery must not decrease (up to numerical slack).
  const int n = 10;
  NumProblem prob = all_in_range(n);
  prob.capacity_C = 50.0;
  prob.r_max.assign(n, 10.0);
  // High initial prices put the first recovery on the feasible side; the
  // iteration then approaches the constraint from below.
  std::vector<double> pi(n, 1.0);
  double prev_obj = -1e300;
  bool was_feasible = false;
  const double beta0 = 1e-4;
  for (int k = 1; k <= 4000; ++k) {
    double sum_pi = 0.0;
    for (double x : pi) sum_pi += x;
    std::vector<double> r(n);
    for (int v = 0; v < n; ++v)
      r[v] = std::clamp(1.0 / sum_pi, prob.r_min[v], prob.r_max[v]);
    double load = 0.0;
    for (double x : r) load += x;
    const bool feasible = load <= prob.capacity_C + 1e-12;
    double obj = 0.0;
    for (double x : r) obj += utility(x, prob.alpha, 1.0);
    if (feasible) {
      if (was_feasible) CHECK(obj >= prev_obj - 1e-7);
      was_feasible = true;
      prev_obj = obj;
    }
    const double step = beta0 / std::sqrt(static_cast<double>(k));
    for (int v = 0; v < n; ++v)
      pi[v] = std::max(0.0, pi[v] - step * (prob.capacity_C - load));
  }
  CHECK(was_feasible);
}
