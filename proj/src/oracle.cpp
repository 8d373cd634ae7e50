#include "beaconsim/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace beaconsim {

bool NumProblem::feasible() const {
  for (std::size_t v = 0; v < size(); ++v) {
    double load = 0.0;
    for (int u : neighbor_sets[v]) load += r_min[u];
    if (load > capacity_C + 1e-9) return false;
  }
  return true;
}

NumProblem NumProblem::from_graph(const NeighborGraph& g, const SimParams& p) {
  NumProblem prob;
  prob.neighbor_sets = g.neighbor_sets;
  prob.capacity_C = p.capacity_C();
  prob.alpha = p.alpha;
  prob.weights.assign(g.size(), p.weights_default);
  prob.r_min.assign(g.size(), p.r_min);
  prob.r_max.assign(g.size(), p.r_max);
  return prob;
}

NumProblem NumProblem::from_graph(const NeighborGraph& g, const SimParams& p,
                                  std::span<const VehicleState> states) {
  NumProblem prob = from_graph(g, p);
  for (std::size_t i = 0; i < states.size() && i < g.size(); ++i) {
    prob.weights[i] = states[i].weight;
    prob.r_min[i] = states[i].r_min;
    prob.r_max[i] = states[i].r_max;
  }
  return prob;
}

double utility(double r, double alpha, double w) {
  if (alpha == 0.0) return w * r;
  if (r <= 0.0) throw std::invalid_argument("utility: r must be > 0 for alpha >= 1");
  if (alpha == 1.0) return w * std::log(r);
  return w * std::pow(r, 1.0 - alpha) / (1.0 - alpha);
}

namespace {

// Rate that maximizes U(r) - r*s over the box, for price sum s.
double rate_for_price_sum(double s, double alpha, double w, double lo, double hi) {
  if (s <= 0.0) return hi;
  if (alpha == 0.0) {
    // Linear utility: bang-bang in the sign of w - s.
    if (s < w) return hi;
    if (s > w) return lo;
    return 0.5 * (lo + hi);
  }
  const double r = std::pow(w / s, 1.0 / alpha);
  return std::clamp(r, lo, hi);
}

struct Workspace {
  const NumProblem& prob;
  std::vector<double> price_sum;  // s_v = sum of prices over n(v)
  std::vector<double> load;      // (A r)_v
  std::vector<double> rates;

  explicit Workspace(const NumProblem& p)
      : prob(p), price_sum(p.size()), load(p.size()), rates(p.size()) {}

  void compute(std::span<const double> pi) {
    const std::size_t n = prob.size();
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (int u : prob.neighbor_sets[v]) s += pi[u];
      price_sum[v] = s;
    }
    for (std::size_t v = 0; v < n; ++v)
      rates[v] = rate_for_price_sum(price_sum[v], prob.alpha, prob.weights[v],
                                    prob.r_min[v], prob.r_max[v]);
    for (std::size_t v = 0; v < n; ++v) {
      double l = 0.0;
      for (int u : prob.neighbor_sets[v]) l += rates[u];
      load[v] = l;
    }
  }

  double dual_value() const {
    double g = 0.0;
    for (std::size_t v = 0; v < prob.size(); ++v)
      g += utility(rates[v], prob.alpha, prob.weights[v]) - rates[v] * price_sum[v];
    return g;  // + C * sum(pi), added by caller
  }
};

}  // namespace

double kkt_residual(const NumProblem& prob, std::span<const double> rates,
                    std::span<const double> prices) {
  const std::size_t n = prob.size();
  double res = 0.0;
  std::vector<double> s(n, 0.0), load(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (int u : prob.neighbor_sets[v]) {
      s[v] += prices[u];
      load[v] += rates[u];
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    res = std::max(res, std::max(0.0, load[v] - prob.capacity_C));
    res = std::max(res, std::abs(prices[v] * (prob.capacity_C - load[v])));
    const double star = rate_for_price_sum(s[v], prob.alpha, prob.weights[v],
                                           prob.r_min[v], prob.r_max[v]);
    res = std::max(res, std::abs(rates[v] - star));
  }
  return res;
}

OracleSolution solve_num(const NumProblem& prob, double tol, int max_iter) {
  const std::size_t n = prob.size();
  if (n == 0) return {};
  if (!prob.feasible()) throw std::invalid_argument("solve_num: infeasible problem");

  OracleSolution sol;
  sol.prices.assign(n, 0.0);
  sol.rates.rates.assign(n, 0.0);

  // Uncongested everywhere: the box maximum is optimal with zero prices.
  {
    bool uncongested = true;
    for (std::size_t v = 0; v < n && uncongested; ++v) {
      double load = 0.0;
      for (int u : prob.neighbor_sets[v]) load += prob.r_max[u];
      uncongested = load <= prob.capacity_C + 1e-12;
    }
    if (uncongested) {
      sol.rates.rates = prob.r_max;
      sol.kkt_residual = 0.0;
      sol.converged = true;
      return sol;
    }
  }

  Workspace ws(prob);
  std::vector<double> pi(n), grad(n), pi_new(n), grad_new(n);

  // Scale-aware start: a uniform price profile whose induced rates roughly
  // fill the average neighborhood to capacity.
  double mean_nbrs = 0.0;
  for (std::size_t v = 0; v < n; ++v) mean_nbrs += prob.neighbor_sets[v].size();
  mean_nbrs = std::max(1.0, mean_nbrs / n);
  const double pi0 =
      std::pow(mean_nbrs / prob.capacity_C, std::max(prob.alpha, 1e-3)) / mean_nbrs;
  pi.assign(n, pi0);

  auto eval = [&](std::span<const double> p, std::vector<double>& g) {
    ws.compute(p);
    double sum_pi = 0.0;
    for (double x : p) sum_pi += x;
    for (std::size_t v = 0; v < n; ++v) g[v] = prob.capacity_C - ws.load[v];
    return ws.dual_value() + prob.capacity_C * sum_pi;
  };

  auto newton_polish = [&](std::vector<double>& p, double& res) {
    for (int pass = 0; pass < 50; ++pass) {
      ws.compute(p);
      std::vector<int> active;
      for (std::size_t v = 0; v < n; ++v)
        if (p[v] > 0.0) active.push_back(static_cast<int>(v));
      if (active.empty()) return;
      const int m = static_cast<int>(active.size());
      // dr/ds on vehicles away from their box bounds.
      std::vector<double> drds(n, 0.0);
      for (std::size_t v = 0; v < n; ++v) {
        const double r = ws.rates[v];
        if (r > prob.r_min[v] + 1e-13 && r < prob.r_max[v] - 1e-13 &&
            ws.price_sum[v] > 0.0)
          drds[v] = r / (prob.alpha * ws.price_sum[v]);
      }
      // J[a][b] = sum_v A[active_a, v] * drds[v] * A[v, active_b]
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
      Eigen::VectorXd h(m);
      std::vector<int> apos(n, -1);
      for (int a = 0; a < m; ++a) apos[active[a]] = a;
      for (int a = 0; a < m; ++a) {
        const int t = active[a];
        h(a) = prob.capacity_C - ws.load[t];
        for (int v : prob.neighbor_sets[t]) {
          if (drds[v] == 0.0) continue;
          for (int u : prob.neighbor_sets[v]) {
            const int b = apos[u];
            if (b >= 0) J(a, b) += drds[v];
          }
        }
      }
      J.diagonal().array() += 1e-12;
      Eigen::VectorXd step = J.ldlt().solve(h);
      std::vector<double> p2 = p;
      for (int a = 0; a < m; ++a)
        p2[active[a]] = std::max(0.0, p[active[a]] - step(a));
      ws.compute(p2);
      const double res2 = kkt_residual(prob, ws.rates, p2);
      if (res2 < res) {
        p = p2;
        res = res2;
      } else {
        return;
      }
      if (res < tol) return;
    }
  };

  double f = eval(pi, grad);
  double step = 1.0 / (std::abs(*std::max_element(
                           grad.begin(), grad.end(),
                           [](double a, double b) { return std::abs(a) < std::abs(b); })) +
                       1.0);
  std::deque<double> recent{f};
  ws.compute(pi);
  double res = kkt_residual(prob, ws.rates, pi);
  int it = 0;

  // alpha = 0 turns the primal into a linear program: the dual is piecewise
  // linear and the recoveries bang-bang, so run a subgradient scheme and
  // return the running average of the recoveries instead.
  const bool smooth = prob.alpha > 0.0;
  std::vector<double> avg_rates(n, 0.0);
  long long avg_count = 0;

  while (it < max_iter && res > tol) {
    ++it;
    // Projected step with nonmonotone backtracking.
    double fmax = *std::max_element(recent.begin(), recent.end());
    double f_new = 0.0;
    int bt = 0;
    for (;;) {
      for (std::size_t v = 0; v < n; ++v)
        pi_new[v] = std::max(0.0, pi[v] - step * grad[v]);
      f_new = eval(pi_new, grad_new);
      if (f_new <= fmax + 1e-14 * std::abs(fmax) || bt >= 40) break;
      step *= 0.5;
      ++bt;
    }
    // Barzilai-Borwein step for the next round.
    double sy = 0.0, ss = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double dp = pi_new[v] - pi[v];
      sy += dp * (grad_new[v] - grad[v]);
      ss += dp * dp;
    }
    step = sy > 1e-300 ? std::clamp(ss / sy, 1e-12, 1e12) : step * 2.0;
    pi.swap(pi_new);
    grad.swap(grad_new);
    recent.push_back(f_new);
    if (recent.size() > 10) recent.pop_front();

    ws.compute(pi);
    res = kkt_residual(prob, ws.rates, pi);
    if (!smooth) {
      for (std::size_t v = 0; v < n; ++v) avg_rates[v] += ws.rates[v];
      ++avg_count;
      step = 1.0 / (prob.capacity_C * std::sqrt(static_cast<double>(it)));
    }
    if (smooth && (res < 1e-5 * prob.capacity_C || it % 100 == 0))
      newton_polish(pi, res);
  }
  if (smooth && res > tol) newton_polish(pi, res);

  ws.compute(pi);
  sol.rates.rates = ws.rates;
  if (!smooth && avg_count > 0) {
    // Average the bang-bang recoveries and pull the result inside the
    // feasible region.
    for (std::size_t v = 0; v < n; ++v) avg_rates[v] /= avg_count;
    double lam = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      double load = 0.0, base = 0.0;
      for (int u : prob.neighbor_sets[v]) {
        load += avg_rates[u];
        base += prob.r_min[u];
      }
      if (load > prob.capacity_C && load > base)
        lam = std::min(lam, (prob.capacity_C - base) / (load - base));
    }
    lam = std::clamp(lam, 0.0, 1.0);
    for (std::size_t v = 0; v < n; ++v)
      sol.rates.rates[v] = prob.r_min[v] + lam * (avg_rates[v] - prob.r_min[v]);
    res = kkt_residual(prob, sol.rates.rates, pi);
  }
  sol.prices = pi;
  sol.kkt_residual = res;
  sol.iterations = it;
  sol.converged = res <= tol;
  return sol;
}

FairnessCertificate check_alpha_fair(const NumProblem& prob,
                                     const RateAllocation& candidate, int trials,
                                     Rng& rng, double eps_total) {
  const std::size_t n = prob.size();
  if (candidate.rates.size() != n)
    throw std::invalid_argument("check_alpha_fair: candidate size mismatch");
  // The candidate itself must be feasible.
  for (std::size_t v = 0; v < n; ++v) {
    double load = 0.0;
    for (int u : prob.neighbor_sets[v]) load += candidate.rates[u];
    if (load > prob.capacity_C + 1e-6)
      throw std::invalid_argument("check_alpha_fair: candidate infeasible");
  }

  FairnessCertificate cert;
  cert.trials = trials;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<double> r(n);
  std::vector<double> base_load(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (int u : prob.neighbor_sets[v]) base_load[v] += prob.r_min[u];

  for (int t = 0; t < trials; ++t) {
    for (std::size_t v = 0; v < n; ++v)
      r[v] = rng.uniform(prob.r_min[v], prob.r_max[v]);
    // Pull toward the r_min anchor just enough to satisfy every constraint.
    double lam = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      double load = 0.0;
      for (int u : prob.neighbor_sets[v]) load += r[u];
      if (load > prob.capacity_C) {
        const double denom = load - base_load[v];
        if (denom > 0.0)
          lam = std::min(lam, (prob.capacity_C - base_load[v]) / denom);
      }
    }
    lam = std::clamp(lam, 0.0, 1.0);
    double margin = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double rv = prob.r_min[v] + lam * (r[v] - prob.r_min[v]);
      margin += prob.weights[v] * (rv - candidate.rates[v]) /
                std::pow(candidate.rates[v], prob.alpha);
    }
    cert.worst_margin = std::max(cert.worst_margin, margin);
  }
  cert.pass = cert.worst_margin <= eps_total;
  return cert;
}

}  // namespace beaconsim
