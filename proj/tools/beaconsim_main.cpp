// Command-line front end: runs scenarios, solves the centralized allocation,
// compares controllers and sweeps parameters, writing CSV/JSON artifacts.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "beaconsim/config.hpp"
#include "beaconsim/metrics.hpp"
#include "beaconsim/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beaconsim;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNoConvergence = 4;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json manifest_for(const Config& cfg) {
  json m;
  m["artifact_version"] = kVersion;
  m["resolved_config"] = cfg.to_document();
  m["seed"] = cfg.run.seed;
  return m;
}

std::vector<Vec2> scenario_positions(const Config& cfg) {
  const Scenario sc = build_scenario(cfg.run.scenario, cfg.params);
  std::vector<Vec2> pos;
  pos.reserve(sc.initial.size());
  for (const auto& v : sc.initial) pos.push_back(v.position);
  return pos;
}

int cmd_run(const Config& cfg, const fs::path& outdir, bool want_csv, bool want_json) {
  const auto results = replicate(cfg.run, cfg.params, cfg.run.replications);
  for (int i = 0; i < static_cast<int>(results.size()); ++i) {
    fs::path dir = outdir;
    if (results.size() > 1) {
      dir = outdir / ("rep" + std::to_string(i));
      fs::create_directories(dir);
    }
    if (want_csv) write_file(dir / "steps.csv", steps_csv(results[i]));
    const MetricReport rep = compute_metrics(results[i], cfg.params);
    if (want_json) write_file(dir / "metrics.json", rep.to_json().dump(2));
    if (want_csv) write_file(dir / "metrics.csv", rep.to_csv());
  }
  write_file(outdir / "manifest.json", manifest_for(cfg).dump(2));
  std::cout << "wrote " << results.size() << " run(s) to " << outdir << "\n";
  return 0;
}

int cmd_oracle(const Config& cfg, const fs::path& outdir, double tol) {
  const Scenario sc = build_scenario(cfg.run.scenario, cfg.params);
  std::vector<Vec2> pos;
  for (const auto& v : sc.initial) pos.push_back(v.position);
  const auto model = ChannelModel::from_params(cfg.params);
  const NeighborGraph graph = build_neighbor_graph(pos, model, cfg.params);
  const NumProblem prob = NumProblem::from_graph(graph, cfg.params, sc.initial);
  OracleSolution sol;
  try {
    sol = solve_num(prob, tol);
  } catch (const std::invalid_argument& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }
  std::vector<double> xs;
  for (const auto& v : sc.initial) xs.push_back(v.position.x);
  write_file(outdir / "oracle.csv", oracle_csv(xs, sol.rates.rates, sol.prices));
  json m = manifest_for(cfg);
  m["kkt_residual"] = sol.kkt_residual;
  m["iterations"] = sol.iterations;
  m["converged"] = sol.converged;
  write_file(outdir / "manifest.json", m.dump(2));
  std::cout << "oracle: residual=" << sol.kkt_residual << " iterations=" << sol.iterations
            << (sol.converged ? "" : " (NOT CONVERGED)") << "\n";
  return sol.converged ? 0 : kExitNoConvergence;
}

int cmd_compare(const Config& cfg, const std::vector<std::string>& controllers,
                const fs::path& outdir, bool with_oracle) {
  if (controllers.size() < 2) {
    std::cerr << "compare needs at least two controllers\n";
    return kExitConfig;
  }
  std::optional<RateAllocation> oracle;
  if (with_oracle) {
    const auto pos = scenario_positions(cfg);
    const auto model = ChannelModel::from_params(cfg.params);
    const auto graph = build_neighbor_graph(pos, model, cfg.params);
    try {
      oracle = solve_num(NumProblem::from_graph(graph, cfg.params), 1e-8).rates;
    } catch (const std::invalid_argument& e) {
      std::cerr << "infeasible: " << e.what() << "\n";
      return kExitInfeasible;
    }
  }

  json summary = json::array();
  std::ostringstream joined;
  joined << "controller,step,time,mean_rate,min_rate,max_rate,fraction_below_mbl,"
            "rmse_vs_oracle\n";
  for (const auto& name : controllers) {
    Config c = cfg;
    c.run.controller = controller_from_string(name);
    const RunResult result = run(c.run, c.params);
    const MetricReport rep =
        compute_metrics(result, c.params, oracle ? &*oracle : nullptr);
    for (const auto& a : rep.per_step) {
      joined << name << ',' << a.step << ',' << a.time << ',' << a.mean_rate << ','
             << a.min_rate << ',' << a.max_rate << ',' << a.fraction_below_mbl << ',';
      if (a.rmse_vs_oracle) joined << *a.rmse_vs_oracle;
      joined << '\n';
    }
    // Convergence summary over spawned vehicles when the scenario grows
    // (the queue metric); otherwise over every vehicle that moved.
    const bool grew = result.final_vehicle_count > result.initial_vehicle_count;
    const int first = grew ? result.initial_vehicle_count : 0;
    double conv_sum = 0.0;
    int conv_n = 0;
    for (int v = first; v < static_cast<int>(rep.convergence_times.size()); ++v) {
      const auto& ct = rep.convergence_times[v];
      if (ct && *ct > 0.0) {
        conv_sum += *ct;
        ++conv_n;
      }
    }
    const auto& last = rep.per_step.back();
    json row{{"controller", name},
             {"final_mean_rate", last.mean_rate},
             {"final_fraction_below_mbl", last.fraction_below_mbl},
             {"mean_convergence_time", conv_n ? json(conv_sum / conv_n) : json()}};
    if (last.rmse_vs_oracle) row["final_rmse_vs_oracle"] = *last.rmse_vs_oracle;
    summary.push_back(row);
    std::cout << row.dump() << "\n";
  }
  write_file(outdir / "compare.csv", joined.str());
  write_file(outdir / "summary.json", summary.dump(2));
  write_file(outdir / "manifest.json", manifest_for(cfg).dump(2));
  return 0;
}

int cmd_sweep(const Config& base, const std::vector<std::string>& grid_specs,
              const fs::path& outdir, int cap) {
  // Each --set is key=v1,v2,...; the sweep is their cartesian product.
  struct Axis {
    std::string key;
    std::vector<std::string> values;
  };
  std::vector<Axis> axes;
  for (const auto& g : grid_specs) {
    const auto eq = g.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--set must look like key=v1,v2,...\n";
      return kExitConfig;
    }
    Axis ax;
    ax.key = g.substr(0, eq);
    std::stringstream ss(g.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) ax.values.push_back(item);
    if (ax.values.empty()) {
      std::cerr << "empty sweep grid for " << ax.key << "\n";
      return kExitConfig;
    }
    axes.push_back(ax);
  }
  if (axes.empty()) {
    std::cerr << "empty sweep grid\n";
    return kExitConfig;
  }
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.values.size();
  if (total > static_cast<std::size_t>(cap)) {
    std::cerr << "sweep grid of " << total << " runs exceeds cap " << cap << "\n";
    return kExitConfig;
  }

  std::ostringstream csv;
  csv << "run_id";
  for (const auto& ax : axes) csv << ',' << ax.key;
  csv << ",final_mean_rate,final_min_rate,final_max_rate,final_spread,"
         "final_fraction_below_mbl\n";

  std::vector<std::size_t> idx(axes.size(), 0);
  const json base_doc = base.to_document();
  for (std::size_t runi = 0; runi < total; ++runi) {
    json doc = base_doc;
    std::vector<std::string> applied;
    for (std::size_t a = 0; a < axes.size(); ++a)
      apply_override(doc, axes[a].key + "=" + axes[a].values[idx[a]]);
    const Config cfg = Config::from_document(doc);
    const RunResult result = run(cfg.run, cfg.params);
    const MetricReport rep = compute_metrics(result, cfg.params);
    const auto& last = rep.per_step.back();
    csv << runi;
    for (std::size_t a = 0; a < axes.size(); ++a) csv << ',' << axes[a].values[idx[a]];
    csv << ',' << last.mean_rate << ',' << last.min_rate << ',' << last.max_rate << ','
        << (last.max_rate - last.min_rate) << ',' << last.fraction_below_mbl << '\n';
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  write_file(outdir / "sweep.csv", csv.str());
  write_file(outdir / "manifest.json", manifest_for(base).dump(2));
  std::cout << "swept " << total << " runs -> " << (outdir / "sweep.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beaconing-rate congestion control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string outdir_s = "out";
  std::vector<std::string> formats = {"csv", "json"};
  double tol = 1e-8;
  std::vector<std::string> controllers;
  std::vector<std::string> grid;
  int cap = 256;
  bool with_oracle = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--override", overrides, "key.path=value overrides");
    sub->add_option("--out", outdir_s, "output directory");
    sub->add_option("--formats", formats, "output formats (csv, json)");
  };

  CLI::App* s_run = app.add_subcommand("run", "simulate one configuration");
  add_common(s_run);
  CLI::App* s_oracle = app.add_subcommand("oracle", "solve the centralized allocation");
  add_common(s_oracle);
  s_oracle->add_option("--tol", tol, "KKT residual tolerance");
  CLI::App* s_compare = app.add_subcommand("compare", "run several controllers");
  add_common(s_compare);
  s_compare->add_option("--controllers", controllers, "controllers to compare")
      ->required();
  s_compare->add_flag("--oracle", with_oracle, "include rmse against the oracle");
  CLI::App* s_sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
  add_common(s_sweep);
  s_sweep->add_option("--set", grid, "key.path=v1,v2,... sweep axis")->required();
  s_sweep->add_option("--cap", cap, "maximum number of runs");

  CLI11_PARSE(app, argc, argv);

  Config cfg;
  try {
    cfg = load_config(config_path, overrides);
    const ValidationReport rep = validate_params(cfg.params);
    if (!rep.ok()) {
      for (const auto& e : rep.errors) std::cerr << "config error: " << e << "\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  fs::path outdir(outdir_s);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  const bool want_csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
  const bool want_json =
      std::find(formats.begin(), formats.end(), "json") != formats.end();

  try {
    if (s_run->parsed()) return cmd_run(cfg, outdir, want_csv, want_json);
    if (s_oracle->parsed()) return cmd_oracle(cfg, outdir, tol);
    if (s_compare->parsed()) return cmd_compare(cfg, controllers, outdir, with_oracle);
    if (s_sweep->parsed()) return cmd_sweep(cfg, grid, outdir, cap);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
