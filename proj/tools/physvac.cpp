// Batch front-end for the gas-vacuum decay study: reference-flow tables,
// corrector paths, perturbation runs, rate reports, the self-test suite,
// and parameter sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 self-test failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "physvac/acceptance.hpp"
#include "physvac/config.hpp"
#include "physvac/diagnostics.hpp"
#include "physvac/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace physvac;

namespace {

RunConfig load_config(const std::string& config_path,
                      const std::string& out_override, long seed_override,
                      bool seed_set) {
  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw config_error("cannot open config file " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_config(ss.str());
  }
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_set) cfg.seed = seed_override;
  validate(cfg);
  return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path out(cfg.output_dir);
  fs::create_directories(out);
  std::ofstream echo(out / "config.echo");
  echo << config_echo(cfg);
  return out;
}

json constants_json(const BarenblattParams& p) {
  return {{"gamma", p.gamma}, {"mass", p.mass},   {"A", p.A},
          {"B", p.B},         {"alpha", p.alpha}, {"ell", p.ell},
          {"edge_radius", std::sqrt(p.A / p.B)}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

int cmd_barenblatt(const RunConfig& cfg) {
  const auto out = prepare_out(cfg);
  const auto p = derive_constants(cfg.gamma, cfg.mass);
  CsvWriter csv(out / "barenblatt.csv", {"r", "t", "rho", "u"});
  double worst_mass = 0.0;
  for (double t : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    const double R = boundary_radius(p, t);
    for (int i = 0; i <= 64; ++i) {
      const double r = R * i / 64;
      csv.row({r, t, density(p, r, t), velocity(p, r, t)});
    }
    worst_mass = std::max(
        worst_mass, std::fabs(total_mass(p, t).value - p.mass) / p.mass);
  }
  json manifest = {{"command", "barenblatt"},
                   {"constants", constants_json(p)},
                   {"max_relative_mass_error", worst_mass},
                   {"profile_moment", profile_moment(p.gamma)},
                   {"files", {"barenblatt.csv"}}};
  write_json(out / "manifest.json", manifest);
  std::cout << "A = " << p.A << ", B = " << p.B
            << ", sqrt(A/B) = " << std::sqrt(p.A / p.B)
            << ", mass check " << worst_mass << "\n";
  return 0;
}

int cmd_corrector(const RunConfig& cfg) {
  const auto out = prepare_out(cfg);
  const auto path =
      CorrectorPath::solve(cfg.gamma, std::max(cfg.horizon, 100.0),
                           cfg.ode_tol);
  CsvWriter csv(out / "corrector.csv", {"t", "h", "h_t", "eta_r_tilde"});
  for (const auto& s : path.steps())
    csv.row({s.t, s.h, s.ht, path.eta_r(s.t)});
  const auto decay = decay_report(path);
  const auto sig = phase_signature(path);
  double volterra_max = 0.0;
  for (int k = 0; k < 20; ++k)
    volterra_max = std::max(
        volterra_max,
        volterra_residual(path, 0.1 * std::pow(10.0 * path.horizon(),
                                               k / 19.0)));
  json manifest = {
      {"command", "corrector"},
      {"gamma", cfg.gamma},
      {"horizon", path.horizon()},
      {"ode_tol", cfg.ode_tol},
      {"steps", path.steps().size()},
      {"decay",
       {{"sup_h_quotient", decay.sup_h_quotient},
        {"sup_ht_quotient", decay.sup_ht_quotient},
        {"sup_h_last_decade", decay.sup_h_last_decade},
        {"sup_ht_last_decade", decay.sup_ht_last_decade},
        {"tail_stable", decay.tail_stable}}},
      {"phase", {{"ht_sign_changes", sig.ht_sign_changes},
                 {"h_interior_maxima", sig.h_interior_maxima}}},
      {"volterra_residual_max", volterra_max},
      {"files", {"corrector.csv"}}};
  write_json(out / "manifest.json", manifest);
  std::cout << "corrector: " << path.steps().size() << " steps, sup h-quot "
            << decay.sup_h_quotient << ", tail "
            << (decay.tail_stable ? "stable" : "growing") << "\n";
  return 0;
}

json report_json(const DecayRateReport& rep) {
  auto entry = [](const RateEntry& e) {
    return json{{"name", e.name},
                {"fitted_pure_power", e.fit_pure.exponent},
                {"fitted_power_times_log", e.fit_log.exponent},
                {"r_squared_pure", e.fit_pure.r_squared},
                {"r_squared_log", e.fit_log.r_squared},
                {"base_exponent", e.base_exponent},
                {"theoretical_exponent", e.theoretical},
                {"relative_deviation", e.rel_deviation},
                {"regime_corrected", e.regime_corrected}};
  };
  return {{"gamma", rep.gamma},
          {"fit_window", {rep.t_lo, rep.t_hi}},
          {"sqrt_E0", rep.sqrt_E0},
          {"regime", rep.regime == DecayRegime::log_dominant ? "ln-dominant"
                                                             : "sqrt(E0)"},
          {"boundary", entry(rep.boundary)},
          {"velocity", entry(rep.velocity)},
          {"density", entry(rep.density)},
          {"vacuum_bracket",
           {{"norm_min", rep.bracket_norm_min},
            {"norm_max", rep.bracket_norm_max},
            {"ratio", rep.bracket_ratio}}},
          {"criteria",
           {{"boundary_rate_within_5pct", rep.boundary.rel_deviation < 0.05},
            {"velocity_rate_within_15pct", rep.velocity.rel_deviation < 0.15},
            {"density_rate_within_15pct", rep.density.rel_deviation < 0.15},
            {"bracket_ratio_le_10", rep.bracket_ratio <= 10.0}}}};
}

struct SimResult {
  json manifest;
  bool energy_bounded = true;
};

SimResult run_simulation(const RunConfig& cfg) {
  const auto out = prepare_out(cfg);
  const auto p = derive_constants(cfg.gamma, cfg.mass);
  const auto path = CorrectorPath::solve(cfg.gamma, cfg.horizon, cfg.ode_tol);
  const auto grid = build_grid(p, cfg.n_cells, cfg.grading);
  PerturbationSolver solver(p, path, grid, cfg.cfl);
  InitialDataSpec init;
  init.amplitude = cfg.epsilon;
  init.shape = cfg.shape;
  init.velocity_amplitude = cfg.velocity_amplitude;
  init.shape_t = cfg.shape_t;
  const auto traj = solver.run(make_initial_data(p, init, grid),
                               cfg.horizon, {.count = cfg.sample_count});

  CsvWriter tcsv(out / "trajectory.csv",
                 {"t", "node", "r", "zeta", "zeta_t", "rho", "u"});
  for (const auto& s : traj.samples) {
    const auto snap = solver.reconstruct({s.t, s.zeta, s.zeta_t});
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
      tcsv.row({s.t, static_cast<double>(i), grid.r[i], s.zeta[i],
                s.zeta_t[i], snap.rho[i], snap.u[i]});
  }

  const auto series = decay_series(traj, p, path, grid);
  CsvWriter ecsv(out / "energy.csv",
                 {"t", "E_0", "E_1", "E_2", "E_total", "sup_zeta",
                  "sup_zeta_t", "sup_zeta_tt", "sup_zeta_r", "sup_zeta_tr",
                  "apriori_sum", "sup_dvel_over_r", "sup_drho_sigma",
                  "slope_min", "slope_max", "slope_norm_min",
                  "slope_norm_max", "R"});
  double E0 = 0.0, Emax_ratio = 0.0, apriori_max = 0.0, sup_zeta_max = 0.0;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    PerturbationState st{s.t, s.zeta, s.zeta_t};
    const auto en = energy_levels(p, path, grid, st);
    const auto sup = sup_norm_report(p, path, grid, st);
    const auto br = vacuum_slope(p, path, grid, st);
    if (k == 0) E0 = en.E_total;
    if (E0 > 0.0) Emax_ratio = std::max(Emax_ratio, en.E_total / E0);
    apriori_max = std::max(apriori_max, sup.apriori_sum);
    for (double z : s.zeta) sup_zeta_max = std::max(sup_zeta_max, std::fabs(z));
    ecsv.row({s.t, en.E_j[0], en.E_j[1], en.E_j[2], en.E_total,
              sup.zeta_timed[0], sup.zeta_timed[1], sup.zeta_timed[2],
              sup.zeta_r_timed[0], sup.zeta_r_timed[1], sup.apriori_sum,
              series.vel_sup[k], series.dens_sup[k], br.min_abs, br.max_abs,
              br.norm_min, br.norm_max, series.R[k]});
  }

  json manifest = {
      {"command", "simulate"},
      {"constants", constants_json(p)},
      {"config",
       {{"gamma", cfg.gamma},
        {"mass", cfg.mass},
        {"n_cells", cfg.n_cells},
        {"grading",
         cfg.grading == Grading::uniform ? "uniform" : "boundary_graded"},
        {"epsilon", cfg.epsilon},
        {"horizon", cfg.horizon},
        {"ode_tol", cfg.ode_tol},
        {"cfl", cfg.cfl},
        {"sample_count", cfg.sample_count},
        {"seed", cfg.seed}}},
      {"summary",
       {{"steps", traj.summary.steps},
        {"jacobian_min", traj.summary.jacobian_min},
        {"mass_identity",
         "automatic in Lagrangian variables; max dual-route residual "
         "recorded"},
        {"mass_identity_residual_max", traj.summary.mass_residual_max},
        {"dt_min", traj.summary.dt_min},
        {"dt_max", traj.summary.dt_max},
        {"E0", E0},
        {"max_energy_ratio", Emax_ratio},
        {"apriori_sup_max", apriori_max},
        {"sup_zeta_max", sup_zeta_max}}},
      {"files", {"trajectory.csv", "energy.csv", "config.echo"}}};
  write_json(out / "manifest.json", manifest);
  return {manifest, Emax_ratio <= 10.0};
}

int cmd_simulate(const RunConfig& cfg) {
  const auto res = run_simulation(cfg);
  std::cout << "simulate: " << res.manifest["summary"]["steps"] << " steps, "
            << "jac_min " << res.manifest["summary"]["jacobian_min"] << ", "
            << "E(t)/E(0) max " << res.manifest["summary"]["max_energy_ratio"]
            << "\n";
  return 0;
}

int cmd_rates(const RunConfig& cfg) {
  const fs::path out(cfg.output_dir);
  if (!fs::exists(out / "energy.csv") || !fs::exists(out / "manifest.json"))
    throw config_error("rates: no trajectory in '" + cfg.output_dir +
                       "'; run simulate first");
  std::ifstream mf(out / "manifest.json");
  json manifest = json::parse(mf);
  const double gamma = manifest["config"]["gamma"];
  const double horizon = manifest["config"]["horizon"];
  const auto table = read_csv(out / "energy.csv");
  DecaySeries se;
  se.t = table.col("t");
  se.R = table.col("R");
  se.vel_sup = table.col("sup_dvel_over_r");
  se.dens_sup = table.col("sup_drho_sigma");
  se.slope_norm_min = table.col("slope_norm_min");
  se.slope_norm_max = table.col("slope_norm_max");
  const auto etot = table.col("E_total");
  const double E0 = etot.front();
  const auto rep =
      decay_rates_from_series(gamma, se, E0, horizon / 100.0, horizon);
  json rj = report_json(rep);
  double emax = 0.0;
  if (E0 > 0.0)
    for (double e : etot) emax = std::max(emax, e / E0);
  rj["criteria"]["energy_bounded_10x"] = emax <= 10.0;
  rj["max_energy_ratio"] = emax;
  write_json(out / "report.json", rj);
  std::cout << "rates: boundary " << rep.boundary.base_exponent
            << " (target " << rep.boundary.theoretical << "), velocity "
            << rep.velocity.base_exponent << ", density "
            << rep.density.base_exponent << ", bracket ratio "
            << rep.bracket_ratio << "\n";
  return 0;
}

int cmd_selftest(const RunConfig& cfg) {
  const auto out = prepare_out(cfg);
  const auto results = acceptance::run_all(cfg.seed);
  bool all = true;
  json jr = json::array();
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name
              << ": " << r.detail << "\n";
    jr.push_back({{"id", r.id},
                  {"name", r.name},
                  {"pass", r.pass},
                  {"detail", r.detail}});
    all = all && r.pass;
  }
  write_json(out / "selftest.json",
             {{"command", "selftest"}, {"all_pass", all}, {"criteria", jr}});
  std::cout << (all ? "selftest: all criteria pass\n"
                    : "selftest: FAILURES present\n");
  return all ? 0 : 3;
}

int cmd_sweep(const RunConfig& cfg, int jobs) {
  const auto out = prepare_out(cfg);
  const auto gammas =
      cfg.sweep_gammas.empty() ? std::vector{cfg.gamma} : cfg.sweep_gammas;
  const auto epsilons = cfg.sweep_epsilons.empty() ? std::vector{cfg.epsilon}
                                                   : cfg.sweep_epsilons;
  struct Task {
    RunConfig cfg;
    std::string label;
    int status = 0;
    std::string error;
  };
  std::vector<Task> tasks;
  for (double g : gammas)
    for (double e : epsilons) {
      RunConfig c = cfg;
      c.gamma = g;
      c.epsilon = e;
      char label[64];
      std::snprintf(label, sizeof label, "g%g_eps%g", g, e);
      c.output_dir = (out / label).string();
      tasks.push_back({c, label, 0, ""});
    }

  std::mutex mx;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mx);
        if (next >= tasks.size()) return;
        k = next++;
      }
      try {
        run_simulation(tasks[k].cfg);
        RunConfig rc = tasks[k].cfg;
        cmd_rates(rc);
      } catch (const config_error& e) {
        tasks[k].status = 1;
        tasks[k].error = e.what();
      } catch (const std::exception& e) {
        tasks[k].status = 2;
        tasks[k].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json summary = json::array();
  int status = 0;
  for (const auto& t : tasks) {
    summary.push_back({{"label", t.label},
                       {"gamma", t.cfg.gamma},
                       {"epsilon", t.cfg.epsilon},
                       {"status", t.status},
                       {"error", t.error}});
    status = std::max(status, t.status);
    std::cout << "sweep " << t.label << ": "
              << (t.status == 0 ? "ok" : "FAILED (" + t.error + ")") << "\n";
  }
  write_json(out / "sweep_summary.json",
             {{"command", "sweep"}, {"jobs", jobs}, {"runs", summary}});
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherically symmetric gas-vacuum interface study: "
               "Barenblatt reference flow, corrected Lagrangian ansatz, "
               "perturbation evolution and decay-rate verification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  long seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for property suites");
  app.add_option("--jobs", jobs, "sweep parallelism");

  auto* sc_barenblatt =
      app.add_subcommand("barenblatt", "reference-flow constants and tables");
  auto* sc_corrector =
      app.add_subcommand("corrector", "corrector path dump and decay report");
  auto* sc_simulate =
      app.add_subcommand("simulate", "perturbation run with energy series");
  auto* sc_rates =
      app.add_subcommand("rates", "decay-rate report from an existing run");
  auto* sc_selftest =
      app.add_subcommand("selftest", "full acceptance property suite");
  auto* sc_sweep =
      app.add_subcommand("sweep", "independent runs over a parameter grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg =
        load_config(config_path, out_dir, seed, seed_opt->count() > 0);
    if (sc_barenblatt->parsed()) return cmd_barenblatt(cfg);
    if (sc_corrector->parsed()) return cmd_corrector(cfg);
    if (sc_simulate->parsed()) return cmd_simulate(cfg);
    if (sc_rates->parsed()) return cmd_rates(cfg);
    if (sc_selftest->parsed()) return cmd_selftest(cfg);
    if (sc_sweep->parsed()) return cmd_sweep(cfg, jobs);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const ode::integration_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
