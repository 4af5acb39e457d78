#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qha/errors.hpp"
#include "qha/kde.hpp"
#include "qha/kostin.hpp"

#include "csv.hpp"
#include "plot.hpp"
#include "validate.hpp"
#include "version.hpp"

namespace qha::cli {

namespace {

Grid1D<double> make_grid(const ScenarioConfig& c) {
  return Grid1D<double>(c.q_min, c.q_max, c.n_points);
}

double effective_bandwidth(const ScenarioConfig& c, const Array<double>& positions,
                           const Array<double>& weights) {
  return c.bandwidth > 0 ? c.bandwidth : silverman_bandwidth(positions, weights);
}

PhaseSpaceEnsemble<double> make_phase_ensemble(const ScenarioConfig& c,
                                               const WaveFunction<double>& psi0) {
  return init_phase_space(decompose(psi0), c.size);
}

}  // namespace

WaveFunction<double> make_initial_state(const ScenarioConfig& c, const Grid1D<double>& grid) {
  if (c.initial == "gaussian") return gaussian_packet(grid, c.center, c.width, c.momentum);
  return coherent_state(grid, c.omega, c.q0, c.p0, 0.0);
}

PotentialSpec<double> make_potential(const ScenarioConfig& c) {
  PotentialSpec<double> v = c.potential == "harmonic" ? PotentialSpec<double>::harmonic(c.omega)
                                                      : PotentialSpec<double>::free();
  if (c.forcing == "sinusoidal")
    v.set_forcing(ForcingSpec<double>::sinusoidal(c.forcing_amplitude, c.forcing_frequency,
                                                  c.forcing_phase));
  else if (c.forcing == "kicks")
    v.set_forcing(ForcingSpec<double>::seeded_kicks(c.kick_variance, c.kick_interval, c.seed));
  return v;
}

SyntheticQhaRun run_synthetic_qha(const Grid1D<double>& grid, double omega, double q0, double p0,
                                  double dt, int n_steps, Eigen::Index n_trajectories,
                                  int measure_every, int reference_refine) {
  if (measure_every < 1) measure_every = 1;
  if (reference_refine < 1) reference_refine = 1;
  const auto v = PotentialSpec<double>::harmonic(omega);
  const Grid1D<double> fine(grid.q_min(), grid.q_max(),
                            (grid.size() - 1) * reference_refine + 1);
  WaveFunction<double> psi = coherent_state(fine, omega, q0, p0, 0.0);

  const auto sample_down = [&](const WaveFunction<double>& f) {
    ComplexArray<double> values(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      values[i] = f.values()[i * reference_refine];
    WaveFunction<double> out(grid, std::move(values));
    out.normalize();
    return out;
  };

  const auto fields0 = decompose(sample_down(psi));
  SyntheticQhaRun run{.bohm = init_trajectories(fields0, n_trajectories),
                      .newton = init_trajectories(fields0, n_trajectories),
                      .psi_final = sample_down(psi)};

  for (int n = 0; n < n_steps; ++n) {
    psi = cn_step(psi, v, dt / 2, {}, double(n) * dt);
    const auto fields_mid = decompose(sample_down(psi));
    RealField<double> density_mid(grid, fields_mid.density);
    run.newton = newtonian_step(run.newton, build_force_field(v, density_mid), dt);
    psi = cn_step(psi, v, dt / 2, {}, double(n) * dt + dt / 2);
    const auto fields_end = decompose(sample_down(psi));
    run.bohm = bohmian_advect_step(run.bohm, fields_end, dt);

    if ((n + 1) % measure_every == 0 || n + 1 == n_steps) {
      const double t = double(n + 1) * dt;
      const double resid = wave_particle_residual(run.newton, fields_end);
      run.times.push_back(t);
      run.residual.push_back(resid);
      run.method_gap.push_back((run.bohm.positions - run.newton.positions).abs().maxCoeff());
      if (n + 1 <= n_steps / 2)
        run.residual_max_first_half = std::max(run.residual_max_first_half, resid);
      else
        run.residual_max_second_half = std::max(run.residual_max_second_half, resid);
    }
  }

  run.psi_final = sample_down(psi);
  const double h = silverman_bandwidth(run.bohm.positions, run.bohm.weights);
  const auto lagrangian = density_from_trajectories(run.bohm, grid, h);
  run.density_l1_final =
      trapezoid(grid, (lagrangian.values - run.psi_final.density()).abs().eval());
  return run;
}

namespace {

void write_state_snapshots(CsvWriter& writer, const EvolutionResult<double>& result) {
  for (std::size_t k = 0; k < result.states.size(); ++k) {
    const auto& psi = result.states[k];
    for (Eigen::Index i = 0; i < psi.grid().size(); ++i)
      writer.write_row({result.times[k], psi.grid().position(i), psi.values()[i].real(),
                        psi.values()[i].imag(), std::norm(psi.values()[i])});
  }
}

void scenario_schrodinger(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  const auto psi0 = make_initial_state(c, grid);
  const auto v = make_potential(c);
  const auto result = evolve(psi0, v, c.dt, c.n_steps, c.snapshot_every);

  CsvWriter obs(c.out_dir / "observables.csv", {"t", "mean_q", "mean_p", "energy", "norm"});
  for (std::size_t k = 0; k < result.times.size(); ++k)
    obs.write_row({result.times[k], result.mean_q[k], result.mean_p[k], result.energy[k],
                   result.norm[k]});
  manifest.outputs.push_back("observables.csv");

  CsvWriter snaps(c.out_dir / "snapshots.csv", {"t", "q", "re", "im", "density"});
  write_state_snapshots(snaps, result);
  manifest.outputs.push_back("snapshots.csv");
}

void scenario_trajectories(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  if (c.potential != "harmonic")
    throw ConfigError("config: trajectories runs need potential.kind = harmonic");
  if (c.initial != "coherent")
    throw ConfigError("config: trajectories runs need initial.kind = coherent");
  const auto run = run_synthetic_qha(grid, c.omega, c.q0, c.p0, c.dt, c.n_steps, c.size,
                                     c.snapshot_every);

  CsvWriter summary(c.out_dir / "summary.csv", {"t", "residual", "method_gap"});
  for (std::size_t k = 0; k < run.times.size(); ++k)
    summary.write_row({run.times[k], run.residual[k], run.method_gap[k]});
  manifest.outputs.push_back("summary.csv");

  CsvWriter density(c.out_dir / "density_compare.csv",
                    {"q", "lagrangian_density", "schrodinger_density"});
  const double h = silverman_bandwidth(run.bohm.positions, run.bohm.weights);
  const auto lagrangian = density_from_trajectories(run.bohm, grid, h);
  const Array<double> reference = run.psi_final.density();
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    density.write_row({grid.position(i), lagrangian.values[i], reference[i]});
  manifest.outputs.push_back("density_compare.csv");

  const double worst_residual = *std::max_element(run.residual.begin(), run.residual.end());
  const double worst_gap = *std::max_element(run.method_gap.begin(), run.method_gap.end());
  manifest.add_assertion("wave_particle_residual", worst_residual, 1e-3,
                         worst_residual <= 1e-3);
  manifest.add_assertion("bohm_newton_gap", worst_gap, 1e-3, worst_gap <= 1e-3);
  manifest.add_assertion("density_l1", run.density_l1_final, 0.05,
                         run.density_l1_final <= 0.05);
}

void scenario_ensemble(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  const auto psi0 = make_initial_state(c, grid);
  const auto v = make_potential(c);
  auto ens0 = make_phase_ensemble(c, psi0);
  const double h = effective_bandwidth(c, ens0.positions, ens0.weights);
  const NoiseSpec<double> noise(c.k_theta, c.d_pp, c.seed);

  const auto snaps = self_consistent_evolve(ens0, grid, v, noise, c.dt, c.n_steps, h,
                                            c.quantum_force, c.snapshot_every);

  CsvWriter moments(c.out_dir / "moments.csv",
                    {"t", "mean_q", "mean_p", "var_q", "var_p", "weight_sum"});
  for (const auto& s : snaps) {
    const double mq = (s.weights * s.positions).sum();
    const double mp = s.mean_momentum();
    const double vq = (s.weights * (s.positions - mq).square()).sum();
    const double vp = (s.weights * (s.momenta - mp).square()).sum();
    moments.write_row({s.time, mq, mp, vq, vp, s.weights.sum()});
  }
  manifest.outputs.push_back("moments.csv");

  CsvWriter density(c.out_dir / "final_density.csv", {"q", "density"});
  const auto& last = snaps.back();
  const auto marginal = estimate_marginal_density(
      last, grid, effective_bandwidth(c, last.positions, last.weights));
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    density.write_row({grid.position(i), marginal.values[i]});
  manifest.outputs.push_back("final_density.csv");

  double worst = 0;
  for (const auto& s : snaps) worst = std::max(worst, std::abs(s.weights.sum() - 1.0));
  manifest.add_assertion("weight_conservation", worst, 1e-12, worst <= 1e-12);
}

void scenario_ck_oracle(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  const auto psi0 = make_initial_state(c, grid);
  const auto v = make_potential(c);
  const NoiseSpec<double> noise(c.k_theta, c.d_pp, c.seed);

  // matching 256x256 oracle mesh over the configured position range
  Grid1D<double> qg(c.q_min, c.q_max, 256);
  const double p_span = 6.0 * std::sqrt(std::max(c.d_pp * c.dt * c.n_steps, 1e-6));
  Grid1D<double> pg(-p_span, p_span, 257);
  Array<double> profile(qg.size());
  RealField<double> rho0(make_grid(c), psi0.density());
  const IndexRange all{0, rho0.grid.size() - 1};
  for (Eigen::Index i = 0; i < qg.size(); ++i)
    profile[i] = std::max(interpolate(rho0.grid, rho0.values, qg.position(i), all), 0.0);
  auto pdf = GridPdf<double>::delta_momentum(qg, pg, profile, 0.0);
  const auto force = classical_force_field(v, qg);

  const double var0 = pdf.momentum_marginal_variance();
  CsvWriter variance(c.out_dir / "variance.csv", {"t", "var_p", "expected_var_p"});
  variance.write_row({0.0, var0, var0});
  for (int n = 0; n < c.n_steps; ++n) {
    pdf = ck_propagate(pdf, force, noise, c.dt, 1);
    const double t = double(n + 1) * c.dt;
    variance.write_row({t, pdf.momentum_marginal_variance(), var0 + c.d_pp * t});
  }
  manifest.outputs.push_back("variance.csv");

  // sampled ensemble evolved classically over the same horizon
  auto ens = make_phase_ensemble(c, psi0);
  const double t_final = c.dt * c.n_steps;
  const double ens_dt = 1e-3;
  const int ens_steps = std::max(1, int(std::lround(t_final / ens_dt)));
  const auto snaps = self_consistent_evolve(ens, grid, v, noise, ens_dt, ens_steps, 0.0,
                                            false, ens_steps);
  const auto& last = snaps.back();
  const auto marginal = estimate_marginal_density(
      last, qg, effective_bandwidth(c, last.positions, last.weights));
  const Array<double> grid_marginal = pdf.position_marginal_density();

  CsvWriter marginals(c.out_dir / "marginals.csv",
                      {"q", "grid_marginal", "ensemble_marginal"});
  for (Eigen::Index i = 0; i < qg.size(); ++i)
    marginals.write_row({qg.position(i), grid_marginal[i], marginal.values[i]});
  manifest.outputs.push_back("marginals.csv");

  const double var_err =
      std::abs(pdf.momentum_marginal_variance() - (var0 + c.d_pp * t_final));
  const double l1 = trapezoid(qg, (grid_marginal - marginal.values).abs().eval());
  manifest.add_assertion("momentum_variance_growth", var_err, 1e-3, var_err <= 1e-3);
  manifest.add_assertion("marginal_l1", l1, 0.08, l1 <= 0.08);
}

void scenario_kostin(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  const auto psi0 = make_initial_state(c, grid);
  ForcingSpec<double> forcing;
  if (c.forcing == "sinusoidal")
    forcing = ForcingSpec<double>::sinusoidal(c.forcing_amplitude, c.forcing_frequency,
                                              c.forcing_phase);
  else if (c.forcing == "kicks")
    forcing = ForcingSpec<double>::seeded_kicks(c.kick_variance, c.kick_interval, c.seed);
  const KostinParams<double> params(c.beta, c.omega, forcing);

  const auto result = run_bho(psi0, params, c.dt, c.n_steps, c.snapshot_every);
  const double init_q = c.initial == "coherent" ? c.q0 : c.center;
  const double init_p = c.initial == "coherent" ? c.p0 : c.momentum;
  const auto oracle =
      ehrenfest_oracle(params, init_q, init_p, c.dt, c.n_steps, c.snapshot_every);

  CsvWriter obs(c.out_dir / "observables.csv",
                {"t", "mean_q", "mean_p", "energy", "norm", "c_t", "q_classical",
                 "p_classical"});
  double linf = 0;
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    obs.write_row({result.times[k], result.mean_q[k], result.mean_p[k], result.energy[k],
                   result.norm[k], result.c_t[k], oracle.q[k], oracle.p[k]});
    linf = std::max(linf, std::abs(result.mean_q[k] - oracle.q[k]));
  }
  manifest.outputs.push_back("observables.csv");

  const double scale = std::max({std::abs(init_q), std::abs(init_p), 1e-6});
  manifest.add_assertion("ehrenfest_linf", linf / scale, 0.01, linf / scale <= 0.01);

  double worst_norm = 0;
  for (double n : result.norm) worst_norm = std::max(worst_norm, std::abs(n - 1.0));
  manifest.add_assertion("norm_drift", worst_norm, 1e-8, worst_norm <= 1e-8);
}

void scenario_deterministic_limit(const ScenarioConfig& c, RunManifest& manifest) {
  const auto grid = make_grid(c);
  const auto psi0 = make_initial_state(c, grid);
  const auto fields0 = decompose(psi0);

  const double sigma = c.initial == "coherent" ? std::sqrt(0.5 / c.omega) : c.width;
  const double center = c.initial == "coherent" ? c.q0 : c.center;
  auto initial =
      init_phase_space_uniform_weighted(fields0, center - 5 * sigma, center + 5 * sigma, c.size);

  DeterministicLimitScenario<double> scenario{
      .grid = grid,
      .potential = make_potential(c),
      .initial = std::move(initial),
      .quantum_force_on = c.quantum_force,
      .dt = c.dt,
      .n_steps = c.n_steps,
      .bandwidth = c.bandwidth > 0 ? c.bandwidth : 0.1,
      .mu_pp = c.k_theta > 0 ? c.d_pp / c.k_theta : 1.0,
      .seed = c.seed,
  };
  std::vector<double> thetas;
  for (int j = 0; j <= c.theta_halvings; ++j) thetas.push_back(c.theta_max / double(1 << j));
  const auto report = deterministic_limit_check(scenario, thetas);

  CsvWriter spread(c.out_dir / "spread_vs_theta.csv", {"theta", "d_pp", "spread"});
  for (std::size_t k = 0; k < report.thetas.size(); ++k)
    spread.write_row({report.thetas[k], report.thetas[k] * scenario.mu_pp, report.spreads[k]});
  manifest.outputs.push_back("spread_vs_theta.csv");

  manifest.add_assertion("spread_monotone", report.monotone ? 1.0 : 0.0, 1.0, report.monotone);
  const bool slope_ok = report.slope >= 0.35 && report.slope <= 0.65;
  manifest.add_assertion("scaling_slope", report.slope, 0.65, slope_ok);
}

void scenario_validate(const ScenarioConfig& c, RunManifest& manifest) {
  ValidationOptions options;
  options.level = c.level;
  options.work_dir = c.out_dir / "work";
  const auto report = validate_all(options);

  std::ofstream table(c.out_dir / "validation.txt");
  for (const auto& check : report.checks) {
    table << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << "  " << check.detail
          << "  (" << format_double(check.seconds) << " s)\n";
    manifest.add_assertion(check.name, check.value, check.threshold, check.passed);
  }
  table << (report.all_passed() ? "ALL CHECKS PASSED\n" : "CHECKS FAILED\n");
  manifest.outputs.push_back("validation.txt");
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& config) {
  RunManifest manifest;
  manifest.kind = config.kind;
  manifest.version = kVersion;
  manifest.seed = config.seed;
  manifest.config_echo = config.raw;
  manifest.started_utc = utc_timestamp();

  std::filesystem::create_directories(config.out_dir);

  try {
    if (config.kind == "schrodinger")
      scenario_schrodinger(config, manifest);
    else if (config.kind == "trajectories")
      scenario_trajectories(config, manifest);
    else if (config.kind == "ensemble")
      scenario_ensemble(config, manifest);
    else if (config.kind == "ck-oracle")
      scenario_ck_oracle(config, manifest);
    else if (config.kind == "kostin")
      scenario_kostin(config, manifest);
    else if (config.kind == "deterministic-limit")
      scenario_deterministic_limit(config, manifest);
    else if (config.kind == "validate")
      scenario_validate(config, manifest);
    else
      throw ConfigError("config: unsupported run.kind '" + config.kind + "'");
  } catch (const Error&) {
    manifest.ok = false;
    manifest.finished_utc = utc_timestamp();
    write_manifest(config.out_dir, manifest);
    throw;
  }

  for (const auto& written : emit_plot_data(config.out_dir))
    manifest.outputs.push_back(written.filename().string());

  manifest.finished_utc = utc_timestamp();
  write_manifest(config.out_dir, manifest);
  return manifest;
}

}  // namespace qha::cli
