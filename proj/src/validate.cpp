#include "validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "qha/kostin.hpp"
#include "qha/schrodinger.hpp"
#include "qha/stochastic.hpp"
#include "qha/trajectories.hpp"

#include "csv.hpp"
#include "scenario.hpp"

namespace qha::cli {

namespace {

constexpr double kPeriod = 2 * std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_double(v); }

// One sub-bound of a check; value must stay at or below threshold.
struct Bound {
  std::string name;
  double value;
  double threshold;
};

class CheckBuilder {
 public:
  CheckBuilder(std::string name, const ValidationOptions& options) : name_(std::move(name)) {
    const auto it = options.tolerance_scale.find(name_);
    scale_ = it == options.tolerance_scale.end() ? 1.0 : it->second;
  }

  void bound(const std::string& what, double value, double threshold) {
    bounds_.push_back({what, value, threshold * scale_});
  }

  // bound that must be exactly zero (bit-level checks)
  void exact(const std::string& what, bool ok) {
    bounds_.push_back({what, ok ? 0.0 : 1.0, 0.0});
  }

  CheckResult finish(Clock::time_point start) const {
    CheckResult result;
    result.name = name_;
    result.seconds = seconds_since(start);
    result.passed = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < bounds_.size(); ++k) {
      const bool ok = bounds_[k].value <= bounds_[k].threshold;
      result.passed = result.passed && ok;
      if (k) detail << "  ";
      detail << bounds_[k].name << "=" << fmt(bounds_[k].value)
             << (ok ? "<=" : ">") << fmt(bounds_[k].threshold);
    }
    if (!bounds_.empty()) {
      result.value = bounds_.front().value;
      result.threshold = bounds_.front().threshold;
    }
    result.detail = detail.str();
    return result;
  }

 private:
  std::string name_;
  double scale_ = 1.0;
  std::vector<Bound> bounds_;
};

struct Context {
  const ValidationOptions& options;
  bool quick;
  // criterion 1's run feeds criterion 3
  bool synthetic_done = false;
  SyntheticQhaRun synthetic{.bohm = TrajectoryEnsemble<double>(
                                Array<double>::Zero(1), Array<double>::Zero(1),
                                Array<double>::Ones(1)),
                            .newton = TrajectoryEnsemble<double>(
                                Array<double>::Zero(1), Array<double>::Zero(1),
                                Array<double>::Ones(1)),
                            .psi_final = WaveFunction<double>(
                                Grid1D<double>(-1, 1, 16), ComplexArray<double>::Ones(16))};

  const SyntheticQhaRun& synthetic_run() {
    if (!synthetic_done) {
      Grid1D<double> grid(-12.0, 12.0, 1024);
      const Eigen::Index n_traj = quick ? 500 : 2000;
      synthetic = run_synthetic_qha(grid, 1.0, 1.0, 0.0, kPeriod / 4096, 2 * 4096, n_traj, 8);
      synthetic_done = true;
    }
    return synthetic;
  }
};

CheckResult check_equivalence(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("01-schrodinger-qha-equivalence", ctx.options);
  const auto& run = ctx.synthetic_run();
  const double worst_residual = *std::max_element(run.residual.begin(), run.residual.end());
  const double worst_gap = *std::max_element(run.method_gap.begin(), run.method_gap.end());
  check.bound("residual", worst_residual, 1e-3);
  check.bound("bohm_newton_gap", worst_gap, 1e-3);
  check.bound("density_l1", run.density_l1_final, 0.05);
  check.bound("runtime_s", seconds_since(start), 30.0);
  return check.finish(start);
}

CheckResult check_force_cancellation(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("02-quantum-force-cancellation", ctx.options);

  Grid1D<double> grid(-12.0, 12.0, 2048);
  const auto psi = coherent_state(grid, 1.0, 0.0, 0.0, 0.0);
  RealField<double> density(grid, psi.density());
  const auto force = build_force_field(PotentialSpec<double>::harmonic(1.0), density);
  const Array<double> net = force.total();
  const auto region = support_interval(density.values, 1e-9 * density.values.maxCoeff());
  double worst_net = 0;
  for (Eigen::Index i = region.lo; i <= region.hi; ++i)
    worst_net = std::max(worst_net, std::abs(net[i]));
  check.bound("net_force", worst_net, 1e-5);

  auto ens = init_trajectories(decompose(psi), ctx.quick ? 256 : 512);
  const Array<double> start_q = ens.positions;
  const int n_steps = 4096;
  for (int n = 0; n < n_steps; ++n) ens = newtonian_step(ens, force, kPeriod / n_steps);
  check.bound("stationary_drift", (ens.positions - start_q).abs().maxCoeff(), 1e-6);
  check.bound("runtime_s", seconds_since(start), 5.0);
  return check.finish(start);
}

CheckResult check_self_sustained(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("03-self-sustained-ansatz", ctx.options);
  const auto& run = ctx.synthetic_run();
  // growth of the residual from the first period to the second
  const double growth = run.residual_max_second_half /
                        std::max(run.residual_max_first_half, 1e-300);
  check.bound("residual_growth", growth, 10.0);
  return check.finish(start);
}

CheckResult check_deterministic_limit(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("04-deterministic-limit", ctx.options);

  std::vector<double> thetas;
  for (int j = 0; j <= 4; ++j) thetas.push_back(0.2 / double(1 << j));

  {  // free case: exact half-order scaling under the shared realization
    Grid1D<double> grid(-12.0, 12.0, 512);
    RealField<double> density(grid, coherent_state(grid, 0.5, 0.0, 0.0, 0.0).density());
    Array<double> q = sample_by_inverse_cdf(density, ctx.quick ? 2000 : 10000);
    const Eigen::Index n = q.size();
    PhaseSpaceEnsemble<double> ens(std::move(q), Array<double>::Zero(n),
                                   Array<double>::Constant(n, 1.0 / double(n)));
    DeterministicLimitScenario<double> scenario{
        .grid = grid,
        .potential = PotentialSpec<double>::free(),
        .initial = std::move(ens),
        .quantum_force_on = false,
        .dt = 1e-3,
        .n_steps = 1000,
        .bandwidth = 0.1,
        .mu_pp = 1.0,
        .seed = ctx.options.seed,
    };
    const auto report = deterministic_limit_check(scenario, thetas);
    check.bound("free_slope_error", std::abs(report.slope - 0.5), 1e-9);
    check.exact("free_monotone", report.monotone);
  }

  {  // harmonic self-consistent case
    Grid1D<double> grid(-9.0, 9.0, 1024);
    const double sigma = std::sqrt(0.5);
    const auto fields0 = decompose(coherent_state(grid, 1.0, 1.0, 0.0, 0.0));
    DeterministicLimitScenario<double> scenario{
        .grid = grid,
        .potential = PotentialSpec<double>::harmonic(1.0),
        .initial = init_phase_space_uniform_weighted(fields0, 1.0 - 5 * sigma, 1.0 + 5 * sigma,
                                                     ctx.quick ? 4000 : 10000),
        .quantum_force_on = true,
        .dt = 1e-3,
        .n_steps = 1000,
        .bandwidth = 0.1,
        .mu_pp = 1.0,
        .seed = ctx.options.seed + 1,
    };
    const auto report = deterministic_limit_check(scenario, thetas);
    check.bound("harmonic_slope_low", 0.35 - report.slope, 0.0);
    check.bound("harmonic_slope_high", report.slope - 0.65, 0.0);
    check.exact("harmonic_monotone", report.monotone);
  }
  check.bound("runtime_s", seconds_since(start), 60.0);
  return check.finish(start);
}

CheckResult check_noise_structure(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("05-noise-structure", ctx.options);

  Grid1D<double> grid(-8.0, 8.0, 256);
  RealField<double> density(grid, coherent_state(grid, 0.5, 0.0, 0.0, 0.0).density());
  Array<double> q = sample_by_inverse_cdf(density, 500);
  const Array<double> q0 = q;
  const Eigen::Index n = q.size();
  PhaseSpaceEnsemble<double> ens(std::move(q), Array<double>::Zero(n),
                                 Array<double>::Constant(n, 1.0 / double(n)));
  const auto force = classical_force_field(PotentialSpec<double>::free(), grid);
  const NoiseSpec<double> noise(0.5, 0.5, ctx.options.seed);
  bool identical = true;
  for (int step = 0; step < 1000; ++step) {
    ens = em_step(ens, force, noise, 1e-3);
    for (Eigen::Index i = 0; i < n; ++i) identical = identical && (ens.positions[i] == q0[i]);
    ens.momenta.setZero();
  }
  check.exact("positions_bit_identical", identical);
  return check.finish(start);
}

CheckResult check_cumulants(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("06-gaussian-cumulants", ctx.options);

  Grid1D<double> grid(-12.0, 12.0, 256);
  const double d_pp = 0.1, dt = 1e-2;
  RealField<double> density(grid, coherent_state(grid, 0.5, 0.0, 0.0, 0.0).density());
  Array<double> q = sample_by_inverse_cdf(density, 10000);
  const Eigen::Index n = q.size();
  PhaseSpaceEnsemble<double> ens(std::move(q), Array<double>::Zero(n),
                                 Array<double>::Constant(n, 1.0 / double(n)));
  const auto force = classical_force_field(PotentialSpec<double>::free(), grid);
  const auto stepped = em_step(ens, force, NoiseSpec<double>(d_pp, d_pp, ctx.options.seed), dt);

  std::vector<std::pair<PhasePoint, PhasePoint>> pairs(n);
  for (Eigen::Index i = 0; i < n; ++i)
    pairs[i] = {PhasePoint{ens.positions[i], ens.momenta[i]},
                PhasePoint{stepped.positions[i], stepped.momenta[i]}};

  const auto c2 = estimate_cumulants(pairs, dt, 2);
  const auto c3 = estimate_cumulants(pairs, dt, 3);
  check.bound("order2_deviation", std::abs(c2.value[1] - d_pp), 3 * c2.std_error[1]);
  check.bound("order3_deviation", std::abs(c3.value[1]), 3 * c3.std_error[1]);
  check.bound("runtime_s", seconds_since(start), 10.0);
  return check.finish(start);
}

CheckResult check_chapman_kolmogorov(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("07-chapman-kolmogorov", ctx.options);

  Grid1D<double> qg(-8.0, 8.0, 256);
  Grid1D<double> pg(-2.5, 2.5, 256);
  const double d_pp = 0.1, dt = 0.02;
  const int n_steps = 50;  // t = 1

  Array<double> profile(qg.size());
  for (Eigen::Index i = 0; i < qg.size(); ++i)
    profile[i] = std::exp(-qg.position(i) * qg.position(i) / 2);
  auto pdf = GridPdf<double>::delta_momentum(qg, pg, profile, 0.0);
  const double var0 = pdf.momentum_marginal_variance();
  const auto force = classical_force_field(PotentialSpec<double>::free(), qg);
  pdf = ck_propagate(pdf, force, NoiseSpec<double>(d_pp, d_pp, 0), dt, n_steps);
  check.bound("variance_growth_error",
              std::abs(pdf.momentum_marginal_variance() - var0 - d_pp * 1.0), 1e-3);

  RealField<double> density(qg, (profile / trapezoid(qg, profile)).eval());
  Array<double> q = sample_by_inverse_cdf(density, ctx.quick ? 5000 : 10000);
  const Eigen::Index n = q.size();
  PhaseSpaceEnsemble<double> ens(std::move(q), Array<double>::Zero(n),
                                 Array<double>::Constant(n, 1.0 / double(n)));
  const auto snaps =
      self_consistent_evolve(ens, qg, PotentialSpec<double>::free(),
                             NoiseSpec<double>(d_pp, d_pp, ctx.options.seed + 7), 1e-3, 1000,
                             0.0, false, 1000);
  const auto& last = snaps.back();
  const auto marginal = estimate_marginal_density(
      last, qg, silverman_bandwidth(last.positions, last.weights));
  const double l1 =
      trapezoid(qg, (pdf.position_marginal_density() - marginal.values).abs().eval());
  check.bound("marginal_l1", l1, 0.08);
  check.bound("runtime_s", seconds_since(start), 30.0);
  return check.finish(start);
}

CheckResult check_kostin_reduction(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("08-kostin-reduction-dissipation", ctx.options);

  Grid1D<double> grid(-9.0, 9.0, 1024);
  const auto v = PotentialSpec<double>::harmonic(1.0);
  {
    const KostinParams<double> frictionless(0.0, 1.0);
    auto psi = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
    double worst = 0;
    const double dt = kPeriod / 2048;
    for (int n = 0; n < 50; ++n) {
      const auto a = kostin_step(psi, frictionless, n * dt, dt);
      const auto b = cn_step(psi, v, dt);
      for (Eigen::Index i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
      psi = a;
    }
    check.bound("frictionless_reduction", worst, 1e-10);
  }
  {
    const KostinParams<double> damped(0.2, 1.0);
    const int periods = ctx.quick ? 1 : 3;
    const auto result = run_bho(coherent_state(grid, 1.0, 1.0, 0.0, 0.0), damped,
                                kPeriod / 2048, periods * 2048, 64);
    double worst_gain = 0;
    for (std::size_t k = 1; k < result.energy.size(); ++k)
      worst_gain = std::max(worst_gain, result.energy[k] - result.energy[k - 1]);
    check.bound("energy_gain", worst_gain, 1e-9);
    double worst_norm = 0;
    for (double m : result.norm) worst_norm = std::max(worst_norm, std::abs(m - 1.0));
    check.bound("norm_drift", worst_norm, 1e-8);
  }
  return check.finish(start);
}

CheckResult check_kostin_ehrenfest(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("09-kostin-ehrenfest", ctx.options);

  Grid1D<double> grid(-9.0, 9.0, 1024);
  {
    const KostinParams<double> damped(0.2, 1.0);
    const double dt = kPeriod / (ctx.quick ? 1024 : 4096);
    const int n_steps = 3 * (ctx.quick ? 1024 : 4096);
    const int every = 32;
    const auto result =
        run_bho(coherent_state(grid, 1.0, 1.0, 0.0, 0.0), damped, dt, n_steps, every);
    const auto oracle = ehrenfest_oracle(damped, 1.0, 0.0, dt, n_steps, every);
    double linf = 0;
    for (std::size_t k = 0; k < result.times.size(); ++k)
      linf = std::max(linf, std::abs(result.mean_q[k] - oracle.q[k]));
    check.bound("free_decay_linf", linf / 1.0, 0.01);
  }
  {
    const double beta = 0.2, omega = 1.0, f0 = 0.08;
    KostinParams<double> driven(beta, omega, ForcingSpec<double>::sinusoidal(f0, omega));
    const int periods = 8;
    const double dt = kPeriod / 1024;
    const int n_steps = periods * 1024;
    const int every = 16;
    const auto result =
        run_bho(coherent_state(grid, omega, 0.0, 0.0, 0.0), driven, dt, n_steps, every);
    const auto oracle = ehrenfest_oracle(driven, 0.0, 0.0, dt, n_steps, every);

    const double steady = f0 / (beta * omega);
    double linf = 0, amp_q = 0, amp_cl = 0;
    for (std::size_t k = 0; k < result.times.size(); ++k) {
      linf = std::max(linf, std::abs(result.mean_q[k] - oracle.q[k]));
      if (result.times[k] >= (periods - 1) * kPeriod) {
        amp_q = std::max(amp_q, std::abs(result.mean_q[k]));
        amp_cl = std::max(amp_cl, std::abs(oracle.q[k]));
      }
    }
    check.bound("driven_linf", linf / steady, 0.01);
    check.bound("steady_amplitude_error", std::abs(amp_q - amp_cl) / amp_cl, 0.02);
    check.bound("steady_vs_closed_form", std::abs(amp_cl - steady) / steady, 0.02);
  }
  check.bound("runtime_s", seconds_since(start), 60.0);
  return check.finish(start);
}

CheckResult check_determinism(Context& ctx) {
  const auto start = Clock::now();
  CheckBuilder check("10-determinism", ctx.options);

  const auto read_bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };

  const auto base = ctx.options.work_dir / "determinism";
  std::filesystem::create_directories(base);
  std::vector<std::string> pairs = {
      "run.kind=ensemble",       "run.seed=97",           "grid.q_min=-10",
      "grid.q_max=10",           "grid.n_points=256",     "potential.kind=harmonic",
      "potential.omega=1.0",     "initial.kind=coherent", "initial.q0=0.7",
      "initial.p0=0.0",          "time.dt=0.002",         "time.n_steps=100",
      "time.snapshot_every=10",  "noise.k_theta=0.1",     "noise.d_pp=0.1",
      "ensemble.size=500",       "ensemble.bandwidth=0.15"};

  bool identical = true;
  std::string first_bytes;
  for (int rep = 0; rep < 2; ++rep) {
    auto cfg_pairs = pairs;
    const auto out = base / ("rep" + std::to_string(rep));
    cfg_pairs.push_back("run.out=" + out.string());
    const auto config = load_config_from_pairs(cfg_pairs);
    run_scenario(config);
    const std::string bytes = read_bytes(out / "moments.csv");
    if (rep == 0)
      first_bytes = bytes;
    else
      identical = !bytes.empty() && bytes == first_bytes;
  }
  check.exact("csv_bytes_identical", identical);
  return check.finish(start);
}

}  // namespace

ValidationReport validate_all(const ValidationOptions& options) {
  const auto suite_start = Clock::now();
  ValidationOptions opts = options;
  if (opts.work_dir.empty())
    opts.work_dir = std::filesystem::temp_directory_path() / "qha-validate";
  std::filesystem::create_directories(opts.work_dir);

  Context ctx{.options = opts, .quick = opts.level != "full"};

  using CheckFn = std::function<CheckResult(Context&)>;
  const std::vector<std::pair<std::string, CheckFn>> all_checks = {
      {"01-schrodinger-qha-equivalence", check_equivalence},
      {"02-quantum-force-cancellation", check_force_cancellation},
      {"03-self-sustained-ansatz", check_self_sustained},
      {"04-deterministic-limit", check_deterministic_limit},
      {"05-noise-structure", check_noise_structure},
      {"06-gaussian-cumulants", check_cumulants},
      {"07-chapman-kolmogorov", check_chapman_kolmogorov},
      {"08-kostin-reduction-dissipation", check_kostin_reduction},
      {"09-kostin-ehrenfest", check_kostin_ehrenfest},
      {"10-determinism", check_determinism},
  };

  ValidationReport report;
  for (const auto& [name, fn] : all_checks) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), name) == opts.only.end())
      continue;
    report.checks.push_back(fn(ctx));
  }

  if (opts.only.empty()) {
    const auto start = Clock::now();
    CheckBuilder runtime("11-runtime-budget", opts);
    const double budget = ctx.quick ? 60.0 : 600.0;
    runtime.bound("suite_seconds", seconds_since(suite_start), budget);
    report.checks.push_back(runtime.finish(start));
  }
  report.total_seconds = seconds_since(suite_start);
  return report;
}

}  // namespace qha::cli
