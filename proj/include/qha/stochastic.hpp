#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "qha/errors.hpp"
#include "qha/kde.hpp"
#include "qha/parallel.hpp"
#include "qha/rng.hpp"
#include "qha/trajectories.hpp"
#include "qha/types.hpp"

namespace qha {

// Momentum-only white noise: the position block of the diffusion tensor is
// identically zero by construction (there is no field for it), so position
// coordinates never receive a direct kick. d_pp is the momentum diffusion
// coefficient; k_theta the fluctuation amplitude it derives from.
template <typename Scalar = double>
struct NoiseSpec {
  Scalar k_theta = Scalar(0);
  Scalar d_pp = Scalar(0);
  std::uint64_t seed = 0;

  NoiseSpec() = default;
  NoiseSpec(Scalar k_theta_, Scalar d_pp_, std::uint64_t seed_)
      : k_theta(k_theta_), d_pp(d_pp_), seed(seed_) {
    if (!(k_theta >= Scalar(0)) || !(d_pp >= Scalar(0)))
      throw std::invalid_argument("NoiseSpec: amplitudes must be nonnegative");
  }
};

// Weighted phase-space samples of rho(q, p, t). `step` counts integrator
// steps taken since initialization and doubles as the RNG substream counter,
// so a run is replayable sample by sample.
template <typename Scalar = double>
struct PhaseSpaceEnsemble {
  Array<Scalar> positions;
  Array<Scalar> momenta;
  Array<Scalar> weights;
  Scalar time = Scalar(0);
  std::uint64_t step = 0;

  PhaseSpaceEnsemble(Array<Scalar> q, Array<Scalar> p, Array<Scalar> w)
      : positions(std::move(q)), momenta(std::move(p)), weights(std::move(w)) {
    if (positions.size() != momenta.size() || positions.size() != weights.size())
      throw std::invalid_argument("PhaseSpaceEnsemble: component sizes differ");
    if (std::abs(weights.sum() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("PhaseSpaceEnsemble: weights must sum to one");
  }

  Eigen::Index size() const { return positions.size(); }

  Scalar mean_momentum() const { return (weights * momenta).sum(); }

  Scalar momentum_spread_about(Scalar p_ref) const {
    return std::sqrt((weights * (momenta - p_ref).square()).sum());
  }
};

// One Euler step of the phase-space SDE: drift evaluated at the old state,
// then an independent Gaussian momentum kick of variance d_pp dt per sample.
// Positions receive no kick.
template <typename Scalar>
PhaseSpaceEnsemble<Scalar> em_step(const PhaseSpaceEnsemble<Scalar>& ens,
                                   const ForceField<Scalar>& force,
                                   const NoiseSpec<Scalar>& noise, Scalar dt,
                                   const PhysicalConstants<Scalar>& c = {}) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("em_step: dt must be positive");
  const Array<Scalar> total = force.total();
  const Scalar kick = std::sqrt(noise.d_pp * dt);
  PhaseSpaceEnsemble<Scalar> out = ens;
  parallel_for(ens.size(), [&](std::ptrdiff_t i) {
    out.positions[i] = ens.positions[i] + ens.momenta[i] / c.mass * dt;
    Scalar p = ens.momenta[i] +
               interpolate(force.grid, total, ens.positions[i], force.support) * dt;
    if (kick > Scalar(0))
      p += kick * Scalar(rng::normal(noise.seed, std::uint64_t(i), ens.step));
    out.momenta[i] = p;
  });
  out.time = ens.time + dt;
  out.step = ens.step + 1;
  return out;
}

// Position marginal n(q) of the ensemble; momenta are ignored entirely.
template <typename Scalar>
RealField<Scalar> estimate_marginal_density(const PhaseSpaceEnsemble<Scalar>& ens,
                                            const Grid1D<Scalar>& grid, Scalar bandwidth) {
  return kde_density(grid, ens.positions, ens.weights, bandwidth);
}

// Self-consistent stochastic loop: at each step the position marginal is
// re-estimated from the current samples, the force field (including the
// quantum force unless switched off) is rebuilt from it, and the ensemble is
// advanced by em_step. Snapshots include the initial and final ensembles.
//
// quantum_support_floor cuts the quantum-force support where the estimated
// density drops below that fraction of its peak. Below it the estimate is
// kernel tail rather than data, and its log-curvature would eject samples
// with unbounded spurious forces; out there samples move classically.
template <typename Scalar>
std::vector<PhaseSpaceEnsemble<Scalar>> self_consistent_evolve(
    const PhaseSpaceEnsemble<Scalar>& ens0, const Grid1D<Scalar>& grid,
    const PotentialSpec<Scalar>& V, const NoiseSpec<Scalar>& noise, Scalar dt, int n_steps,
    Scalar bandwidth, bool quantum_force_on, int snapshot_every = 1,
    const PhysicalConstants<Scalar>& c = {}, Scalar quantum_support_floor = Scalar(1e-4)) {
  if (snapshot_every < 1) snapshot_every = 1;
  std::vector<PhaseSpaceEnsemble<Scalar>> snapshots;
  snapshots.push_back(ens0);
  PhaseSpaceEnsemble<Scalar> ens = ens0;
  const auto make_force = [&]() -> ForceField<Scalar> {
    if (!quantum_force_on) return classical_force_field(V, grid, c, ens.time);
    const RealField<Scalar> density =
        kde_density_variance_corrected(grid, ens.positions, ens.weights, bandwidth);
    const Scalar eps_n = quantum_support_floor * density.values.maxCoeff();
    const IndexRange support = support_interval(density.values, eps_n);
    const Scalar q_lo = grid.position(support.lo);
    const Scalar q_hi = grid.position(support.hi);
    for (Eigen::Index i = 0; i < ens.size(); ++i) {
      const Scalar q = ens.positions[i];
      if (q < q_lo || q > q_hi) continue;  // classical region, no quantum force
      const Scalar n_here = interpolate(density.grid, density.values, q, support);
      if (!(n_here >= eps_n))
        throw NodeError("self_consistent_evolve: estimated density collapsed below eps_n "
                        "at a sample position");
    }
    return build_force_field(V, density, c, eps_n, ens.time);
  };
  for (int n = 0; n < n_steps; ++n) {
    ens = em_step(ens, make_force(), noise, dt, c);
    if ((n + 1) % snapshot_every == 0 || n + 1 == n_steps) snapshots.push_back(ens);
  }
  return snapshots;
}

struct PhasePoint {
  double q = 0;
  double p = 0;
};

// Lag-normalized cumulant of process increments, per phase-space component,
// with a bootstrap standard error.
struct CumulantEstimate {
  int order = 1;
  double lag = 0;
  Eigen::Array2d value = Eigen::Array2d::Zero();       // (q component, p component)
  Eigen::Array2d std_error = Eigen::Array2d::Zero();
};

namespace detail {

inline Eigen::Array2d increment_cumulant(const std::vector<Eigen::Array2d>& deltas,
                                         const std::vector<std::size_t>& index, int order,
                                         double lag) {
  const double n = double(index.size());
  Eigen::Array2d mean = Eigen::Array2d::Zero();
  for (std::size_t k : index) mean += deltas[k];
  mean /= n;
  if (order == 1) return mean / lag;
  Eigen::Array2d central = Eigen::Array2d::Zero();
  for (std::size_t k : index) {
    const Eigen::Array2d d = deltas[k] - mean;
    central += (order == 2) ? (d * d).eval() : (d * d * d).eval();
  }
  return central / n / lag;
}

}  // namespace detail

inline constexpr std::size_t kMinCumulantPairs = 1000;

// c^(n) = (1/tau) x n-th central moment of the increments x_{t+tau} - x_t
// (order 1 uses the raw mean). Standard error by bootstrap over the pairs.
inline CumulantEstimate estimate_cumulants(
    const std::vector<std::pair<PhasePoint, PhasePoint>>& step_pairs, double lag, int order,
    int bootstrap_rounds = 200, std::uint64_t bootstrap_seed = 0x626f6f74ULL) {
  if (step_pairs.size() < kMinCumulantPairs)
    throw InsufficientSamplesError("estimate_cumulants: need at least " +
                                   std::to_string(kMinCumulantPairs) + " pairs, got " +
                                   std::to_string(step_pairs.size()));
  if (!(lag > 0)) throw std::invalid_argument("estimate_cumulants: lag must be positive");
  if (order < 1 || order > 3)
    throw std::invalid_argument("estimate_cumulants: order must be 1, 2 or 3");

  std::vector<Eigen::Array2d> deltas(step_pairs.size());
  for (std::size_t k = 0; k < step_pairs.size(); ++k) {
    deltas[k][0] = step_pairs[k].second.q - step_pairs[k].first.q;
    deltas[k][1] = step_pairs[k].second.p - step_pairs[k].first.p;
  }
  std::vector<std::size_t> all(deltas.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;

  CumulantEstimate est;
  est.order = order;
  est.lag = lag;
  est.value = detail::increment_cumulant(deltas, all, order, lag);

  Eigen::Array2d acc = Eigen::Array2d::Zero();
  Eigen::Array2d acc2 = Eigen::Array2d::Zero();
  std::vector<std::size_t> resample(deltas.size());
  for (int b = 0; b < bootstrap_rounds; ++b) {
    for (std::size_t k = 0; k < resample.size(); ++k)
      resample[k] = rng::uniform_index(bootstrap_seed, b, k, deltas.size());
    const Eigen::Array2d v = detail::increment_cumulant(deltas, resample, order, lag);
    acc += v;
    acc2 += v * v;
  }
  const double nb = double(bootstrap_rounds);
  est.std_error = ((acc2 / nb - (acc / nb) * (acc / nb)).max(0.0)).sqrt();
  return est;
}

// Rectangular (q, p) mesh carrying one probability mass per cell.
template <typename Scalar = double>
struct GridPdf {
  Grid1D<Scalar> q_grid;
  Grid1D<Scalar> p_grid;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mass;  // (q index, p index)

  GridPdf(const Grid1D<Scalar>& qg, const Grid1D<Scalar>& pg)
      : q_grid(qg), p_grid(pg),
        mass(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(qg.size(), pg.size())) {}

  Scalar total_mass() const { return mass.sum(); }

  Array<Scalar> position_marginal_density() const {
    Array<Scalar> m = mass.rowwise().sum().array();
    return m / (m.sum() * q_grid.dq());
  }

  Array<Scalar> momentum_marginal() const { return mass.colwise().sum().array(); }

  Scalar momentum_marginal_variance() const {
    const Array<Scalar> m = momentum_marginal();
    const Array<Scalar> p = p_grid.positions();
    const Scalar total = m.sum();
    const Scalar mean = (m * p).sum() / total;
    return (m * (p - mean).square()).sum() / total;
  }

  // Normalized Gaussian product density deposited at the nodes.
  static GridPdf gaussian(const Grid1D<Scalar>& qg, const Grid1D<Scalar>& pg, Scalar q_mean,
                          Scalar q_sigma, Scalar p_mean, Scalar p_sigma) {
    GridPdf pdf(qg, pg);
    for (Eigen::Index i = 0; i < qg.size(); ++i) {
      const Scalar gq = std::exp(-std::pow(qg.position(i) - q_mean, 2) / (2 * q_sigma * q_sigma));
      for (Eigen::Index j = 0; j < pg.size(); ++j) {
        const Scalar gp =
            std::exp(-std::pow(pg.position(j) - p_mean, 2) / (2 * p_sigma * p_sigma));
        pdf.mass(i, j) = gq * gp;
      }
    }
    pdf.mass /= pdf.mass.sum();
    return pdf;
  }

  // All mass in the q-profile row closest to p = p_value.
  static GridPdf delta_momentum(const Grid1D<Scalar>& qg, const Grid1D<Scalar>& pg,
                                const Array<Scalar>& q_profile, Scalar p_value) {
    GridPdf pdf(qg, pg);
    Eigen::Index j = 0;
    Scalar best = std::abs(pg.position(0) - p_value);
    for (Eigen::Index k = 1; k < pg.size(); ++k) {
      const Scalar d = std::abs(pg.position(k) - p_value);
      if (d < best) {
        best = d;
        j = k;
      }
    }
    for (Eigen::Index i = 0; i < qg.size(); ++i) pdf.mass(i, j) = q_profile[i];
    pdf.mass /= pdf.mass.sum();
    return pdf;
  }
};

inline constexpr double kCkMassLossLimit = 1e-6;

// Discrete transition-kernel propagation: per step, shift every cell by its
// drift (q by p dt/m, p by F(q) dt) with bilinear deposit, then convolve the
// momentum axis with the sampled Gaussian kernel of variance d_pp dt.
// Mass is conserved by construction up to boundary losses, which abort the
// run past kCkMassLossLimit; the result is renormalized to one.
template <typename Scalar>
GridPdf<Scalar> ck_propagate(const GridPdf<Scalar>& pdf, const ForceField<Scalar>& force,
                             const NoiseSpec<Scalar>& noise, Scalar dt, int n_steps,
                             const PhysicalConstants<Scalar>& c = {}) {
  const Eigen::Index nq = pdf.q_grid.size();
  const Eigen::Index np = pdf.p_grid.size();
  const Scalar dp = pdf.p_grid.dq();
  const Scalar sigma = std::sqrt(noise.d_pp * dt);
  if (noise.d_pp > Scalar(0) && sigma < 2 * dp)
    throw ResolutionError("ck_propagate: kernel width " + std::to_string(double(sigma)) +
                          " under-resolved by momentum cell " + std::to_string(double(dp)));

  Array<Scalar> kernel;
  Eigen::Index radius = 0;
  if (noise.d_pp > Scalar(0)) {
    radius = std::min<Eigen::Index>(np - 1,
                                    static_cast<Eigen::Index>(std::ceil(6 * sigma / dp)) + 1);
    kernel.resize(2 * radius + 1);
    for (Eigen::Index k = -radius; k <= radius; ++k)
      kernel[k + radius] = std::exp(-Scalar(k) * Scalar(k) * dp * dp / (2 * sigma * sigma));
    kernel /= kernel.sum();
  }

  const Array<Scalar> total_force = force.total();
  Array<Scalar> force_at_q(nq);
  for (Eigen::Index i = 0; i < nq; ++i)
    force_at_q[i] = interpolate(force.grid, total_force, pdf.q_grid.position(i), force.support);

  GridPdf<Scalar> cur = pdf;
  Scalar lost = 0;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  for (int n = 0; n < n_steps; ++n) {
    const Scalar mass_before = cur.total_mass();
    Matrix shifted = Matrix::Zero(nq, np);
    for (Eigen::Index i = 0; i < nq; ++i) {
      for (Eigen::Index j = 0; j < np; ++j) {
        const Scalar m = cur.mass(i, j);
        if (m == Scalar(0)) continue;
        const Scalar qx = (pdf.q_grid.position(i) + pdf.p_grid.position(j) / c.mass * dt -
                           pdf.q_grid.q_min()) / pdf.q_grid.dq();
        const Scalar px =
            (pdf.p_grid.position(j) + force_at_q[i] * dt - pdf.p_grid.q_min()) / dp;
        if (qx < Scalar(0) || qx > Scalar(nq - 1) || px < Scalar(0) || px > Scalar(np - 1)) {
          lost += m;
          continue;
        }
        const auto iq = std::min<Eigen::Index>(static_cast<Eigen::Index>(qx), nq - 2);
        const auto jp = std::min<Eigen::Index>(static_cast<Eigen::Index>(px), np - 2);
        const Scalar fq = qx - Scalar(iq);
        const Scalar fp = px - Scalar(jp);
        shifted(iq, jp) += m * (1 - fq) * (1 - fp);
        shifted(iq + 1, jp) += m * fq * (1 - fp);
        shifted(iq, jp + 1) += m * (1 - fq) * fp;
        shifted(iq + 1, jp + 1) += m * fq * fp;
      }
    }

    if (radius > 0) {
      Matrix blurred = Matrix::Zero(nq, np);
      for (Eigen::Index j = 0; j < np; ++j) {
        const Eigen::Index k_lo = std::max<Eigen::Index>(-radius, -j);
        const Eigen::Index k_hi = std::min<Eigen::Index>(radius, np - 1 - j);
        Scalar covered = 0;
        for (Eigen::Index k = k_lo; k <= k_hi; ++k) covered += kernel[k + radius];
        for (Eigen::Index k = k_lo; k <= k_hi; ++k)
          blurred.col(j + k) += shifted.col(j) * kernel[k + radius];
        lost += shifted.col(j).sum() * (Scalar(1) - covered);
      }
      cur.mass = blurred;
    } else {
      cur.mass = shifted;
    }

    if (lost > Scalar(kCkMassLossLimit))
      throw MassLossError("ck_propagate: " + std::to_string(double(lost)) +
                          " probability mass reached the mesh boundary");
    const Scalar drift = std::abs((cur.total_mass() + lost) - mass_before);
    if (drift > Scalar(1e-9))
      throw MassLossError("ck_propagate: mass accounting drifted by " +
                          std::to_string(double(drift)));
    cur.mass /= cur.total_mass();
  }
  return cur;
}

// Scenario for the noise -> 0 study: a fixed initial ensemble evolved by the
// self-consistent loop at a sequence of fluctuation amplitudes.
template <typename Scalar = double>
struct DeterministicLimitScenario {
  Grid1D<Scalar> grid;
  PotentialSpec<Scalar> potential;
  PhaseSpaceEnsemble<Scalar> initial;
  bool quantum_force_on = true;
  Scalar dt = Scalar(1e-3);
  int n_steps = 1000;
  Scalar bandwidth = Scalar(0.1);
  Scalar mu_pp = Scalar(1);  // d_pp = k_theta * mu_pp
  std::uint64_t seed = 1;
  PhysicalConstants<Scalar> constants{};
};

template <typename Scalar = double>
struct DeterministicLimitReport {
  std::vector<Scalar> thetas;
  std::vector<Scalar> spreads;
  Scalar reference_momentum = Scalar(0);
  Scalar slope = Scalar(0);  // log-log fit of spread vs theta over theta > 0
  bool monotone = false;
  Scalar spread_at_zero = Scalar(-1);  // -1 when 0 is not in the sequence
};

// Runs the scenario at each theta (shared noise realization via the common
// seed) and measures the momentum spread around the deterministic reference.
// The reference is the mean momentum of a noiseless run of the same loop,
// which realizes the deterministic momentum field for scenarios whose phase
// gradient is spatially uniform (the supported free and coherent cases).
template <typename Scalar>
DeterministicLimitReport<Scalar> deterministic_limit_check(
    const DeterministicLimitScenario<Scalar>& scenario, const std::vector<Scalar>& thetas) {
  for (std::size_t k = 1; k < thetas.size(); ++k)
    if (!(thetas[k] < thetas[k - 1]))
      throw std::invalid_argument("deterministic_limit_check: thetas must strictly decrease");

  auto run_final = [&](Scalar theta) {
    const NoiseSpec<Scalar> noise(theta, theta * scenario.mu_pp, scenario.seed);
    auto snaps = self_consistent_evolve(scenario.initial, scenario.grid, scenario.potential,
                                        noise, scenario.dt, scenario.n_steps,
                                        scenario.bandwidth, scenario.quantum_force_on,
                                        scenario.n_steps, scenario.constants);
    return snaps.back();
  };

  DeterministicLimitReport<Scalar> report;
  report.reference_momentum = run_final(Scalar(0)).mean_momentum();

  for (Scalar theta : thetas) {
    const auto ens = run_final(theta);
    const Scalar spread = ens.momentum_spread_about(report.reference_momentum);
    if (theta > Scalar(0)) {
      report.thetas.push_back(theta);
      report.spreads.push_back(spread);
    } else {
      report.spread_at_zero = spread;
    }
  }

  report.monotone = true;
  for (std::size_t k = 1; k < report.spreads.size(); ++k)
    if (!(report.spreads[k] < report.spreads[k - 1])) report.monotone = false;

  if (report.thetas.size() >= 2) {
    const auto n = Scalar(report.thetas.size());
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < report.thetas.size(); ++k) {
      const Scalar x = std::log(report.thetas[k]);
      const Scalar y = std::log(report.spreads[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return report;
}

// Uniformly spaced phase-space ensemble over [q_lo, q_hi]: weights carry the
// density, momenta the local field m v(q). Unlike quantile sampling this
// keeps the marginal estimate smooth into the tails, where the equal-weight
// bundle would degenerate into isolated kernels.
template <typename Scalar>
PhaseSpaceEnsemble<Scalar> init_phase_space_uniform_weighted(const HydroFields<Scalar>& fields,
                                                             Scalar q_lo, Scalar q_hi,
                                                             Eigen::Index n_samples,
                                                             const PhysicalConstants<Scalar>& c = {}) {
  Array<Scalar> q = Array<Scalar>::LinSpaced(n_samples, q_lo, q_hi);
  const IndexRange all{0, fields.grid.size() - 1};
  const RealField<Scalar> v = velocity_field(fields, c);
  const IndexRange support = support_interval(fields.density, default_node_eps(fields.density));
  Array<Scalar> w(n_samples), p(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    w[i] = std::max(interpolate(fields.grid, fields.density, q[i], all), Scalar(0));
    p[i] = c.mass * interpolate(fields.grid, v.values, q[i], support);
  }
  w /= w.sum();
  return PhaseSpaceEnsemble<Scalar>(std::move(q), std::move(p), std::move(w));
}

// Quantile-sampled ensemble with the delta-ansatz momenta p = m v(q).
template <typename Scalar>
PhaseSpaceEnsemble<Scalar> init_phase_space(const HydroFields<Scalar>& fields,
                                            Eigen::Index n_samples,
                                            const PhysicalConstants<Scalar>& c = {}) {
  const TrajectoryEnsemble<Scalar> traj = init_trajectories(fields, n_samples, c);
  return PhaseSpaceEnsemble<Scalar>(traj.positions, traj.momenta, traj.weights);
}

}  // namespace qha
