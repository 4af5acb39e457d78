#pragma once

#include <cmath>
#include <stdexcept>

#include "qha/kde.hpp"
#include "qha/madelung.hpp"
#include "qha/numerics.hpp"
#include "qha/parallel.hpp"
#include "qha/potential.hpp"
#include "qha/types.hpp"

namespace qha {

// Weighted bundle of quantum trajectories (q_i, p_i, w_i). The weights are
// Lagrangian probability masses: stepping never changes them, which is the
// discrete form of the continuity equation.
template <typename Scalar = double>
struct TrajectoryEnsemble {
  Array<Scalar> positions;
  Array<Scalar> momenta;
  Array<Scalar> weights;

  TrajectoryEnsemble(Array<Scalar> q, Array<Scalar> p, Array<Scalar> w)
      : positions(std::move(q)), momenta(std::move(p)), weights(std::move(w)) {
    if (positions.size() != momenta.size() || positions.size() != weights.size())
      throw std::invalid_argument("TrajectoryEnsemble: component sizes differ");
    if (std::abs(weights.sum() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("TrajectoryEnsemble: weights must sum to one");
  }

  Eigen::Index size() const { return positions.size(); }
};

// Nodal classical force -dV/dq and quantum force -dV_qu/dq, with the node
// range on which they are trustworthy.
template <typename Scalar = double>
struct ForceField {
  Grid1D<Scalar> grid;
  Array<Scalar> classical_force;
  Array<Scalar> quantum_force;
  IndexRange support;

  Array<Scalar> total() const { return classical_force + quantum_force; }
};

// Assemble the force field at time t from the external potential and the
// current density. The quantum force follows the density and is zero beyond
// its support: where the density has decayed past eps_n no quantum force is
// inferable, and samples out there move classically. The field is therefore
// valid on the whole grid.
template <typename Scalar>
ForceField<Scalar> build_force_field(const PotentialSpec<Scalar>& V,
                                     const RealField<Scalar>& density,
                                     const PhysicalConstants<Scalar>& c, Scalar eps_n,
                                     Scalar t = Scalar(0)) {
  const IndexRange support = support_interval(density.values, eps_n);
  const RealField<Scalar> vqu = quantum_potential(density, c, eps_n);
  return ForceField<Scalar>{density.grid, V.classical_force(density.grid, t, c),
                            -derivative(vqu.values, density.grid.dq(), support),
                            IndexRange{0, density.grid.size() - 1}};
}

template <typename Scalar>
ForceField<Scalar> build_force_field(const PotentialSpec<Scalar>& V,
                                     const RealField<Scalar>& density,
                                     const PhysicalConstants<Scalar>& c = {}) {
  return build_force_field(V, density, c, default_node_eps(density.values));
}

// Classical-only field valid on the whole grid (no density involved).
template <typename Scalar>
ForceField<Scalar> classical_force_field(const PotentialSpec<Scalar>& V,
                                         const Grid1D<Scalar>& grid,
                                         const PhysicalConstants<Scalar>& c = {},
                                         Scalar t = Scalar(0)) {
  return ForceField<Scalar>{grid, V.classical_force(grid, t, c),
                            Array<Scalar>::Zero(grid.size()),
                            IndexRange{0, grid.size() - 1}};
}

// Advect trajectories along the flow: q += v(q) dt with v interpolated from
// the hydrodynamic velocity field, then pin momenta to m v(q_new). Weights
// are untouched.
template <typename Scalar>
TrajectoryEnsemble<Scalar> bohmian_advect_step(const TrajectoryEnsemble<Scalar>& ens,
                                               const HydroFields<Scalar>& fields, Scalar dt,
                                               const PhysicalConstants<Scalar>& c = {}) {
  const RealField<Scalar> v = velocity_field(fields, c);
  const IndexRange support = support_interval(fields.density, default_node_eps(fields.density));
  TrajectoryEnsemble<Scalar> out = ens;
  parallel_for(ens.size(), [&](std::ptrdiff_t i) {
    const Scalar q_new =
        ens.positions[i] + interpolate(fields.grid, v.values, ens.positions[i], support) * dt;
    out.positions[i] = q_new;
    out.momenta[i] = c.mass * interpolate(fields.grid, v.values, q_new, support);
  });
  return out;
}

// Symplectic-Euler phase-space step: p += F_total(q) dt, then q += p dt / m.
template <typename Scalar>
TrajectoryEnsemble<Scalar> newtonian_step(const TrajectoryEnsemble<Scalar>& ens,
                                          const ForceField<Scalar>& force, Scalar dt,
                                          const PhysicalConstants<Scalar>& c = {}) {
  const Array<Scalar> total = force.total();
  TrajectoryEnsemble<Scalar> out = ens;
  parallel_for(ens.size(), [&](std::ptrdiff_t i) {
    const Scalar p_new =
        ens.momenta[i] + interpolate(force.grid, total, ens.positions[i], force.support) * dt;
    out.momenta[i] = p_new;
    out.positions[i] = ens.positions[i] + p_new / c.mass * dt;
  });
  return out;
}

// max_i |p_i - dS/dq(q_i)|: how far the ensemble is from the single-valued
// momentum field that admits a wavefunction description.
template <typename Scalar>
Scalar wave_particle_residual(const TrajectoryEnsemble<Scalar>& ens,
                              const HydroFields<Scalar>& fields,
                              const PhysicalConstants<Scalar>& c = {}) {
  const RealField<Scalar> v = velocity_field(fields, c);
  const IndexRange support = support_interval(fields.density, default_node_eps(fields.density));
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const Scalar p_field =
        c.mass * interpolate(fields.grid, v.values, ens.positions[i], support);
    worst = std::max(worst, std::abs(ens.momenta[i] - p_field));
  }
  return worst;
}

// Kernel density estimate of n(q) from the weighted trajectory positions.
template <typename Scalar>
RealField<Scalar> density_from_trajectories(const TrajectoryEnsemble<Scalar>& ens,
                                            const Grid1D<Scalar>& grid, Scalar bandwidth) {
  return kde_density(grid, ens.positions, ens.weights, bandwidth);
}

// Positions at the midpoints of N equal-probability slices of the density
// (inverse CDF at quantiles (k+1/2)/N), equal weights.
template <typename Scalar>
Array<Scalar> sample_by_inverse_cdf(const RealField<Scalar>& density, Eigen::Index n_samples) {
  const Grid1D<Scalar>& grid = density.grid;
  const Eigen::Index n = grid.size();
  Array<Scalar> cdf(n);
  cdf[0] = Scalar(0);
  for (Eigen::Index i = 1; i < n; ++i)
    cdf[i] = cdf[i - 1] + Scalar(0.5) * (density.values[i - 1] + density.values[i]) * grid.dq();
  const Scalar total = cdf[n - 1];

  Array<Scalar> out(n_samples);
  Eigen::Index cell = 0;
  for (Eigen::Index k = 0; k < n_samples; ++k) {
    const Scalar target = total * (Scalar(k) + Scalar(0.5)) / Scalar(n_samples);
    while (cell < n - 2 && cdf[cell + 1] < target) ++cell;
    const Scalar span = cdf[cell + 1] - cdf[cell];
    const Scalar f = span > Scalar(0) ? (target - cdf[cell]) / span : Scalar(0.5);
    out[k] = grid.position(cell) + f * grid.dq();
  }
  return out;
}

// Trajectory bundle realizing the delta-ansatz for the given fields:
// positions by inverse-CDF sampling of the density, momenta pinned to the
// local momentum field m v(q), equal weights.
template <typename Scalar>
TrajectoryEnsemble<Scalar> init_trajectories(const HydroFields<Scalar>& fields,
                                             Eigen::Index n_samples,
                                             const PhysicalConstants<Scalar>& c = {}) {
  RealField<Scalar> density(fields.grid, fields.density);
  Array<Scalar> q = sample_by_inverse_cdf(density, n_samples);
  const RealField<Scalar> v = velocity_field(fields, c);
  const IndexRange support = support_interval(fields.density, default_node_eps(fields.density));
  Array<Scalar> p(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i)
    p[i] = c.mass * interpolate(fields.grid, v.values, q[i], support);
  Array<Scalar> w = Array<Scalar>::Constant(n_samples, Scalar(1) / Scalar(n_samples));
  return TrajectoryEnsemble<Scalar>(std::move(q), std::move(p), std::move(w));
}

}  // namespace qha
