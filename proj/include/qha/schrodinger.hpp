#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qha/errors.hpp"
#include "qha/madelung.hpp"
#include "qha/potential.hpp"
#include "qha/types.hpp"

namespace qha {

// Boundary density above which a run is aborted: the packet has reached the
// Dirichlet wall and reflections would contaminate everything downstream.
inline constexpr double kWallDensityLimit = 1e-8;

namespace detail {

// Solve the tridiagonal system (a, b, c) x = r in place (Thomas algorithm).
// b is the diagonal, a the sub-, c the super-diagonal.
template <typename Scalar>
void solve_tridiagonal(const ComplexArray<Scalar>& a, ComplexArray<Scalar> b,
                       const ComplexArray<Scalar>& c, ComplexArray<Scalar>& r) {
  const Eigen::Index n = b.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const std::complex<Scalar> w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  r[n - 1] /= b[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) r[i] = (r[i] - c[i] * r[i + 1]) / b[i];
}

}  // namespace detail

// One Crank-Nicolson step of i hbar dpsi/dt = [-hbar^2/2m d^2/dq^2 + V] psi
// with homogeneous Dirichlet walls. The scheme is unitary for real V, so the
// norm is preserved to round-off. V is the nodal potential at mid-step time.
template <typename Scalar>
WaveFunction<Scalar> cn_step(const WaveFunction<Scalar>& psi, const Array<Scalar>& potential,
                             Scalar dt, const PhysicalConstants<Scalar>& c = {}) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("cn_step: dt must be positive");
  const Grid1D<Scalar>& grid = psi.grid();
  const Eigen::Index n = grid.size();
  const Scalar dq = grid.dq();
  const Scalar kin = c.hbar * c.hbar / (c.mass * dq * dq);
  const std::complex<Scalar> ilambda(Scalar(0), dt / (2 * c.hbar));

  ComplexArray<Scalar> sub(n), diag(n), sup(n), rhs(n);
  const std::complex<Scalar> off = ilambda * (-kin / Scalar(2));
  for (Eigen::Index i = 0; i < n; ++i) {
    sub[i] = off;
    sup[i] = off;
    diag[i] = Scalar(1) + ilambda * (kin + potential[i]);
  }
  const auto& v = psi.values();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::complex<Scalar> acc = (Scalar(1) - ilambda * (kin + potential[i])) * v[i];
    if (i > 0) acc -= off * v[i - 1];
    if (i + 1 < n) acc -= off * v[i + 1];
    rhs[i] = acc;
  }
  detail::solve_tridiagonal(sub, diag, sup, rhs);

  WaveFunction<Scalar> out(grid, std::move(rhs));
  const Scalar wall = std::max(std::norm(out.values()[0]), std::norm(out.values()[n - 1]));
  if (wall > Scalar(kWallDensityLimit))
    throw StabilityError("cn_step: boundary density " + std::to_string(double(wall)) +
                         " exceeds wall limit; enlarge the domain");
  return out;
}

template <typename Scalar>
WaveFunction<Scalar> cn_step(const WaveFunction<Scalar>& psi, const PotentialSpec<Scalar>& V,
                             Scalar dt, const PhysicalConstants<Scalar>& c = {},
                             Scalar t = Scalar(0)) {
  return cn_step(psi, V.values(psi.grid(), t + dt / 2, c), dt, c);
}

template <typename Scalar = double>
struct EvolutionResult {
  std::vector<Scalar> times;
  std::vector<WaveFunction<Scalar>> states;
  std::vector<Scalar> mean_q;
  std::vector<Scalar> mean_p;
  std::vector<Scalar> energy;
  std::vector<Scalar> norm;
};

// Repeated cn_step with observables recorded every snapshot_every steps
// (the initial state and the final state are always recorded).
template <typename Scalar>
EvolutionResult<Scalar> evolve(const WaveFunction<Scalar>& psi0, const PotentialSpec<Scalar>& V,
                               Scalar dt, int n_steps, int snapshot_every = 1,
                               const PhysicalConstants<Scalar>& c = {}, Scalar t0 = Scalar(0)) {
  if (snapshot_every < 1) snapshot_every = 1;
  EvolutionResult<Scalar> result;
  auto record = [&](const WaveFunction<Scalar>& psi, Scalar t) {
    result.times.push_back(t);
    result.states.push_back(psi);
    result.mean_q.push_back(mean_position(psi));
    result.mean_p.push_back(mean_momentum(psi, c));
    result.energy.push_back(total_energy(psi, V.values(psi.grid(), t, c), c));
    result.norm.push_back(psi.norm());
  };

  WaveFunction<Scalar> psi = psi0;
  record(psi, t0);
  for (int step = 0; step < n_steps; ++step) {
    const Scalar t = t0 + Scalar(step) * dt;
    psi = cn_step(psi, V, dt, c, t);
    if ((step + 1) % snapshot_every == 0 || step + 1 == n_steps)
      record(psi, t0 + Scalar(step + 1) * dt);
  }
  return result;
}

// Classical center of the omega-oscillator at time t.
template <typename Scalar>
std::pair<Scalar, Scalar> oscillator_center(Scalar omega, Scalar q0, Scalar p0, Scalar t,
                                            const PhysicalConstants<Scalar>& c = {}) {
  const Scalar qc = q0 * std::cos(omega * t) + p0 / (c.mass * omega) * std::sin(omega * t);
  const Scalar pc = p0 * std::cos(omega * t) - c.mass * omega * q0 * std::sin(omega * t);
  return {qc, pc};
}

// Coherent state of the omega-oscillator: minimum-uncertainty Gaussian of
// width sigma^2 = hbar/(2 m omega) riding the classical orbit, with phase
// slope p_c(t)/hbar. Global phase is fixed so the phase vanishes at the
// packet center.
template <typename Scalar>
WaveFunction<Scalar> coherent_state(const Grid1D<Scalar>& grid, Scalar omega, Scalar q0,
                                    Scalar p0, Scalar t, const PhysicalConstants<Scalar>& c = {}) {
  if (!(omega > Scalar(0)))
    throw std::invalid_argument("coherent_state: omega must be positive");
  const auto [qc, pc] = oscillator_center(omega, q0, p0, t, c);
  const Scalar sigma2 = c.hbar / (2 * c.mass * omega);
  ComplexArray<Scalar> values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Scalar x = grid.position(i) - qc;
    values[i] = std::polar(std::exp(-x * x / (4 * sigma2)), pc * x / c.hbar);
  }
  WaveFunction<Scalar> psi(grid, std::move(values));
  psi.normalize();
  return psi;
}

}  // namespace qha
