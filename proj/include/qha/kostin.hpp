#pragma once

#include <cmath>
#include <vector>

#include "qha/madelung.hpp"
#include "qha/potential.hpp"
#include "qha/schrodinger.hpp"
#include "qha/types.hpp"

namespace qha {

// Brownian harmonic oscillator parameters: friction beta, oscillator
// frequency omega, and the driving force realization.
template <typename Scalar = double>
struct KostinParams {
  Scalar beta = Scalar(0);
  Scalar omega = Scalar(1);
  ForcingSpec<Scalar> forcing;
  PhysicalConstants<Scalar> constants{};

  KostinParams() = default;
  KostinParams(Scalar beta_, Scalar omega_, ForcingSpec<Scalar> forcing_ = {},
               PhysicalConstants<Scalar> c = {})
      : beta(beta_), omega(omega_), forcing(std::move(forcing_)), constants(c) {
    if (!(beta >= Scalar(0))) throw std::invalid_argument("KostinParams: beta must be >= 0");
    if (!(omega > Scalar(0))) throw std::invalid_argument("KostinParams: omega must be > 0");
  }
};

// C(t) = -(beta/m) <S>: the constant that gives the friction term zero
// expectation in the state, so it neither feeds nor drains the norm budget.
// C depends on the action gauge; the friction potential (beta/m) S + C is
// gauge invariant.
template <typename Scalar>
Scalar norm_constant(const HydroFields<Scalar>& fields, const KostinParams<Scalar>& params) {
  const Array<Scalar> integrand = fields.density * fields.action;
  return -(params.beta / params.constants.mass) * trapezoid(fields.grid, integrand);
}

template <typename Scalar>
Scalar norm_constant(const WaveFunction<Scalar>& psi, const KostinParams<Scalar>& params,
                     Scalar eps_n) {
  return norm_constant(decompose(psi, eps_n, params.constants), params);
}

template <typename Scalar>
Scalar norm_constant(const WaveFunction<Scalar>& psi, const KostinParams<Scalar>& params) {
  return norm_constant(psi, params, default_node_eps(psi.density()));
}

// Friction potential (beta/m) S(q) - q F(t) + C(t), real by construction.
template <typename Scalar>
RealField<Scalar> friction_potential(const WaveFunction<Scalar>& psi,
                                     const KostinParams<Scalar>& params, Scalar t,
                                     Scalar eps_n) {
  const HydroFields<Scalar> fields = decompose(psi, eps_n, params.constants);
  const Scalar beta_over_m = params.beta / params.constants.mass;
  const Array<Scalar> friction = beta_over_m * fields.action;
  const Scalar c_t = -trapezoid(psi.grid(), (fields.density * friction).eval());
  RealField<Scalar> out(psi.grid());
  out.values = friction - psi.grid().positions() * params.forcing(t) + c_t;
  return out;
}

template <typename Scalar>
RealField<Scalar> friction_potential(const WaveFunction<Scalar>& psi,
                                     const KostinParams<Scalar>& params, Scalar t) {
  return friction_potential(psi, params, t, default_node_eps(psi.density()));
}

// One step of the nonlinear friction equation: Crank-Nicolson with the
// harmonic potential plus the state-dependent friction potential, treated
// explicitly and refined by a single midpoint corrector pass. The combined
// potential is real, so the norm survives to round-off.
template <typename Scalar>
WaveFunction<Scalar> kostin_step(const WaveFunction<Scalar>& psi,
                                 const KostinParams<Scalar>& params, Scalar t, Scalar dt) {
  const PhysicalConstants<Scalar>& c = params.constants;
  const Grid1D<Scalar>& grid = psi.grid();
  const Array<Scalar> base =
      Scalar(0.5) * c.mass * params.omega * params.omega * grid.positions().square();
  const Scalar t_mid = t + dt / 2;

  const RealField<Scalar> ve_pred = friction_potential(psi, params, t_mid);
  const WaveFunction<Scalar> predicted = cn_step(psi, (base + ve_pred.values).eval(), dt, c);

  WaveFunction<Scalar> midpoint(grid,
                                ((psi.values() + predicted.values()) / Scalar(2)).eval());
  midpoint.normalize();
  const RealField<Scalar> ve_corr = friction_potential(midpoint, params, t_mid);
  return cn_step(psi, (base + ve_corr.values).eval(), dt, c);
}

template <typename Scalar = double>
struct BhoResult {
  std::vector<Scalar> times;
  std::vector<Scalar> mean_q;
  std::vector<Scalar> mean_p;
  std::vector<Scalar> energy;  // <T> + <V_harmonic>, excluding the bath terms
  std::vector<Scalar> norm;
  std::vector<Scalar> c_t;
  std::vector<WaveFunction<Scalar>> snapshots;
  WaveFunction<Scalar> final_state;
};

// Repeated kostin_step with observables and C(t) recorded every
// snapshot_every steps (initial and final states always included).
template <typename Scalar>
BhoResult<Scalar> run_bho(const WaveFunction<Scalar>& psi0, const KostinParams<Scalar>& params,
                          Scalar dt, int n_steps, int snapshot_every = 1,
                          bool keep_snapshots = false) {
  if (snapshot_every < 1) snapshot_every = 1;
  const PhysicalConstants<Scalar>& c = params.constants;
  const Array<Scalar> base = Scalar(0.5) * c.mass * params.omega * params.omega *
                             psi0.grid().positions().square();

  BhoResult<Scalar> result{.final_state = psi0};
  auto record = [&](const WaveFunction<Scalar>& psi, Scalar t) {
    result.times.push_back(t);
    result.mean_q.push_back(mean_position(psi));
    result.mean_p.push_back(mean_momentum(psi, c));
    result.energy.push_back(total_energy(psi, base, c));
    result.norm.push_back(psi.norm());
    result.c_t.push_back(norm_constant(psi, params));
    if (keep_snapshots) result.snapshots.push_back(psi);
  };

  WaveFunction<Scalar> psi = psi0;
  record(psi, Scalar(0));
  for (int step = 0; step < n_steps; ++step) {
    psi = kostin_step(psi, params, Scalar(step) * dt, dt);
    if ((step + 1) % snapshot_every == 0 || step + 1 == n_steps)
      record(psi, Scalar(step + 1) * dt);
  }
  result.final_state = psi;
  return result;
}

template <typename Scalar = double>
struct ClassicalTrace {
  std::vector<Scalar> times;
  std::vector<Scalar> q;
  std::vector<Scalar> p;
};

// RK4 integration of the damped driven oscillator
//   dq/dt = p/m,  dp/dt = -m omega^2 q - (beta/m) p + F(t),
// sharing the forcing realization with the quantum run.
template <typename Scalar>
ClassicalTrace<Scalar> ehrenfest_oracle(const KostinParams<Scalar>& params, Scalar q0,
                                        Scalar p0, Scalar dt, int n_steps,
                                        int snapshot_every = 1) {
  if (snapshot_every < 1) snapshot_every = 1;
  const PhysicalConstants<Scalar>& c = params.constants;
  const auto accel = [&](Scalar q, Scalar p, Scalar t) {
    return -c.mass * params.omega * params.omega * q - (params.beta / c.mass) * p +
           params.forcing(t);
  };

  ClassicalTrace<Scalar> trace;
  Scalar q = q0, p = p0;
  trace.times.push_back(Scalar(0));
  trace.q.push_back(q);
  trace.p.push_back(p);
  for (int step = 0; step < n_steps; ++step) {
    const Scalar t = Scalar(step) * dt;
    const Scalar k1q = p / c.mass, k1p = accel(q, p, t);
    const Scalar k2q = (p + dt / 2 * k1p) / c.mass,
                 k2p = accel(q + dt / 2 * k1q, p + dt / 2 * k1p, t + dt / 2);
    const Scalar k3q = (p + dt / 2 * k2p) / c.mass,
                 k3p = accel(q + dt / 2 * k2q, p + dt / 2 * k2p, t + dt / 2);
    const Scalar k4q = (p + dt * k3p) / c.mass,
                 k4p = accel(q + dt * k3q, p + dt * k3p, t + dt);
    q += dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    p += dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if ((step + 1) % snapshot_every == 0 || step + 1 == n_steps) {
      trace.times.push_back(Scalar(step + 1) * dt);
      trace.q.push_back(q);
      trace.p.push_back(p);
    }
  }
  return trace;
}

}  // namespace qha
