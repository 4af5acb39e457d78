#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qha/kostin.hpp"
#include "qha/schrodinger.hpp"
#include "test_helpers.hpp"

using namespace qha;
using qha::testing::oscillator_ground_state;

namespace {

constexpr double kPeriod = 2 * std::numbers::pi;

// Analytic underdamped solution of m q'' = -m w^2 q - beta q' from (q0, p0).
double damped_q(double omega, double beta_over_m, double q0, double p0, double t) {
  const double gamma = beta_over_m / 2;
  const double wd = std::sqrt(omega * omega - gamma * gamma);
  return std::exp(-gamma * t) *
         (q0 * std::cos(wd * t) + (p0 + gamma * q0) / wd * std::sin(wd * t));
}

double density_kurtosis(const WaveFunction<double>& psi) {
  const Array<double> n = psi.density();
  const Array<double> q = psi.grid().positions();
  const double mean = trapezoid(psi.grid(), (n * q).eval());
  const double m2 = trapezoid(psi.grid(), (n * (q - mean).square()).eval());
  const double m4 = trapezoid(psi.grid(), (n * (q - mean).pow(4)).eval());
  return m4 / (m2 * m2);
}

}  // namespace

TEST_CASE("friction potential vanishes for real states and for zero friction") {
  Grid1D<double> grid(-10.0, 10.0, 1024);
  const auto real_psi = gaussian_packet(grid, 0.4, 1.0);
  const KostinParams<double> with_friction(0.3, 1.0);
  CHECK(friction_potential(real_psi, with_friction, 0.0).values.abs().maxCoeff() == 0.0);

  const auto moving = gaussian_packet(grid, 0.0, 1.0, 1.2);
  const KostinParams<double> no_friction(0.0, 1.0);
  CHECK(friction_potential(moving, no_friction, 0.0).values.abs().maxCoeff() == 0.0);
}

TEST_CASE("friction potential is the mean-free action ramp") {
  Grid1D<double> grid(-12.0, 12.0, 2048);
  const double k = 1.0, beta = 0.2;
  const auto psi = gaussian_packet(grid, 0.0, 1.0, k);
  const KostinParams<double> params(beta, 1.0);
  const auto ve = friction_potential(psi, params, 0.0);

  // S = hbar k q up to a constant, so V_e = (beta/m) hbar k (q - <q>)
  const double mean_q = mean_position(psi);
  const auto support = support_interval(psi.density(), 1e-9);
  for (Eigen::Index i = support.lo; i <= support.hi; ++i)
    CHECK(ve.values[i] ==
          doctest::Approx(beta * k * (grid.position(i) - mean_q)).epsilon(0).scale(1.0).epsilon(1e-8));

  const double expectation = trapezoid(grid, (psi.density() * ve.values).eval());
  CHECK(std::abs(expectation) <= 1e-8);
}

TEST_CASE("norm constant balances the mean action") {
  Grid1D<double> grid(-12.0, 12.0, 2049);  // node at q = 0 keeps the peak gauge centered
  const KostinParams<double> params(0.2, 1.0);

  const auto still = gaussian_packet(grid, 0.3, 1.0);
  CHECK(norm_constant(still, params) == 0.0);

  const auto centered = gaussian_packet(grid, 0.0, 1.0, 1.0);
  CHECK(std::abs(norm_constant(centered, params)) <= 1e-8);

  // explicit gauge S = hbar k q on a packet centered at <q> = 1
  const auto shifted = gaussian_packet(grid, 1.0, 1.0, 0.0);
  HydroFields<double> fields(grid, shifted.density(), grid.positions().eval());
  CHECK(norm_constant(fields, params) == doctest::Approx(-0.2).epsilon(1e-8));

  // the peak-pinned gauge from decompose shifts C but not the potential
  const auto moving = gaussian_packet(grid, 1.0, 1.0, 1.0);
  Eigen::Index peak = 0;
  moving.density().maxCoeff(&peak);
  const double expected = -0.2 * (mean_position(moving) - grid.position(peak));
  CHECK(norm_constant(moving, params) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("zero friction reduces the stepper to plain unitary stepping") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  auto psi = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
  const KostinParams<double> params(0.0, 1.0);
  const auto v = PotentialSpec<double>::harmonic(1.0);
  const double dt = 1e-3;
  for (int n = 0; n < 50; ++n) {
    const auto a = kostin_step(psi, params, n * dt, dt);
    const auto b = cn_step(psi, v, dt);
    double worst = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    CHECK(worst <= 1e-12);
    psi = a;
  }
}

TEST_CASE("damped packet stays gaussian while its energy drains") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const KostinParams<double> params(0.2, 1.0);
  const auto psi0 = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
  const auto result = run_bho(psi0, params, kPeriod / 2048, 3 * 2048, 64);

  for (std::size_t k = 1; k < result.energy.size(); ++k)
    CHECK(result.energy[k] <= result.energy[k - 1] + 1e-9);
  CHECK(result.energy.back() < result.energy.front());

  for (double n : result.norm) CHECK(std::abs(n - 1.0) <= 1e-8);

  CHECK(density_kurtosis(result.final_state) == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("the resting ground state is a fixed point of the damped flow") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const KostinParams<double> params(0.2, 1.0);
  const auto psi0 = oscillator_ground_state(grid, 1.0);
  const auto result = run_bho(psi0, params, 1e-3, 2000, 100);
  for (std::size_t k = 1; k < result.energy.size(); ++k)
    CHECK(result.energy[k] <= result.energy[k - 1] + 1e-9);
  CHECK(result.energy.back() == doctest::Approx(0.5).epsilon(1e-5));
  // the sampled ground state is not the exact discrete eigenstate, so a
  // residual action at the 1e-6 scale is the solver floor, not friction
  for (double c : result.c_t) CHECK(std::abs(c) <= 1e-5);
}

TEST_CASE("norm holds to 1e-8 over ten thousand damped steps") {
  Grid1D<double> grid(-8.0, 8.0, 512);
  const KostinParams<double> params(0.2, 1.0);
  auto psi = coherent_state(grid, 1.0, 0.8, 0.0, 0.0);
  const double dt = kPeriod / 2048;
  for (int n = 0; n < 10000; ++n) {
    psi = kostin_step(psi, params, n * dt, dt);
    if (n % 500 == 0) CHECK(std::abs(psi.norm() - 1.0) <= 1e-8);
  }
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-8);
}

TEST_CASE("damped packet center follows the classical oracle within a percent") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const KostinParams<double> params(0.2, 1.0);
  const double q0 = 1.0, p0 = 0.0;
  const double dt = kPeriod / 4096;
  const int n_steps = 3 * 4096;
  const int every = 64;

  const auto result = run_bho(coherent_state(grid, 1.0, q0, p0, 0.0), params, dt, n_steps, every);
  const auto oracle = ehrenfest_oracle(params, q0, p0, dt, n_steps, every);

  REQUIRE(result.times.size() == oracle.times.size());
  double worst = 0;
  for (std::size_t k = 0; k < result.times.size(); ++k)
    worst = std::max(worst, std::abs(result.mean_q[k] - oracle.q[k]));
  CHECK(worst / std::abs(q0) <= 0.01);
}

TEST_CASE("overdamped relaxation never crosses zero") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const KostinParams<double> params(5.0, 1.0);  // beta/m = 5 omega
  const auto result =
      run_bho(coherent_state(grid, 1.0, 1.0, 0.0, 0.0), params, 1e-3, 12000, 200);
  for (double q : result.mean_q) CHECK(q > 0.0);
  CHECK(result.mean_q.back() < 0.1);
}

TEST_CASE("resonant driving settles at the classical steady amplitude") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const double beta = 0.2, omega = 1.0, f0 = 0.08;
  KostinParams<double> params(beta, omega, ForcingSpec<double>::sinusoidal(f0, omega));
  const double dt = kPeriod / 1024;
  const int periods = 8;
  const int n_steps = periods * 1024;
  const int every = 16;

  const auto result = run_bho(oscillator_ground_state(grid, omega), params, dt, n_steps, every);
  const auto oracle = ehrenfest_oracle(params, 0.0, 0.0, dt, n_steps, every);

  double amp_q = 0, amp_cl = 0;
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    if (result.times[k] < (periods - 1) * kPeriod) continue;
    amp_q = std::max(amp_q, std::abs(result.mean_q[k]));
    amp_cl = std::max(amp_cl, std::abs(oracle.q[k]));
  }
  CHECK(std::abs(amp_q - amp_cl) / amp_cl <= 0.02);
  CHECK(std::abs(amp_cl - f0 / (beta * omega)) / (f0 / (beta * omega)) <= 0.02);
}

TEST_CASE("seeded kicks drive the quantum and classical runs identically") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const double dt = kPeriod / 4096;
  KostinParams<double> params(0.2, 1.0,
                              ForcingSpec<double>::seeded_kicks(0.04, 64 * dt, 271828));
  const int n_steps = 3 * 4096;
  const int every = 64;

  const auto result = run_bho(coherent_state(grid, 1.0, 1.0, 0.0, 0.0), params, dt, n_steps, every);
  const auto oracle = ehrenfest_oracle(params, 1.0, 0.0, dt, n_steps, every);
  double worst = 0;
  for (std::size_t k = 0; k < result.times.size(); ++k)
    worst = std::max(worst, std::abs(result.mean_q[k] - oracle.q[k]));
  CHECK(worst <= 0.01);
}

TEST_CASE("classical oracle reproduces closed-form oscillator solutions") {
  const KostinParams<double> undamped(0.0, 1.0);
  const double dt = 1e-3;
  const int n_steps = 6283;  // about one period
  const auto free_trace = ehrenfest_oracle(undamped, 1.0, 0.0, dt, n_steps);
  for (std::size_t k = 0; k < free_trace.times.size(); k += 500)
    CHECK(free_trace.q[k] == doctest::Approx(std::cos(free_trace.times[k])).epsilon(0).scale(1.0).epsilon(1e-8));

  const KostinParams<double> damped(0.2, 1.0);
  const auto damped_trace = ehrenfest_oracle(damped, 1.0, 0.0, dt, 3 * n_steps);
  for (std::size_t k = 0; k < damped_trace.times.size(); k += 700) {
    const double expected = damped_q(1.0, 0.2, 1.0, 0.0, damped_trace.times[k]);
    CHECK(std::abs(damped_trace.q[k] - expected) <= 1e-6);
  }

  // constant force settles at the static displacement
  const double q_s = 0.7;
  KostinParams<double> pushed(1.0, 1.0, ForcingSpec<double>::sinusoidal(q_s, 0.0, std::numbers::pi / 2));
  const auto settle = ehrenfest_oracle(pushed, 0.0, 0.0, 1e-2, 4000);
  CHECK(settle.q.back() == doctest::Approx(q_s).epsilon(1e-4));
}
