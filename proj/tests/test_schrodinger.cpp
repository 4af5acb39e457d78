#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "qha/schrodinger.hpp"
#include "test_helpers.hpp"

using namespace qha;
using qha::testing::default_grid;
using qha::testing::oscillator_ground_state;
using qha::testing::random_nodeless_state;

namespace {

constexpr double kPeriod = 2 * std::numbers::pi;

// |<a|b>| via trapezoid quadrature.
double overlap(const WaveFunction<double>& a, const WaveFunction<double>& b) {
  ComplexArray<double> prod = a.values().conjugate() * b.values();
  Array<double> re(prod.size()), im(prod.size());
  for (Eigen::Index i = 0; i < prod.size(); ++i) {
    re[i] = prod[i].real();
    im[i] = prod[i].imag();
  }
  const double r = trapezoid(a.grid(), re);
  const double m = trapezoid(a.grid(), im);
  return std::hypot(r, m);
}

// L2 distance minimized over a global phase.
double phase_free_distance(const WaveFunction<double>& a, const WaveFunction<double>& b) {
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - overlap(a, b))));
}

double packet_variance(const WaveFunction<double>& psi) {
  const Array<double> n = psi.density();
  const Array<double> q = psi.grid().positions();
  const double mean = trapezoid(psi.grid(), (n * q).eval());
  return trapezoid(psi.grid(), (n * (q - mean).square()).eval());
}

WaveFunction<double> reflected(const WaveFunction<double>& psi) {
  ComplexArray<double> v = psi.values().reverse();
  return WaveFunction<double>(psi.grid(), std::move(v));
}

}  // namespace

TEST_CASE("a vanishing time step leaves the state untouched") {
  const auto grid = default_grid();
  const auto psi = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
  const auto v = PotentialSpec<double>::harmonic(1.0);
  const auto stepped = cn_step(psi, v, 1e-12);
  double worst = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(stepped.values()[i] - psi.values()[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("the oscillator ground state survives a full period") {
  Grid1D<double> grid(-12.0, 12.0, 2048);
  const auto psi0 = oscillator_ground_state(grid, 1.0);
  const auto v = PotentialSpec<double>::harmonic(1.0);
  const double dt = kPeriod / 2048;
  WaveFunction<double> psi = psi0;
  for (int i = 0; i < 2048; ++i) psi = cn_step(psi, v, dt);
  CHECK(overlap(psi0, psi) >= 1.0 - 1e-6);
}

TEST_CASE("free gaussian spreads at the analytic rate") {
  Grid1D<double> grid(-16.0, 16.0, 2048);
  const auto psi0 = gaussian_packet(grid, 0.0, 1.0);
  const auto v = PotentialSpec<double>::free();
  const double t_final = 2.0;
  const int n_steps = 2048;
  WaveFunction<double> psi = psi0;
  for (int i = 0; i < n_steps; ++i) psi = cn_step(psi, v, t_final / n_steps);
  // sigma^2(t) = sigma0^2 + (hbar t / 2 m sigma0)^2 = 2 at t = 2
  CHECK(packet_variance(psi) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("norm is preserved to round-off at every step") {
  Grid1D<double> grid(-12.0, 12.0, 1024);
  auto psi = coherent_state(grid, 1.0, 1.0, 0.5, 0.0);
  const auto v = PotentialSpec<double>::harmonic(1.0);
  const double dt = kPeriod / 512;
  for (int i = 0; i < 512; ++i) {
    psi = cn_step(psi, v, dt);
    CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("evolve with zero steps returns only the initial state") {
  const auto grid = default_grid();
  const auto psi = oscillator_ground_state(grid);
  const auto result = evolve(psi, PotentialSpec<double>::harmonic(1.0), 0.01, 0);
  CHECK(result.times.size() == 1);
  CHECK(result.states.size() == 1);
  CHECK(result.times[0] == 0.0);
}

TEST_CASE("coherent packet center follows the classical orbit for three periods") {
  Grid1D<double> grid(-9.0, 9.0, 4096);
  const double omega = 1.0, q0 = 1.0, p0 = 0.0;
  const auto psi0 = coherent_state(grid, omega, q0, p0, 0.0);
  const int n_steps = 3 * 4096;
  const double dt = kPeriod / 4096;
  const auto result =
      evolve(psi0, PotentialSpec<double>::harmonic(omega), dt, n_steps, 64);

  for (std::size_t k = 0; k < result.times.size(); ++k) {
    const auto [qc, pc] =
        oscillator_center(omega, q0, p0, result.times[k], PhysicalConstants<double>{});
    CHECK(std::abs(result.mean_q[k] - qc) < 1e-4);
  }
}

TEST_CASE("energy stays flat over three periods of a moving packet") {
  Grid1D<double> grid(-9.0, 9.0, 8192);
  const auto psi0 = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
  const auto result = evolve(psi0, PotentialSpec<double>::harmonic(1.0), kPeriod / 1024,
                             3 * 1024, 64);
  const double e0 = result.energy.front();
  for (double e : result.energy) CHECK(std::abs(e - e0) / std::abs(e0) <= 1e-6);
}

TEST_CASE("stepping commutes with reflection for even potentials") {
  Grid1D<double> grid(-14.0, 14.0, 512);
  // even quartic well, fed through the tabulated path
  RealField<double> table(grid,
                          (0.3 * grid.positions().square() +
                           0.1 * grid.positions().square().square())
                              .eval());
  const auto v = PotentialSpec<double>::tabulated(table);
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto psi = random_nodeless_state(grid, 300 + k);
    const double dt = 0.01;
    WaveFunction<double> a = reflected(psi);
    for (int i = 0; i < 20; ++i) a = cn_step(a, v, dt);
    WaveFunction<double> b = psi;
    for (int i = 0; i < 20; ++i) b = cn_step(b, v, dt);
    b = reflected(b);
    double worst = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("a tabulated harmonic well is indistinguishable from the closed form") {
  Grid1D<double> grid(-12.0, 12.0, 1024);
  RealField<double> table(grid, (0.5 * grid.positions().square()).eval());
  const auto tabulated = PotentialSpec<double>::tabulated(table);
  const auto analytic = PotentialSpec<double>::harmonic(1.0);

  auto psi_t = coherent_state(grid, 1.0, 1.0, 0.0, 0.0);
  auto psi_a = psi_t;
  for (int i = 0; i < 100; ++i) {
    psi_t = cn_step(psi_t, tabulated, 0.005);
    psi_a = cn_step(psi_a, analytic, 0.005);
  }
  double worst = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(psi_t.values()[i] - psi_a.values()[i]));
  CHECK(worst <= 1e-12);

  // tabulated classical force recovers -dV/dq by finite differences
  const Array<double> force = tabulated.classical_force(grid, 0.0);
  for (Eigen::Index i = 4; i < grid.size() - 4; i += 100)
    CHECK(force[i] == doctest::Approx(-grid.position(i)).epsilon(0).scale(1.0).epsilon(1e-8));

  // grid mismatch is refused
  Grid1D<double> other(-5.0, 5.0, 128);
  CHECK_THROWS_AS(tabulated.values(other, 0.0), std::invalid_argument);
}

TEST_CASE("time stepping converges at second order") {
  Grid1D<double> grid(-12.0, 12.0, 4096);
  const double omega = 1.0, q0 = 1.0, p0 = 0.0, t_final = kPeriod;
  const auto psi0 = coherent_state(grid, omega, q0, p0, 0.0);
  const auto v = PotentialSpec<double>::harmonic(omega);
  const auto oracle = coherent_state(grid, omega, q0, p0, t_final);

  auto error_at = [&](int n_steps) {
    WaveFunction<double> psi = psi0;
    const double dt = t_final / n_steps;
    for (int i = 0; i < n_steps; ++i) psi = cn_step(psi, v, dt);
    return phase_free_distance(psi, oracle);
  };
  const double coarse = error_at(256);
  const double fine = error_at(512);
  CHECK(coarse / fine >= 3.5);
  CHECK(coarse / fine <= 4.5);
}

TEST_CASE("coherent state factory hits its classical anchors") {
  Grid1D<double> grid(-12.0, 12.0, 2048);

  const auto at_zero = coherent_state(grid, 1.0, 1.0, 0.3, 0.0);
  CHECK(mean_position(at_zero) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(mean_momentum(at_zero) == doctest::Approx(0.3).epsilon(1e-7));

  const auto quarter = coherent_state(grid, 1.0, 1.0, 0.0, std::numbers::pi / 2);
  CHECK(std::abs(mean_position(quarter)) < 1e-8);
  CHECK(mean_momentum(quarter) == doctest::Approx(-1.0).epsilon(1e-8));

  // q0 = p0 = 0 is the stationary ground state at any time
  const auto g1 = coherent_state(grid, 1.0, 0.0, 0.0, 0.0);
  const auto g2 = coherent_state(grid, 1.0, 0.0, 0.0, 5.31);
  CHECK(overlap(g1, g2) >= 1.0 - 1e-12);
}

TEST_CASE("a packet reaching the wall aborts the run") {
  Grid1D<double> grid(-8.0, 8.0, 512);
  auto psi = gaussian_packet(grid, 5.0, 0.8, 4.0);  // fast packet near the wall
  const auto v = PotentialSpec<double>::free();
  auto march = [&] {
    for (int i = 0; i < 4000; ++i) psi = cn_step(psi, v, 0.005);
  };
  CHECK_THROWS_AS(march(), StabilityError);
}
