#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qha/schrodinger.hpp"
#include "qha/trajectories.hpp"
#include "test_helpers.hpp"

using namespace qha;
using qha::testing::default_grid;
using qha::testing::gaussian_density;
using qha::testing::oscillator_ground_state;

namespace {

constexpr double kPeriod = 2 * std::numbers::pi;

HydroFields<double> coherent_fields(const Grid1D<double>& grid, double omega, double q0,
                                    double p0, double t) {
  return decompose(coherent_state(grid, omega, q0, p0, t));
}

TrajectoryEnsemble<double> three_point_bundle(double a, double b, double c, double p = 0.0) {
  Array<double> q(3), mom(3), w(3);
  q << a, b, c;
  mom << p, p, p;
  w << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  return TrajectoryEnsemble<double>(q, mom, w);
}

}  // namespace

TEST_CASE("free potential and uniform density carry no force at all") {
  Grid1D<double> grid(-6.0, 6.0, 256);
  RealField<double> density(grid, Array<double>::Constant(grid.size(), 0.2));
  const auto force = build_force_field(PotentialSpec<double>::free(), density);
  CHECK(force.classical_force.abs().maxCoeff() == 0.0);
  CHECK(force.quantum_force.abs().maxCoeff() < 1e-9);
}

TEST_CASE("quantum force cancels the harmonic force on the ground state") {
  Grid1D<double> grid(-12.0, 12.0, 2048);
  const auto psi = oscillator_ground_state(grid, 1.0);
  RealField<double> density(grid, psi.density());
  const auto force = build_force_field(PotentialSpec<double>::harmonic(1.0), density);
  const Array<double> net = force.total();
  const auto region = support_interval(density.values, 1e-9 * density.values.maxCoeff());
  for (Eigen::Index i = region.lo; i <= region.hi; ++i) CHECK(std::abs(net[i]) < 1e-5);
}

TEST_CASE("quantum force of a unit gaussian is linear in position") {
  Grid1D<double> grid(-10.0, 10.0, 2049);
  RealField<double> density(grid, gaussian_density(grid, 0.0, 1.0));
  const auto force = build_force_field(PotentialSpec<double>::free(), density);
  // V_qu = 1/4 - q^2/8, so the quantum force is q/4
  for (double q : {-3.0, -1.2, 0.0, 0.8, 2.4}) {
    const auto i = static_cast<Eigen::Index>(std::round((q - grid.q_min()) / grid.dq()));
    CHECK(force.quantum_force[i] ==
          doctest::Approx(grid.position(i) / 4).epsilon(0).scale(1.0).epsilon(1e-5));
  }
  CHECK(force.classical_force.abs().maxCoeff() == 0.0);
}

TEST_CASE("plane-wave advection is uniform motion") {
  Grid1D<double> grid(-20.0, 20.0, 512);
  HydroFields<double> fields(grid, Array<double>::Constant(grid.size(), 1.0 / 40.0),
                             (2.0 * grid.positions()).eval());  // dS/dq = 2
  auto ens = three_point_bundle(-1.0, 0.0, 2.5);
  const double dt = 0.01;
  for (int n = 0; n < 100; ++n) ens = bohmian_advect_step(ens, fields, dt);
  CHECK(ens.positions[0] == doctest::Approx(-1.0 + 2.0).epsilon(1e-12));
  CHECK(ens.positions[1] == doctest::Approx(0.0 + 2.0).epsilon(1e-12));
  CHECK(ens.positions[2] == doctest::Approx(2.5 + 2.0).epsilon(1e-12));
  CHECK(ens.momenta[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("stationary fields leave trajectories in place") {
  const auto grid = default_grid();
  const auto fields = decompose(oscillator_ground_state(grid, 1.0));
  auto ens = three_point_bundle(-0.5, 0.1, 0.9);
  for (int n = 0; n < 200; ++n) ens = bohmian_advect_step(ens, fields, 0.01);
  CHECK(ens.positions[0] == -0.5);
  CHECK(ens.positions[1] == 0.1);
  CHECK(ens.positions[2] == 0.9);
}

TEST_CASE("advected trajectories ride the coherent packet rigidly") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const double omega = 1.0, q0 = 1.0, p0 = 0.0;
  const int n_steps = 2048;
  const double dt = kPeriod / n_steps;

  auto ens = init_trajectories(coherent_fields(grid, omega, q0, p0, 0.0), 256);
  const Array<double> start = ens.positions;
  for (int n = 0; n < n_steps; ++n) {
    const double t_mid = (n + 0.5) * dt;
    ens = bohmian_advect_step(ens, coherent_fields(grid, omega, q0, p0, t_mid), dt);
  }
  // one full period: every trajectory returns to its starting point
  CHECK((ens.positions - start).abs().maxCoeff() < 1e-3);
}

TEST_CASE("force-free newtonian stepping is uniform motion") {
  Grid1D<double> grid(-30.0, 30.0, 512);
  const auto force = classical_force_field(PotentialSpec<double>::free(), grid);
  auto ens = three_point_bundle(-1.0, 0.0, 1.0, 1.0);  // p = 1, m = 1
  for (int n = 0; n < 1000; ++n) ens = newtonian_step(ens, force, 1e-3);
  CHECK(ens.positions[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ens.positions[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ens.positions[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ground-state force balance keeps resting trajectories still") {
  Grid1D<double> grid(-8.0, 8.0, 4096);
  const auto psi = oscillator_ground_state(grid, 1.0);
  RealField<double> density(grid, psi.density());
  const auto force = build_force_field(PotentialSpec<double>::harmonic(1.0), density);

  auto ens = init_trajectories(decompose(psi), 128);
  const Array<double> start = ens.positions;
  const int n_steps = 4096;
  for (int n = 0; n < n_steps; ++n) ens = newtonian_step(ens, force, kPeriod / n_steps);
  // floor set by round-off noise in the V_qu finite-difference chain,
  // integrated coherently over the period
  CHECK((ens.positions - start).abs().maxCoeff() < 1e-6);
}

TEST_CASE("newtonian and advected trajectories agree over one period") {
  Grid1D<double> grid(-9.0, 9.0, 2048);
  const double omega = 1.0, q0 = 1.0, p0 = 0.0;
  const int n_steps = 4096;
  const double dt = kPeriod / n_steps;
  const auto v = PotentialSpec<double>::harmonic(omega);

  auto bohm = init_trajectories(coherent_fields(grid, omega, q0, p0, 0.0), 256);
  auto newton = bohm;
  double worst_gap = 0;
  for (int n = 0; n < n_steps; ++n) {
    const double t_mid = (n + 0.5) * dt;
    const auto fields = coherent_fields(grid, omega, q0, p0, t_mid);
    bohm = bohmian_advect_step(bohm, fields, dt);
    RealField<double> density(grid, fields.density);
    newton = newtonian_step(newton, build_force_field(v, density), dt);
    worst_gap = std::max(worst_gap, (bohm.positions - newton.positions).abs().maxCoeff());
  }
  CHECK(worst_gap <= 1e-3);
}

TEST_CASE("freshly pinned momenta have zero residual and offsets read back exactly") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const auto fields = coherent_fields(grid, 1.0, 1.0, 0.5, 0.3);
  auto ens = init_trajectories(fields, 512);
  CHECK(wave_particle_residual(ens, fields) <= 1e-10);

  ens.momenta += 0.1;
  CHECK(wave_particle_residual(ens, fields) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("momentum field residual stays flat over two periods") {
  Grid1D<double> grid(-9.0, 9.0, 2048);
  const double omega = 1.0, q0 = 1.0, p0 = 0.0;
  const int per_period = 4096;
  const double dt = kPeriod / per_period;
  const auto v = PotentialSpec<double>::harmonic(omega);

  auto ens = init_trajectories(coherent_fields(grid, omega, q0, p0, 0.0), 256);
  double max_first = 0, max_second = 0;
  for (int n = 0; n < 2 * per_period; ++n) {
    const auto fields_mid = coherent_fields(grid, omega, q0, p0, (n + 0.5) * dt);
    RealField<double> density(grid, fields_mid.density);
    ens = newtonian_step(ens, build_force_field(v, density), dt);
    const double r =
        wave_particle_residual(ens, coherent_fields(grid, omega, q0, p0, (n + 1) * dt));
    (n < per_period ? max_first : max_second) = std::max(n < per_period ? max_first : max_second, r);
  }
  CHECK(max_first <= 1e-3);
  CHECK(max_second <= 1e-3);
  // self-sustained: no secular growth from the first period to the second
  CHECK(max_second <= 10.0 * max_first);
}

TEST_CASE("a point mass reconstructs as a single kernel bump") {
  Grid1D<double> grid(-5.0, 5.0, 513);
  Array<double> q(1), p(1), w(1);
  q << 0.0;
  p << 0.0;
  w << 1.0;
  TrajectoryEnsemble<double> ens(q, p, w);
  const auto density = density_from_trajectories(ens, grid, 0.2);
  Eigen::Index peak = 0;
  density.values.maxCoeff(&peak);
  CHECK(grid.position(peak) == 0.0);
  CHECK(trapezoid(grid, density.values) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("silverman-bandwidth estimate tracks a sampled gaussian in L1") {
  Grid1D<double> grid(-8.0, 8.0, 1024);
  const Eigen::Index n_samples = 10000;
  Array<double> q(n_samples), p(n_samples), w(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    q[i] = rng::normal(42, 0, std::uint64_t(i));
    p[i] = 0.0;
    w[i] = 1.0 / double(n_samples);
  }
  TrajectoryEnsemble<double> ens(q, p, w);
  const double h = silverman_bandwidth(ens.positions, ens.weights);
  CHECK(h > 0.05);
  CHECK(h < 0.5);
  const auto density = density_from_trajectories(ens, grid, h);
  const Array<double> truth = gaussian_density(grid, 0.0, 1.0);
  const double l1 = trapezoid(grid, (density.values - truth).abs().eval());
  CHECK(l1 <= 0.05);
}

TEST_CASE("reconstructed density always carries unit mass") {
  Grid1D<double> grid(-8.0, 8.0, 512);
  for (std::uint64_t k = 0; k < 8; ++k) {
    const Eigen::Index n = 50 + 100 * k;
    Array<double> q(n), p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      q[i] = 3.0 * (2 * rng::uniform(99, k, std::uint64_t(i)) - 1);
      p[i] = 0.0;
      w[i] = rng::uniform(98, k, std::uint64_t(i)) + 0.1;
    }
    w /= w.sum();
    TrajectoryEnsemble<double> ens(q, p, w);
    const auto density = density_from_trajectories(ens, grid, 0.15);
    CHECK(trapezoid(grid, density.values) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("stepping never touches the weights") {
  Grid1D<double> grid(-9.0, 9.0, 1024);
  const auto fields = coherent_fields(grid, 1.0, 1.0, 0.0, 0.2);
  RealField<double> density(grid, fields.density);
  const auto force = build_force_field(PotentialSpec<double>::harmonic(1.0), density);

  auto ens = init_trajectories(fields, 64);
  Array<double> w0 = ens.weights;
  for (int n = 0; n < 50; ++n) {
    ens = bohmian_advect_step(ens, fields, 1e-3);
    ens = newtonian_step(ens, force, 1e-3);
  }
  for (Eigen::Index i = 0; i < ens.size(); ++i) CHECK(ens.weights[i] == w0[i]);
}

TEST_CASE("leaving the field support raises an error") {
  Grid1D<double> grid(-6.0, 6.0, 256);
  const auto fields = decompose(gaussian_packet(grid, 0.0, 0.5, 0.0));
  const auto support = support_interval(fields.density, default_node_eps(fields.density));
  const double edge = grid.position(support.hi);

  auto ens = three_point_bundle(edge - 0.05, 0.0, -1.0, 5.0);
  RealField<double> density(grid, fields.density);
  const auto force = build_force_field(PotentialSpec<double>::free(), density);
  auto run = [&] {
    for (int n = 0; n < 100; ++n) ens = newtonian_step(ens, force, 0.01);
  };
  CHECK_THROWS_AS(run(), SupportError);
}
