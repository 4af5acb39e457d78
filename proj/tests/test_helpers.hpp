#pragma once

#include <cmath>
#include <numbers>

#include "qha/madelung.hpp"
#include "qha/rng.hpp"
#include "qha/schrodinger.hpp"
#include "qha/types.hpp"

namespace qha::testing {

inline Grid1D<double> default_grid(double half_width = 12.0, Eigen::Index n = 1024) {
  return Grid1D<double>(-half_width, half_width, n);
}

// Nodeless random state: a two-Gaussian positive density with a smooth phase.
// Deterministic per case index.
inline WaveFunction<double> random_nodeless_state(const Grid1D<double>& grid,
                                                  std::uint64_t case_index) {
  const auto u = [&](std::uint64_t k) { return rng::uniform(7777, case_index, k); };
  const double c1 = -2.0 + 4.0 * u(0);
  const double c2 = -2.0 + 4.0 * u(1);
  const double s1 = 0.8 + 0.8 * u(2);
  const double s2 = 0.8 + 0.8 * u(3);
  const double mix = 0.3 + 0.4 * u(4);
  const double k_lin = -1.5 + 3.0 * u(5);
  const double k_mod = 0.5 * u(6);
  const double freq = 0.3 + 0.5 * u(7);

  ComplexArray<double> values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double q = grid.position(i);
    const double a1 = std::exp(-(q - c1) * (q - c1) / (2 * s1 * s1));
    const double a2 = std::exp(-(q - c2) * (q - c2) / (2 * s2 * s2));
    const double amp = std::sqrt(mix * a1 + (1 - mix) * a2);
    const double phase = k_lin * q + k_mod * std::sin(freq * q);
    values[i] = std::polar(amp, phase);
  }
  WaveFunction<double> psi(grid, std::move(values));
  psi.normalize();
  return psi;
}

// Ground state of the omega oscillator (hbar = m = 1 defaults).
inline WaveFunction<double> oscillator_ground_state(const Grid1D<double>& grid,
                                                    double omega = 1.0) {
  return coherent_state(grid, omega, 0.0, 0.0, 0.0);
}

// Density of a normalized Gaussian with the given width.
inline Array<double> gaussian_density(const Grid1D<double>& grid, double center, double sigma) {
  Array<double> n(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double q = grid.position(i);
    n[i] = std::exp(-(q - center) * (q - center) / (2 * sigma * sigma)) /
           (sigma * std::sqrt(2 * std::numbers::pi));
  }
  return n;
}

}  // namespace qha::testing
