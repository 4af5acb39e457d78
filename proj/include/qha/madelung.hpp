#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "qha/errors.hpp"
#include "qha/numerics.hpp"
#include "qha/types.hpp"

namespace qha {

// Fraction of probability mass the nodeless support region must carry for
// the polar decomposition to be well defined.
inline constexpr double kSupportMassFraction = 0.99;

// Polar decomposition psi -> (n, S): n = |psi|^2 and S = hbar * unwrapped
// phase, pinned to S = 0 at the density maximum. The phase is unwrapped
// along the contiguous support region where n >= eps_n and extended as a
// constant outside it.
template <typename Scalar>
HydroFields<Scalar> decompose(const WaveFunction<Scalar>& psi, Scalar eps_n,
                              const PhysicalConstants<Scalar>& c = {}) {
  const Grid1D<Scalar>& grid = psi.grid();
  Array<Scalar> density = psi.density();
  const IndexRange support = support_interval(density, eps_n);

  Array<Scalar> masked = density;
  for (Eigen::Index i = support.lo; i <= support.hi; ++i) masked[i] = Scalar(0);
  const Scalar inside = trapezoid(grid, density) - trapezoid(grid, masked);
  if (inside < Scalar(kSupportMassFraction) * trapezoid(grid, density))
    throw NodeError("decompose: density falls below eps_n inside the bulk of the state "
                    "(interior node); phase unwrapping is undefined");

  Eigen::Index peak = 0;
  density.maxCoeff(&peak);

  // Unwrap as far out as arg() stays numerically meaningful, past the formal
  // support, so the reconstruction error hides below the amplitude there.
  const Scalar unwrap_floor =
      std::max(Scalar(1e-28) * density[peak], Scalar(1e4) * std::numeric_limits<Scalar>::min());
  const IndexRange unwrap = support_interval(density, unwrap_floor);

  Array<Scalar> action = Array<Scalar>::Zero(grid.size());
  const auto phase = [&psi](Eigen::Index i) { return std::arg(psi.values()[i]); };
  for (Eigen::Index i = peak + 1; i <= unwrap.hi; ++i)
    action[i] = action[i - 1] + wrap_to_pi(phase(i) - phase(i - 1));
  for (Eigen::Index i = peak - 1; i >= unwrap.lo; --i)
    action[i] = action[i + 1] + wrap_to_pi(phase(i) - phase(i + 1));
  action *= c.hbar;
  for (Eigen::Index i = 0; i < unwrap.lo; ++i) action[i] = action[unwrap.lo];
  for (Eigen::Index i = unwrap.hi + 1; i < grid.size(); ++i) action[i] = action[unwrap.hi];

  return HydroFields<Scalar>(grid, std::move(density), std::move(action));
}

template <typename Scalar>
HydroFields<Scalar> decompose(const WaveFunction<Scalar>& psi,
                              const PhysicalConstants<Scalar>& c = {}) {
  return decompose(psi, default_node_eps(psi.density()), c);
}

// Inverse of decompose: psi = sqrt(n) exp(i S / hbar), normalized.
template <typename Scalar>
WaveFunction<Scalar> compose(const HydroFields<Scalar>& fields,
                             const PhysicalConstants<Scalar>& c = {}) {
  ComplexArray<Scalar> values(fields.grid.size());
  for (Eigen::Index i = 0; i < fields.grid.size(); ++i) {
    const Scalar amp = std::sqrt(std::max(fields.density[i], Scalar(0)));
    values[i] = std::polar(amp, fields.action[i] / c.hbar);
  }
  WaveFunction<Scalar> psi(fields.grid, std::move(values));
  psi.normalize();
  return psi;
}

// Quantum pseudo-potential -(hbar^2/2m) a''/a with a = sqrt(n), evaluated on
// `region` (default: the contiguous support around the density peak) and zero
// outside. An explicitly requested region must stay above eps_n throughout.
template <typename Scalar>
RealField<Scalar> quantum_potential(const RealField<Scalar>& density,
                                    const PhysicalConstants<Scalar>& c, Scalar eps_n,
                                    std::optional<IndexRange> region = std::nullopt) {
  IndexRange range;
  if (region) {
    range = *region;
    for (Eigen::Index i = range.lo; i <= range.hi; ++i)
      if (!(density.values[i] >= eps_n))
        throw NodeError("quantum_potential: density below eps_n at node " + std::to_string(i) +
                        " inside the requested support");
  } else {
    range = support_interval(density.values, eps_n);
  }

  Array<Scalar> amplitude = Array<Scalar>::Zero(density.values.size());
  for (Eigen::Index i = range.lo; i <= range.hi; ++i)
    amplitude[i] = std::sqrt(density.values[i]);
  const Array<Scalar> curvature = second_derivative(amplitude, density.grid.dq(), range);

  RealField<Scalar> out(density.grid);
  const Scalar pref = -(c.hbar * c.hbar) / (2 * c.mass);
  for (Eigen::Index i = range.lo; i <= range.hi; ++i)
    out.values[i] = pref * curvature[i] / amplitude[i];
  return out;
}

template <typename Scalar>
RealField<Scalar> quantum_potential(const RealField<Scalar>& density,
                                    const PhysicalConstants<Scalar>& c = {}) {
  return quantum_potential(density, c, default_node_eps(density.values));
}

// Flow velocity v = (1/m) dS/dq on the density support, zero outside.
template <typename Scalar>
RealField<Scalar> velocity_field(const HydroFields<Scalar>& fields,
                                 const PhysicalConstants<Scalar>& c, Scalar eps_n) {
  const IndexRange support = support_interval(fields.density, eps_n);
  if (support.count() < 5)
    throw NodeError("velocity_field: support region too small to differentiate");
  RealField<Scalar> out(fields.grid);
  out.values = derivative(fields.action, fields.grid.dq(), support) / c.mass;
  return out;
}

template <typename Scalar>
RealField<Scalar> velocity_field(const HydroFields<Scalar>& fields,
                                 const PhysicalConstants<Scalar>& c = {}) {
  return velocity_field(fields, c, default_node_eps(fields.density));
}

// <q>
template <typename Scalar>
Scalar mean_position(const WaveFunction<Scalar>& psi) {
  const Array<Scalar> integrand = psi.density() * psi.grid().positions();
  return trapezoid(psi.grid(), integrand);
}

// <p> = Re \int psi^* (-i hbar d/dq) psi
template <typename Scalar>
Scalar mean_momentum(const WaveFunction<Scalar>& psi, const PhysicalConstants<Scalar>& c = {}) {
  const Grid1D<Scalar>& grid = psi.grid();
  Array<Scalar> re(grid.size()), im(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    re[i] = psi.values()[i].real();
    im[i] = psi.values()[i].imag();
  }
  const Array<Scalar> dre = derivative(re, grid.dq());
  const Array<Scalar> dim = derivative(im, grid.dq());
  // Re[conj(psi) * (-i) psi'] = re * im' - im * re'
  const Array<Scalar> integrand = re * dim - im * dre;
  return c.hbar * trapezoid(grid, integrand);
}

// <H> for H = p^2/2m + V with V given at the nodes.
template <typename Scalar>
Scalar total_energy(const WaveFunction<Scalar>& psi, const Array<Scalar>& potential,
                    const PhysicalConstants<Scalar>& c = {}) {
  const Grid1D<Scalar>& grid = psi.grid();
  Array<Scalar> re(grid.size()), im(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    re[i] = psi.values()[i].real();
    im[i] = psi.values()[i].imag();
  }
  const Array<Scalar> d2re = second_derivative(re, grid.dq());
  const Array<Scalar> d2im = second_derivative(im, grid.dq());
  // Re[conj(psi) * psi'']
  const Array<Scalar> kinetic_integrand = re * d2re + im * d2im;
  const Scalar kinetic =
      -(c.hbar * c.hbar) / (2 * c.mass) * trapezoid(grid, kinetic_integrand);
  const Array<Scalar> pot_integrand = psi.density() * potential;
  return kinetic + trapezoid(grid, pot_integrand);
}

// Gaussian packet sqrt(N(center, width^2)) * exp(i k q), normalized.
template <typename Scalar>
WaveFunction<Scalar> gaussian_packet(const Grid1D<Scalar>& grid, Scalar center, Scalar width,
                                     Scalar wavenumber = Scalar(0)) {
  ComplexArray<Scalar> values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Scalar q = grid.position(i);
    const Scalar amp = std::exp(-(q - center) * (q - center) / (4 * width * width));
    values[i] = std::polar(amp, wavenumber * q);
  }
  WaveFunction<Scalar> psi(grid, std::move(values));
  psi.normalize();
  return psi;
}

}  // namespace qha
