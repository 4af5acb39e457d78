#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "qha/errors.hpp"
#include "qha/types.hpp"

namespace qha {

// Contiguous node range [lo, hi], both inclusive.
struct IndexRange {
  Eigen::Index lo = 0;
  Eigen::Index hi = -1;

  Eigen::Index count() const { return hi - lo + 1; }
  bool contains(Eigen::Index i) const { return i >= lo && i <= hi; }
};

// First derivative on a uniform grid: 4th-order central stencil in the
// interior, 2nd-order central one node from each edge, 2nd-order one-sided
// at the edges. Operates on the slice [range.lo, range.hi]; nodes outside
// are left at zero.
template <typename Scalar>
Array<Scalar> derivative(const Array<Scalar>& f, Scalar dq, const IndexRange& range) {
  Array<Scalar> out = Array<Scalar>::Zero(f.size());
  const Eigen::Index lo = range.lo, hi = range.hi;
  if (hi - lo < 4) {
    for (Eigen::Index i = lo + 1; i < hi; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2 * dq);
    if (hi > lo) {
      out[lo] = (f[lo + 1] - f[lo]) / dq;
      out[hi] = (f[hi] - f[hi - 1]) / dq;
    }
    return out;
  }
  for (Eigen::Index i = lo + 2; i <= hi - 2; ++i)
    out[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * dq);
  out[lo + 1] = (f[lo + 2] - f[lo]) / (2 * dq);
  out[hi - 1] = (f[hi] - f[hi - 2]) / (2 * dq);
  out[lo] = (-3 * f[lo] + 4 * f[lo + 1] - f[lo + 2]) / (2 * dq);
  out[hi] = (3 * f[hi] - 4 * f[hi - 1] + f[hi - 2]) / (2 * dq);
  return out;
}

template <typename Scalar>
Array<Scalar> derivative(const Array<Scalar>& f, Scalar dq) {
  return derivative(f, dq, IndexRange{0, f.size() - 1});
}

// Second derivative, same stencil policy as derivative().
template <typename Scalar>
Array<Scalar> second_derivative(const Array<Scalar>& f, Scalar dq, const IndexRange& range) {
  Array<Scalar> out = Array<Scalar>::Zero(f.size());
  const Eigen::Index lo = range.lo, hi = range.hi;
  const Scalar dq2 = dq * dq;
  if (hi - lo < 4) {
    for (Eigen::Index i = lo + 1; i < hi; ++i)
      out[i] = (f[i + 1] - 2 * f[i] + f[i - 1]) / dq2;
    if (hi - lo >= 2) {
      out[lo] = out[lo + 1];
      out[hi] = out[hi - 1];
    }
    return out;
  }
  for (Eigen::Index i = lo + 2; i <= hi - 2; ++i)
    out[i] = (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / (12 * dq2);
  out[lo + 1] = (f[lo + 2] - 2 * f[lo + 1] + f[lo]) / dq2;
  out[hi - 1] = (f[hi] - 2 * f[hi - 1] + f[hi - 2]) / dq2;
  out[lo] = (2 * f[lo] - 5 * f[lo + 1] + 4 * f[lo + 2] - f[lo + 3]) / dq2;
  out[hi] = (2 * f[hi] - 5 * f[hi - 1] + 4 * f[hi - 2] - f[hi - 3]) / dq2;
  return out;
}

template <typename Scalar>
Array<Scalar> second_derivative(const Array<Scalar>& f, Scalar dq) {
  return second_derivative(f, dq, IndexRange{0, f.size() - 1});
}

// Default node threshold relative to the density peak.
template <typename Scalar>
Scalar default_node_eps(const Array<Scalar>& density) {
  return Scalar(1e-12) * density.maxCoeff();
}

// Contiguous region around the density maximum where density >= eps.
template <typename Scalar>
IndexRange support_interval(const Array<Scalar>& density, Scalar eps) {
  Eigen::Index peak = 0;
  density.maxCoeff(&peak);
  IndexRange r{peak, peak};
  while (r.lo > 0 && density[r.lo - 1] >= eps) --r.lo;
  while (r.hi < density.size() - 1 && density[r.hi + 1] >= eps) ++r.hi;
  return r;
}

// Linear interpolation of nodal values at q, restricted to the node range
// [range.lo, range.hi]. Throws SupportError outside.
template <typename Scalar>
Scalar interpolate(const Grid1D<Scalar>& grid, const Array<Scalar>& values, Scalar q,
                   const IndexRange& range) {
  const Scalar q_lo = grid.position(range.lo);
  const Scalar q_hi = grid.position(range.hi);
  if (!(q >= q_lo && q <= q_hi))
    throw SupportError("interpolate: point " + std::to_string(double(q)) +
                       " outside supported range [" + std::to_string(double(q_lo)) + ", " +
                       std::to_string(double(q_hi)) + "]");
  Scalar x = (q - grid.q_min()) / grid.dq();
  Eigen::Index i = static_cast<Eigen::Index>(std::floor(x));
  if (i >= range.hi) i = range.hi - 1;
  if (i < range.lo) i = range.lo;
  const Scalar f = x - Scalar(i);
  return values[i] * (Scalar(1) - f) + values[i + 1] * f;
}

template <typename Scalar>
Scalar wrap_to_pi(Scalar x) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  x = std::fmod(x + std::numbers::pi_v<Scalar>, two_pi);
  if (x < Scalar(0)) x += two_pi;
  return x - std::numbers::pi_v<Scalar>;
}

}  // namespace qha
