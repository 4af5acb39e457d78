#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qha/numerics.hpp"
#include "qha/types.hpp"

namespace qha {

// Silverman's rule of thumb for weighted samples:
// h = 0.9 min(sigma, IQR/1.34) N_eff^{-1/5}, N_eff = 1 / sum w_i^2.
template <typename Scalar>
Scalar silverman_bandwidth(const Array<Scalar>& positions, const Array<Scalar>& weights) {
  const Scalar wsum = weights.sum();
  const Scalar mean = (weights * positions).sum() / wsum;
  const Scalar var = (weights * (positions - mean).square()).sum() / wsum;
  const Scalar sigma = std::sqrt(std::max(var, Scalar(0)));

  std::vector<Eigen::Index> order(positions.size());
  for (Eigen::Index i = 0; i < positions.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return positions[a] < positions[b]; });
  auto weighted_quantile = [&](Scalar q) {
    Scalar acc = 0;
    for (Eigen::Index k : order) {
      acc += weights[k] / wsum;
      if (acc >= q) return positions[k];
    }
    return positions[order.back()];
  };
  const Scalar iqr = weighted_quantile(Scalar(0.75)) - weighted_quantile(Scalar(0.25));

  Scalar scale = sigma;
  if (iqr > Scalar(0)) scale = std::min(sigma, iqr / Scalar(1.34));
  if (!(scale > Scalar(0))) scale = std::max(sigma, Scalar(1e-3));
  const Scalar n_eff = wsum * wsum / weights.square().sum();
  return Scalar(0.9) * scale * std::pow(n_eff, Scalar(-0.2));
}

// Weighted Gaussian kernel density estimate on the grid, computed by linear
// binning followed by discrete convolution with a normalized sampled kernel.
// The result integrates (trapezoid rule) to exactly one.
template <typename Scalar>
RealField<Scalar> kde_density(const Grid1D<Scalar>& grid, const Array<Scalar>& positions,
                              const Array<Scalar>& weights, Scalar bandwidth) {
  if (!(bandwidth > Scalar(0)))
    throw std::invalid_argument("kde_density: bandwidth must be positive");
  const Eigen::Index n = grid.size();
  const Scalar dq = grid.dq();

  Array<Scalar> node_mass = Array<Scalar>::Zero(n);
  for (Eigen::Index k = 0; k < positions.size(); ++k) {
    Scalar x = (positions[k] - grid.q_min()) / dq;
    x = std::clamp(x, Scalar(0), Scalar(n - 1));
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), n - 2);
    const Scalar f = x - Scalar(i);
    node_mass[i] += weights[k] * (Scalar(1) - f);
    node_mass[i + 1] += weights[k] * f;
  }

  const auto radius = std::min<Eigen::Index>(
      n - 1, static_cast<Eigen::Index>(std::ceil(Scalar(6) * bandwidth / dq)) + 1);
  Array<Scalar> kernel(2 * radius + 1);
  for (Eigen::Index k = -radius; k <= radius; ++k)
    kernel[k + radius] = std::exp(-Scalar(k) * Scalar(k) * dq * dq /
                                  (2 * bandwidth * bandwidth));
  kernel /= kernel.sum();

  RealField<Scalar> out(grid);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (node_mass[i] == Scalar(0)) continue;
    const Eigen::Index k_lo = std::max<Eigen::Index>(-radius, -i);
    const Eigen::Index k_hi = std::min<Eigen::Index>(radius, n - 1 - i);
    for (Eigen::Index k = k_lo; k <= k_hi; ++k)
      out.values[i + k] += node_mass[i] * kernel[k + radius];
  }
  out.values /= dq;
  const Scalar mass = trapezoid(grid, out.values);
  out.values /= mass;
  return out;
}

// Variance-corrected Gaussian KDE: samples are contracted about their mean
// by sigma / sqrt(sigma^2 + h^2) before smoothing, so the estimate keeps the
// sample variance instead of inflating it by h^2. Second-derivative
// functionals of near-Gaussian densities lose their leading O(h^2) bias this
// way, which is what the self-consistent quantum force needs.
template <typename Scalar>
RealField<Scalar> kde_density_variance_corrected(const Grid1D<Scalar>& grid,
                                                 const Array<Scalar>& positions,
                                                 const Array<Scalar>& weights,
                                                 Scalar bandwidth) {
  const Scalar wsum = weights.sum();
  const Scalar mean = (weights * positions).sum() / wsum;
  const Scalar var = (weights * (positions - mean).square()).sum() / wsum;
  if (!(var > bandwidth * bandwidth * Scalar(1e-6)))
    return kde_density(grid, positions, weights, bandwidth);
  const Scalar shrink = std::sqrt(var / (var + bandwidth * bandwidth));
  const Array<Scalar> contracted = mean + shrink * (positions - mean);
  return kde_density(grid, contracted, weights, bandwidth);
}

}  // namespace qha
