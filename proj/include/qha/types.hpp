#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "qha/errors.hpp"

namespace qha {

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct PhysicalConstants {
  Scalar hbar = Scalar(1);
  Scalar mass = Scalar(1);

  PhysicalConstants() = default;
  PhysicalConstants(Scalar hbar_, Scalar mass_) : hbar(hbar_), mass(mass_) {
    if (!(hbar > Scalar(0)) || !(mass > Scalar(0)))
      throw std::invalid_argument("PhysicalConstants: hbar and mass must be positive");
  }
};

// Uniform 1-D grid of n_points nodes spanning [q_min, q_max].
template <typename Scalar = double>
class Grid1D {
 public:
  Grid1D(Scalar q_min, Scalar q_max, Eigen::Index n_points)
      : q_min_(q_min), q_max_(q_max), n_points_(n_points) {
    if (n_points < 16) throw std::invalid_argument("Grid1D: need at least 16 points");
    if (!(q_max > q_min)) throw std::invalid_argument("Grid1D: q_max must exceed q_min");
    dq_ = (q_max - q_min) / Scalar(n_points - 1);
  }

  Scalar q_min() const { return q_min_; }
  Scalar q_max() const { return q_max_; }
  Eigen::Index size() const { return n_points_; }
  Scalar dq() const { return dq_; }

  Scalar position(Eigen::Index i) const { return q_min_ + Scalar(i) * dq_; }

  Array<Scalar> positions() const {
    return Array<Scalar>::LinSpaced(n_points_, q_min_, q_max_);
  }

  bool contains(Scalar q) const { return q >= q_min_ && q <= q_max_; }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.q_min_ == b.q_min_ && a.q_max_ == b.q_max_ && a.n_points_ == b.n_points_;
  }

 private:
  Scalar q_min_;
  Scalar q_max_;
  Eigen::Index n_points_;
  Scalar dq_;
};

// Real scalar field sampled at grid nodes.
template <typename Scalar = double>
struct RealField {
  Grid1D<Scalar> grid;
  Array<Scalar> values;

  explicit RealField(const Grid1D<Scalar>& g)
      : grid(g), values(Array<Scalar>::Zero(g.size())) {}
  RealField(const Grid1D<Scalar>& g, Array<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("RealField: value count does not match grid");
  }
};

// Trapezoid quadrature of nodal values over the grid.
template <typename Scalar, typename Derived>
Scalar trapezoid(const Grid1D<Scalar>& grid, const Eigen::ArrayBase<Derived>& values) {
  const auto n = values.size();
  typename Derived::Scalar s = values.sum() - Scalar(0.5) * (values[0] + values[n - 1]);
  return s * grid.dq();
}

// Complex field on a grid; the Schrodinger state.
template <typename Scalar = double>
class WaveFunction {
 public:
  WaveFunction(const Grid1D<Scalar>& grid, ComplexArray<Scalar> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("WaveFunction: value count does not match grid");
  }

  const Grid1D<Scalar>& grid() const { return grid_; }
  const ComplexArray<Scalar>& values() const { return values_; }
  ComplexArray<Scalar>& values() { return values_; }

  Array<Scalar> density() const { return values_.abs2(); }

  Scalar norm() const { return std::sqrt(trapezoid(grid_, values_.abs2().eval())); }

  void normalize() {
    const Scalar n = norm();
    if (!(n > Scalar(0)) || !std::isfinite(n))
      throw std::invalid_argument("WaveFunction: norm must be finite and positive");
    values_ /= n;
  }

  WaveFunction normalized() const {
    WaveFunction copy = *this;
    copy.normalize();
    return copy;
  }

 private:
  Grid1D<Scalar> grid_;
  ComplexArray<Scalar> values_;
};

// Madelung pair: particle density n(q) and action S(q).
template <typename Scalar = double>
struct HydroFields {
  Grid1D<Scalar> grid;
  Array<Scalar> density;
  Array<Scalar> action;

  HydroFields(const Grid1D<Scalar>& g, Array<Scalar> n, Array<Scalar> s)
      : grid(g), density(std::move(n)), action(std::move(s)) {
    if (density.size() != grid.size() || action.size() != grid.size())
      throw std::invalid_argument("HydroFields: field size does not match grid");
  }

  // Scale density so it integrates to one.
  void normalize() {
    const Scalar mass = trapezoid(grid, density);
    if (!(mass > Scalar(0)))
      throw std::invalid_argument("HydroFields: density mass must be positive");
    density /= mass;
  }
};

}  // namespace qha
