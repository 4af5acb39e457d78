#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "qha/numerics.hpp"
#include "qha/rng.hpp"
#include "qha/types.hpp"

namespace qha {

// Time-dependent scalar driving force F(t). Seeded kicks are piecewise
// constant over kick_interval with independent Gaussian amplitudes drawn
// from the counter stream, so every consumer evaluating F(t) through the
// same ForcingSpec sees the same realization.
template <typename Scalar = double>
class ForcingSpec {
 public:
  enum class Kind { kZero, kSinusoidal, kSeededKicks };

  ForcingSpec() = default;

  static ForcingSpec zero() { return ForcingSpec(); }

  static ForcingSpec sinusoidal(Scalar amplitude, Scalar frequency, Scalar phase = Scalar(0)) {
    ForcingSpec f;
    f.kind_ = Kind::kSinusoidal;
    f.amplitude_ = amplitude;
    f.frequency_ = frequency;
    f.phase_ = phase;
    return f;
  }

  static ForcingSpec seeded_kicks(Scalar kick_variance, Scalar kick_interval,
                                  std::uint64_t seed) {
    if (!(kick_interval > Scalar(0)))
      throw std::invalid_argument("ForcingSpec: kick_interval must be positive");
    if (!(kick_variance >= Scalar(0)))
      throw std::invalid_argument("ForcingSpec: kick_variance must be nonnegative");
    ForcingSpec f;
    f.kind_ = Kind::kSeededKicks;
    f.kick_variance_ = kick_variance;
    f.kick_interval_ = kick_interval;
    f.seed_ = seed;
    return f;
  }

  Kind kind() const { return kind_; }

  Scalar operator()(Scalar t) const {
    switch (kind_) {
      case Kind::kZero:
        return Scalar(0);
      case Kind::kSinusoidal:
        return amplitude_ * std::sin(frequency_ * t + phase_);
      case Kind::kSeededKicks: {
        const auto slot = static_cast<std::uint64_t>(std::floor(t / kick_interval_));
        return std::sqrt(kick_variance_) * Scalar(rng::normal(seed_, 0x666f7263ULL, slot));
      }
    }
    return Scalar(0);
  }

 private:
  Kind kind_ = Kind::kZero;
  Scalar amplitude_ = Scalar(0);
  Scalar frequency_ = Scalar(0);
  Scalar phase_ = Scalar(0);
  Scalar kick_variance_ = Scalar(0);
  Scalar kick_interval_ = Scalar(1);
  std::uint64_t seed_ = 0;
};

// External potential V(q) plus an optional linear drive -q F(t).
template <typename Scalar = double>
class PotentialSpec {
 public:
  enum class Kind { kFree, kHarmonic, kTabulated };

  static PotentialSpec free() { return PotentialSpec(); }

  static PotentialSpec harmonic(Scalar omega) {
    if (!(omega > Scalar(0)))
      throw std::invalid_argument("PotentialSpec: omega must be positive");
    PotentialSpec v;
    v.kind_ = Kind::kHarmonic;
    v.omega_ = omega;
    return v;
  }

  static PotentialSpec tabulated(RealField<Scalar> table) {
    PotentialSpec v;
    v.kind_ = Kind::kTabulated;
    v.table_ = std::move(table);
    return v;
  }

  Kind kind() const { return kind_; }
  Scalar omega() const { return omega_; }

  void set_forcing(ForcingSpec<Scalar> forcing) { forcing_ = std::move(forcing); }
  const ForcingSpec<Scalar>& forcing() const { return forcing_; }

  // V(q, t) at the nodes.
  Array<Scalar> values(const Grid1D<Scalar>& grid, Scalar t,
                       const PhysicalConstants<Scalar>& c = {}) const {
    Array<Scalar> v;
    switch (kind_) {
      case Kind::kFree:
        v = Array<Scalar>::Zero(grid.size());
        break;
      case Kind::kHarmonic:
        v = Scalar(0.5) * c.mass * omega_ * omega_ * grid.positions().square();
        break;
      case Kind::kTabulated:
        if (!(table_->grid == grid))
          throw std::invalid_argument("PotentialSpec: tabulated field grid mismatch");
        v = table_->values;
        break;
    }
    const Scalar f = forcing_(t);
    if (f != Scalar(0)) v -= grid.positions() * f;
    return v;
  }

  // -dV/dq at the nodes; analytic where the form allows it.
  Array<Scalar> classical_force(const Grid1D<Scalar>& grid, Scalar t,
                                const PhysicalConstants<Scalar>& c = {}) const {
    Array<Scalar> force;
    switch (kind_) {
      case Kind::kFree:
        force = Array<Scalar>::Zero(grid.size());
        break;
      case Kind::kHarmonic:
        force = -c.mass * omega_ * omega_ * grid.positions();
        break;
      case Kind::kTabulated:
        if (!(table_->grid == grid))
          throw std::invalid_argument("PotentialSpec: tabulated field grid mismatch");
        force = -derivative(table_->values, grid.dq());
        break;
    }
    const Scalar f = forcing_(t);
    if (f != Scalar(0)) force += f;
    return force;
  }

 private:
  PotentialSpec() = default;

  Kind kind_ = Kind::kFree;
  Scalar omega_ = Scalar(0);
  std::optional<RealField<Scalar>> table_;
  ForcingSpec<Scalar> forcing_;
};

}  // namespace qha
