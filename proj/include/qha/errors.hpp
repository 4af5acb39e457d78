#pragma once

#include <stdexcept>
#include <string>

namespace qha {

// Base class for all domain errors so callers can catch the whole family.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Density fell below the node threshold where a phase/curvature quantity
// was requested; the Madelung decomposition is undefined there.
class NodeError : public Error {
 public:
  explicit NodeError(const std::string& what) : Error(what) {}
};

// A trajectory or interpolation point left the support of a field.
class SupportError : public Error {
 public:
  explicit SupportError(const std::string& what) : Error(what) {}
};

// Probability reached the wall of the computational box.
class StabilityError : public Error {
 public:
  explicit StabilityError(const std::string& what) : Error(what) {}
};

// Transition kernel narrower than the mesh can resolve.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what) : Error(what) {}
};

// More than the tolerated probability mass left the mesh.
class MassLossError : public Error {
 public:
  explicit MassLossError(const std::string& what) : Error(what) {}
};

// Statistical estimator called with too few samples.
class InsufficientSamplesError : public Error {
 public:
  explicit InsufficientSamplesError(const std::string& what) : Error(what) {}
};

// Invalid or incomplete run configuration; message carries the key path.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// A result file lacks a column the post-processor needs.
class MissingColumnError : public Error {
 public:
  explicit MissingColumnError(const std::string& what) : Error(what) {}
};

}  // namespace qha
