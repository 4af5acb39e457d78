#pragma once

#include <vector>

#include "qha/schrodinger.hpp"
#include "qha/stochastic.hpp"
#include "qha/trajectories.hpp"

#include "config.hpp"
#include "manifest.hpp"

namespace qha::cli {

// Trajectory bundles driven by fields refreshed from the Crank-Nicolson
// solution. The reference state is integrated on a node-aligned mesh
// `reference_refine` times finer than the field grid and sampled down, so
// the O(dq^2) solver dispersion stays below the trajectory error budget.
// The Newtonian force is refreshed at mid-step, the advecting velocity at
// the end of the step: the two bundles then share the symplectic-Euler
// O(dt) drift and their mutual gap measures the field mismatch only.
struct SyntheticQhaRun {
  std::vector<double> times;
  std::vector<double> residual;    // wave-particle residual of the Newtonian bundle
  std::vector<double> method_gap;  // max |q_bohm - q_newton|
  double density_l1_final = 0;
  double residual_max_first_half = 0;
  double residual_max_second_half = 0;
  TrajectoryEnsemble<double> bohm;
  TrajectoryEnsemble<double> newton;
  WaveFunction<double> psi_final;
};

SyntheticQhaRun run_synthetic_qha(const Grid1D<double>& grid, double omega, double q0, double p0,
                                  double dt, int n_steps, Eigen::Index n_trajectories,
                                  int measure_every, int reference_refine = 8);

// Builds the initial state described by [initial] on the configured grid.
WaveFunction<double> make_initial_state(const ScenarioConfig& config, const Grid1D<double>& grid);

PotentialSpec<double> make_potential(const ScenarioConfig& config);

// Executes one scenario, writes its CSV outputs, plot data and manifest into
// config.out_dir, and returns the manifest. Exceptions carry scenario context.
RunManifest run_scenario(const ScenarioConfig& config);

}  // namespace qha::cli
