#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "esav/models.hpp"
#include "esav/schemes.hpp"
#include "esav/spectral.hpp"

namespace esav {

struct GridSpec {
  double lx = 0.0, ly = 0.0;
  int nx = 0, ny = 0;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// a cos(x) cos(y)
struct CosCos {
  double amplitude = 0.5;
  friend bool operator==(const CosCos&, const CosCos&) = default;
};

// background - sum_ij tanh((|x - c_ij| - r0) / (sqrt(2) eps)),
// centres c_ij = (spacing * i, spacing * j), i = 1..n_cols, j = 1..n_rows.
struct CircleArray {
  int n_rows = 9, n_cols = 9;
  double spacing = 0.2, r0 = 0.085, eps = 0.01, background = 80.0;
  friend bool operator==(const CircleArray&, const CircleArray&) = default;
};

// mean + amplitude * u, u uniform on [-1, 1] with its sample mean removed.
struct RandomUniform {
  double mean = 0.07, amplitude = 0.07;
  friend bool operator==(const RandomUniform&, const RandomUniform&) = default;
};

struct CrystalPatch {
  double cx = 0.0, cy = 0.0, half_width = 20.0, theta = 0.0;
  friend bool operator==(const CrystalPatch&, const CrystalPatch&) = default;
};

// phibar outside the patches; inside each axis-aligned square patch
// phibar + c (cos(q y_l / sqrt3) cos(q x_l) - 1/2 cos(2 q y_l / sqrt3)) in
// lattice coordinates rotated by theta.
struct Crystallites {
  double phibar = 0.285, c = 0.446, q = 0.66;
  std::vector<CrystalPatch> patches;
  friend bool operator==(const Crystallites&, const Crystallites&) = default;
};

using InitialCondition = std::variant<CosCos, CircleArray, RandomUniform, Crystallites>;

struct ExperimentConfig {
  BuiltinModel model;
  GridSpec grid;
  SchemeKind scheme = SchemeKind::Resav;
  int order = 2;
  double dt = 0.0;
  double t_end = 0.0;
  double s_scale = 1.0;
  double kappa = 1.0;
  InitialCondition ic = CosCos{};
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;
  std::string output_dir = ".";
  bool dealias = false;
  int startup_substeps = 0;  // 0 selects auto_startup_substeps
  bool verify_solve = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ExperimentConfig& config);

/// Seeded fields use std::mt19937_64 with 53-bit mantissa extraction.
Field make_ic(const InitialCondition& ic, const Grid& grid, std::uint64_t seed);

struct Snapshot {
  long step = 0;
  double time = 0.0;
  Field field;
};

struct RunResult {
  std::vector<StepReport> trace;
  std::vector<Snapshot> snapshots;
  SchemeState final_state;

  const Field& final_field() const { return final_state.history.front(); }
};

/// Number of time steps, requiring t_end to be a multiple of dt within 1e-9.
long step_count(double t_end, double dt);

/// Throws RunAborted when a step fails.
RunResult run(const ExperimentConfig& config);

struct ConvergenceReport {
  std::vector<double> dt_list;
  std::vector<double> errors;               // L-infinity vs reference at t_end
  std::vector<std::optional<double>> rates; // rates[0] is always empty
  double dt_ref = 0.0;
};

ConvergenceReport convergence_study(const ExperimentConfig& base,
                                    const std::vector<double>& dt_list, double dt_ref);

/// log2(e_coarse / e_fine); nullopt when either error is not positive.
std::optional<double> observed_rate(double e_coarse, double e_fine);

}  // namespace esav
