#pragma once

// Configuration files, trace/snapshot formats and the command-line driver.
//
// Config files are flat `key = value` lines; `#` starts a comment. The
// initial condition lives under an `[ic]` section header:
//
//   model = allen_cahn
//   epsilon = 0.01
//   lx = 2*pi
//   ...
//   [ic]
//   type = coscos
//   amplitude = 0.5
//
// Reals accept plain decimals, fractions (1/16) and multiples of pi
// (2*pi, pi/2).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "esav/harness.hpp"

namespace esav {

inline constexpr std::string_view kVersion = "0.3.0";
inline constexpr std::string_view kOutputDirEnv = "ESAV_OUTPUT_DIR";
inline constexpr char kSnapshotMagic[8] = {'E', 'S', 'A', 'V', 'S', 'N', 'P', '1'};

double parse_real(std::string_view text);

ExperimentConfig parse_config_text(std::string_view text, const std::string& source = "<string>");
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string emit_config(const ExperimentConfig& config);

inline constexpr std::string_view kTraceHeader =
    "step,time,energy_original,ln_r_scaled,xi,u_of_xi,lambda0,dissipation,mass";

void emit_trace(const std::vector<StepReport>& trace, const std::filesystem::path& path);
std::string format_trace(const std::vector<StepReport>& trace);
std::vector<StepReport> read_trace(const std::filesystem::path& path);

struct SnapshotMeta {
  double time = 0.0;
  std::string model;
  std::string scheme;
  std::uint32_t config_checksum = 0;
};

/// Binary layout: 8-byte magic, u32 nx, u32 ny, f64 lx, f64 ly, then nx*ny
/// f64 values row-major over (y, x); all little-endian. Metadata goes to
/// `<path>.meta` when given.
void emit_snapshot(const Field& field, const std::filesystem::path& path,
                   const SnapshotMeta* meta = nullptr);
Field read_snapshot(const std::filesystem::path& path);

std::string format_convergence(const std::vector<std::string>& labels,
                               const std::vector<ConvergenceReport>& reports);

std::uint32_t crc32_of(std::string_view bytes);
std::uint32_t crc32_of_file(const std::filesystem::path& path);

/// Presets for examples 1-4 at full resolution. Example 1 comes in an
/// Allen-Cahn and a Cahn-Hilliard flavour; example 3 takes the quadratic
/// coefficient g.
ExperimentConfig example1_allen_cahn();
ExperimentConfig example1_cahn_hilliard();
ExperimentConfig example2_circles();
ExperimentConfig example3_random(double g);
ExperimentConfig example4_crystallites();

int cli_main(int argc, char** argv);

}  // namespace esav
