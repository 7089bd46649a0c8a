#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skg/config.hpp"
#include "skg/manifest.hpp"
#include "skg/table.hpp"

namespace skg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

std::string software_version();

/// Run the experiment into config.output (created if needed) and write the manifest
/// last. Numerical failures are recorded in the manifest (exit_code 3) with every
/// output written so far kept; I/O failures throw Error.
RunManifest run_experiment(const RunConfig& config);

/// The initial classical state of flow and scatter runs.
ClassicalState initial_state(const SkgSystem& sys, const InitialSpec& spec, std::uint64_t seed);

/// Artifact tables with their documented column sets.
Table trajectory_table(const Trajectory& traj);
Table sweep_table(const std::vector<SweepRow>& rows);
Table grid_position_table(const Grid& grid);
Table grid_momentum_table(const Grid& grid);
Table decay_table(const DecayProfile& profile);

/// Per-probe scattering report.
std::string scatter_report_json(const RadiationlessVerdict& verdict);
std::string hartree_report_json(const HartreeResult& r, const Grid& grid,
                                 const MultiStartReport* starts);

/// Snapshot record: "SKGSNAP1", int32 d, int32 N, float64 L, float64 t, then N complex u
/// and N complex z as interleaved re/im float64; all little-endian.
std::string encode_snapshot(const Grid& grid, const ClassicalState& s);
void write_snapshots(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<ClassicalState>& states);
struct Snapshot {
  int dimension = 1;
  int n = 0;
  double L = 0.0;
  ClassicalState state;
};
std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

struct RunReport {
  RunManifest manifest;
  ManifestCheck check;
  std::string text;  // human-readable summary
};

/// Read and verify a run directory.
RunReport report_run(const std::filesystem::path& dir);

}  // namespace skg
