#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ellcbf/simulator.hpp"

namespace ellcbf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,  // usage, parse, schema or scenario validation errors
  kExitSafety = 3,      // a logged step had intersecting ellipses or h < -1e-9
  kExitNumerical = 4,   // QP infeasibility, solver or oracle failure
};

/// Key/value record of one command invocation, written as manifest.csv.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value);
  void addFile(const std::filesystem::path& file) { files_.push_back(file); }
  const std::vector<std::filesystem::path>& files() const { return files_; }

  /// Writes manifest.csv into dir with status, exit code and timing.
  void write(const std::filesystem::path& dir, int exit_code, double wall_seconds) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::filesystem::path> files_;
};

/// Header: t, then px_k, py_k, theta_k per agent, then phi_i_j, h_i_j, w_i_j
/// per pair (1-based ids). One row per logged step.
void writeTrajectory(std::ostream& out, const SimLog& log);

struct PairSummary {
  int i = 0;  // zero-based
  int j = 0;
  double min_h = 0.0;
  double min_w_star = 0.0;
  /// Extremes of w* - h over records with t >= transient.
  double max_gap_after_transient = 0.0;
  double min_gap_after_transient = 0.0;
  int violations = 0;
};

std::vector<PairSummary> summarize(const SimLog& log, double transient);
void writeSummary(std::ostream& out, const std::vector<PairSummary>& summary);

struct RunOptions {
  std::filesystem::path scenario;
  std::filesystem::path out;
};

/// `ellcbf run`: simulates a scenario and writes trajectory.csv,
/// summary.csv, scenario_resolved.csv and manifest.csv.
int runCommand(const RunOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::uint64_t seed = 1;
  int trials = 100;
  std::filesystem::path out = ".";
};

/// `ellcbf verify`: randomized property suites, one row per trial in
/// verify_report.csv; breaching trials are dumped to verify_failures.csv.
int verifyCommand(const VerifyOptions& options, std::ostream& out, std::ostream& err);

struct PlotDataOptions {
  std::filesystem::path trajectory;
  std::filesystem::path out;
  std::vector<double> snapshots;
  /// Defaults to scenario_resolved.csv next to the trajectory.
  std::optional<std::filesystem::path> scenario;
};

/// `ellcbf plotdata`: boundary polylines, supporting lines and clearance
/// segments at the snapshot times, plus the h / w* time series.
int plotDataCommand(const PlotDataOptions& options, std::ostream& out, std::ostream& err);

}  // namespace ellcbf::cli
