#include <chrono>
#include <fstream>
#include <limits>
#include <ostream>

#include "ellcbf/cli/commands.hpp"
#include "ellcbf/cli/csv.hpp"
#include "ellcbf/cli/scenario_io.hpp"
#include "ellcbf/errors.hpp"

namespace ellcbf::cli {

namespace fs = std::filesystem;

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::write(const fs::path& dir, int exit_code, double wall_seconds) const {
  std::ofstream out(dir / "manifest.csv");
  CsvWriter w(out, {"key", "value"});
  // Free text may not contain the separator.
  const auto clean = [](std::string s) {
    for (char& c : s) {
      if (c == ',' || c == '\n') c = ';';
    }
    return s;
  };
  w.add("command").add(command_).endRow();
  for (const auto& [k, v] : entries_) w.add(k).add(clean(v)).endRow();
  w.add("exit_code").add(exit_code).endRow();
  w.add("wall_seconds").add(wall_seconds).endRow();
  for (const auto& f : files_) w.add("file").add(clean(f.string())).endRow();
}

void writeTrajectory(std::ostream& out, const SimLog& log) {
  std::vector<std::string> header{"t"};
  for (int a = 1; a <= log.agents; ++a) {
    const std::string id = std::to_string(a);
    header.insert(header.end(), {"px_" + id, "py_" + id, "theta_" + id});
  }
  for (const auto& [i, j] : log.pairs) {
    const std::string id = std::to_string(i + 1) + "_" + std::to_string(j + 1);
    header.insert(header.end(), {"phi_" + id, "h_" + id, "w_" + id});
  }
  CsvWriter w(out, header);
  for (const StepRecord& r : log.records) {
    w.add(r.t);
    for (const AgentState& s : r.states) w.add(s.position().x()).add(s.position().y()).add(s.theta());
    for (const PairRecord& p : r.pairs) w.add(p.phi).add(p.h).add(p.w_star);
    w.endRow();
  }
}

std::vector<PairSummary> summarize(const SimLog& log, double transient) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<PairSummary> out;
  for (const auto& [i, j] : log.pairs) out.push_back({i, j, kInf, kInf, -kInf, kInf, 0});
  for (const StepRecord& r : log.records) {
    for (std::size_t p = 0; p < r.pairs.size(); ++p) {
      PairSummary& s = out[p];
      s.min_h = std::min(s.min_h, r.pairs[p].h);
      s.min_w_star = std::min(s.min_w_star, r.pairs[p].w_star);
      if (r.t >= transient) {
        s.max_gap_after_transient = std::max(s.max_gap_after_transient, r.pairs[p].gap);
        s.min_gap_after_transient = std::min(s.min_gap_after_transient, r.pairs[p].gap);
      }
    }
  }
  for (const SafetyEvent& e : log.violations) {
    for (PairSummary& s : out) s.violations += (s.i == e.i && s.j == e.j);
  }
  return out;
}

void writeSummary(std::ostream& out, const std::vector<PairSummary>& summary) {
  CsvWriter w(out, {"i", "j", "min_h", "min_w_star", "max_gap_after_transient", "min_gap_after_transient",
                    "violations"});
  for (const PairSummary& s : summary) {
    w.add(s.i + 1).add(s.j + 1).add(s.min_h).add(s.min_w_star).add(s.max_gap_after_transient);
    w.add(s.min_gap_after_transient).add(s.violations).endRow();
  }
}

int runCommand(const RunOptions& options, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  Manifest manifest("run");
  manifest.set("scenario", options.scenario.string());
  manifest.set("output_dir", options.out.string());
  std::error_code ec;
  fs::create_directories(options.out, ec);
  if (ec) {
    err << "error: cannot create " << options.out.string() << ": " << ec.message() << "\n";
    return kExitValidation;
  }
  const auto fail = [&](int code, const std::string& status, const std::string& message) {
    err << "error: " << message << "\n";
    manifest.set("status", status);
    manifest.set("message", message);
    manifest.write(options.out, code, elapsed());
    return code;
  };

  ScenarioConfig resolved;
  try {
    resolved = resolveScenario(loadScenario(options.scenario));
  } catch (const ParseError& e) {
    return fail(kExitValidation, "validation_error", e.what());
  } catch (const ScenarioError& e) {
    return fail(kExitValidation, "validation_error", options.scenario.string() + ": " + e.what());
  } catch (const InitializationError& e) {
    return fail(kExitValidation, "validation_error", options.scenario.string() + ": " + e.what());
  }

  const fs::path resolved_path = options.out / "scenario_resolved.csv";
  {
    std::ofstream f(resolved_path);
    writeResolvedScenario(f, resolved);
  }

  SimLog log;
  try {
    log = run(resolved);
  } catch (const InitializationError& e) {
    return fail(kExitValidation, "validation_error", options.scenario.string() + ": " + e.what());
  }

  const fs::path trajectory_path = options.out / "trajectory.csv";
  const fs::path summary_path = options.out / "summary.csv";
  {
    std::ofstream f(trajectory_path);
    writeTrajectory(f, log);
  }
  const auto summary = summarize(log, resolved.transient);
  {
    std::ofstream f(summary_path);
    writeSummary(f, summary);
  }
  manifest.addFile(trajectory_path);
  manifest.addFile(summary_path);
  manifest.addFile(resolved_path);
  manifest.set("steps", std::to_string(log.records.size()));
  manifest.set("violations", std::to_string(log.violations.size()));

  for (const PairSummary& s : summary) {
    out << "pair " << s.i + 1 << "-" << s.j + 1 << ": min h " << formatNumber(s.min_h) << ", min w* "
        << formatNumber(s.min_w_star) << ", max gap after t=" << resolved.transient << " "
        << formatNumber(s.max_gap_after_transient) << "\n";
  }

  int code = kExitOk;
  std::string status = "ok";
  if (log.aborted()) {
    code = kExitNumerical;
    status = "numerical_failure";
    manifest.set("message", log.abort_message);
    err << "error: simulation aborted at t=" << formatNumber(static_cast<double>(log.records.size()) * log.dt)
        << ": " << log.abort_message << "\n";
  } else if (!log.violations.empty()) {
    code = kExitSafety;
    status = "safety_violation";
    const SafetyEvent& first = log.violations.front();
    err << "error: " << log.violations.size() << " unsafe steps; first at t=" << formatNumber(first.t)
        << " between agents " << first.i + 1 << " and " << first.j + 1 << "\n";
  }
  manifest.set("status", status);
  manifest.write(options.out, code, elapsed());
  return code;
}

}  // namespace ellcbf::cli
