#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include "ellcbf/cli/commands.hpp"
#include "ellcbf/cli/csv.hpp"
#include "ellcbf/cli/scenario_io.hpp"

namespace ellcbf::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kBoundarySamples = 64;
constexpr double kLineHalfLength = 1.0;  // m, drawn on each side of the tangent point

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  int agents = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> t;
  std::vector<std::vector<AgentState>> states;
  std::vector<std::vector<PairRecord>> records;
};

Trajectory readTrajectory(const fs::path& path) {
  const CsvTable table = readCsvFile(path);
  if (table.header.empty() || table.header[0] != "t") throw SchemaError(path.string() + ": first column must be 't'");

  std::map<int, std::array<int, 3>> agent_cols;
  std::map<std::pair<int, int>, std::array<int, 3>> pair_cols;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    int a = 0;
    int b = 0;
    char tail = 0;
    char kind[8] = {};
    if (std::sscanf(name.c_str(), "%7[a-z]_%d_%d%c", kind, &a, &b, &tail) == 3 && a >= 1 && b > a) {
      const std::string k = kind;
      const int slot = k == "phi" ? 0 : k == "h" ? 1 : k == "w" ? 2 : -1;
      if (slot >= 0) {
        pair_cols.try_emplace({a - 1, b - 1}, std::array<int, 3>{-1, -1, -1})
            .first->second[static_cast<std::size_t>(slot)] = static_cast<int>(c);
        continue;
      }
    } else if (std::sscanf(name.c_str(), "%7[a-z]_%d%c", kind, &a, &tail) == 2 && a >= 1) {
      const std::string k = kind;
      const int slot = k == "px" ? 0 : k == "py" ? 1 : k == "theta" ? 2 : -1;
      if (slot >= 0) {
        agent_cols.try_emplace(a - 1, std::array<int, 3>{-1, -1, -1})
            .first->second[static_cast<std::size_t>(slot)] = static_cast<int>(c);
        continue;
      }
    }
    throw SchemaError(path.string() + ": unknown column '" + name + "'");
  }

  Trajectory tr;
  tr.agents = static_cast<int>(agent_cols.size());
  int expected = 0;
  for (const auto& [agent, cols] : agent_cols) {
    if (agent != expected++) throw SchemaError(path.string() + ": agent columns must be numbered 1..n");
    for (int c : cols) {
      if (c < 0) throw SchemaError(path.string() + ": agent " + std::to_string(agent + 1) + " needs px, py and theta");
    }
  }
  for (int i = 0; i < tr.agents; ++i) {
    for (int j = i + 1; j < tr.agents; ++j) {
      const auto it = pair_cols.find({i, j});
      const std::string id = std::to_string(i + 1) + "_" + std::to_string(j + 1);
      if (it == pair_cols.end()) throw SchemaError(path.string() + ": missing columns for pair " + id);
      for (int c : it->second) {
        if (c < 0) throw SchemaError(path.string() + ": pair " + id + " needs phi, h and w");
      }
      tr.pairs.emplace_back(i, j);
    }
  }
  if (pair_cols.size() != tr.pairs.size()) throw SchemaError(path.string() + ": pair columns name unknown agents");

  for (const auto& row : table.rows) {
    const auto num = [&](int c) { return parseNumber(row[static_cast<std::size_t>(c)]); };
    tr.t.push_back(num(0));
    std::vector<AgentState> st;
    for (const auto& [agent, cols] : agent_cols) st.emplace_back(num(cols[0]), num(cols[1]), num(cols[2]));
    tr.states.push_back(std::move(st));
    std::vector<PairRecord> pr;
    for (const auto& p : tr.pairs) {
      const auto& cols = pair_cols.at(p);
      PairRecord r;
      r.phi = num(cols[0]);
      r.h = num(cols[1]);
      r.w_star = num(cols[2]);
      r.gap = r.w_star - r.h;
      pr.push_back(r);
    }
    tr.records.push_back(std::move(pr));
  }
  if (tr.t.empty()) throw SchemaError(path.string() + ": no data rows");
  return tr;
}

std::size_t nearestRow(const std::vector<double>& t, double target) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs(t[k] - target) < std::abs(t[best] - target)) best = k;
  }
  return best;
}

std::string pairId(const std::pair<int, int>& p) {
  return std::to_string(p.first + 1) + "_" + std::to_string(p.second + 1);
}

}  // namespace

int plotDataCommand(const PlotDataOptions& options, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Manifest manifest("plotdata");
  manifest.set("trajectory", options.trajectory.string());
  manifest.set("output_dir", options.out.string());

  Trajectory tr;
  ScenarioConfig scenario;
  const fs::path scenario_path = options.scenario.value_or(options.trajectory.parent_path() / "scenario_resolved.csv");
  try {
    tr = readTrajectory(options.trajectory);
    scenario = loadScenario(scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (static_cast<int>(scenario.agents.size()) != tr.agents) {
    err << "error: " << scenario_path.string() << " defines " << scenario.agents.size() << " agents but the trajectory has "
        << tr.agents << "\n";
    return kExitValidation;
  }
  std::vector<EllipseShape> shapes;
  for (const auto& a : scenario.agents) shapes.push_back(a.shape);

  std::error_code ec;
  fs::create_directories(options.out, ec);
  if (ec) {
    err << "error: cannot create " << options.out.string() << ": " << ec.message() << "\n";
    return kExitValidation;
  }

  const std::vector<double> snapshots = options.snapshots.empty() ? std::vector<double>{0.0, 0.8, 2.0, 4.0}
                                                                  : options.snapshots;
  const fs::path boundaries_path = options.out / "boundaries.csv";
  const fs::path lines_path = options.out / "support_lines.csv";
  const fs::path segments_path = options.out / "clearance_segments.csv";
  const fs::path series_path = options.out / "timeseries.csv";
  {
    std::ofstream bf(boundaries_path), lf(lines_path), sf(segments_path);
    CsvWriter boundaries(bf, {"snapshot", "t", "agent", "sample", "x", "y"});
    CsvWriter lines(lf, {"snapshot", "t", "i", "j", "phi", "m_x", "m_y", "normal_x", "normal_y", "x0", "y0", "x1",
                         "y1"});
    CsvWriter segments(sf, {"snapshot", "t", "i", "j", "h", "foot_x", "foot_y", "n_x", "n_y", "length"});
    for (double snap : snapshots) {
      const std::size_t row = nearestRow(tr.t, snap);
      const double t = tr.t[row];
      const auto& states = tr.states[row];
      for (int a = 0; a < tr.agents; ++a) {
        const Mat2 q = effectiveShape(states[a], shapes[a]).q_bar;
        for (int s = 0; s < kBoundarySamples; ++s) {
          const double ang = 2.0 * std::numbers::pi * s / kBoundarySamples;
          const Vec2 x = q * Vec2(std::cos(ang), std::sin(ang)) + states[a].position();
          boundaries.add(snap).add(t).add(a + 1).add(s).add(x.x()).add(x.y()).endRow();
        }
      }
      for (std::size_t p = 0; p < tr.pairs.size(); ++p) {
        const auto [i, j] = tr.pairs[p];
        const SupportLineParam phi(tr.records[row][p].phi);
        const Vec2 m = boundaryPoint(states[i], shapes[i], phi);
        const Vec2 normal = (effectiveShape(states[i], shapes[i]).inverse() * phi.direction()).normalized();
        const Vec2 along(-normal.y(), normal.x());
        const Vec2 x0 = m - kLineHalfLength * along;
        const Vec2 x1 = m + kLineHalfLength * along;
        lines.add(snap).add(t).add(i + 1).add(j + 1).add(phi.phi()).add(m.x()).add(m.y()).add(normal.x());
        lines.add(normal.y()).add(x0.x()).add(x0.y()).add(x1.x()).add(x1.y()).endRow();

        const double h = signedClearance(states[i], shapes[i], states[j], shapes[j], phi);
        const Vec2 n = deepestPoint(states[i], shapes[i], states[j], shapes[j], phi);
        const Vec2 foot = n - h * normal;
        segments.add(snap).add(t).add(i + 1).add(j + 1).add(h).add(foot.x()).add(foot.y()).add(n.x()).add(n.y());
        segments.add((n - foot).norm()).endRow();
      }
    }
  }
  {
    std::ofstream f(series_path);
    std::vector<std::string> header{"t"};
    for (const auto& p : tr.pairs) {
      header.insert(header.end(), {"h_" + pairId(p), "w_" + pairId(p), "gap_" + pairId(p)});
    }
    CsvWriter series(f, header);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      series.add(tr.t[k]);
      for (const PairRecord& r : tr.records[k]) series.add(r.h).add(r.w_star).add(r.gap);
      series.endRow();
    }
  }
  for (const auto& f : {boundaries_path, lines_path, segments_path, series_path}) manifest.addFile(f);
  manifest.set("status", "ok");
  manifest.set("snapshots", std::to_string(snapshots.size()));
  manifest.write(options.out, kExitOk,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  out << "wrote " << snapshots.size() << " snapshots and " << tr.t.size() << " time-series rows to "
      << options.out.string() << "\n";
  return kExitOk;
}

}  // namespace ellcbf::cli
