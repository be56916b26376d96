#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "ellcbf/cli/commands.hpp"
#include "ellcbf/cli/csv.hpp"
#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/errors.hpp"
#include "ellcbf/qp.hpp"
#include "ellcbf/reference/oracles.hpp"
#include "ellcbf/sampling.hpp"

namespace ellcbf::cli {

namespace fs = std::filesystem;

namespace {

struct Check {
  const char* name;
  double tolerance;
};

// Order matches the report columns.
constexpr Check kChecks[] = {
    {"duality_gap", 1e-6},          {"weak_duality_excess", 1e-7}, {"gradient_rel_error", 1e-5},
    {"gradient_norm_error", 1e-9},  {"qp_enumeration_error", 1e-8}, {"qp_kkt_residual", 1e-8},
    {"qp_passthrough_error", 0.0},
};
constexpr std::size_t kCheckCount = std::size(kChecks);

constexpr int kWeakDualitySamples = 720;
constexpr double kFiniteDifferenceStep = 1e-6;

struct TrialResult {
  double values[kCheckCount] = {};
  std::string pair_inputs;      // duality and weak-duality pair
  std::string gradient_inputs;  // gradient pair and phi
  std::string qp_inputs;
};

std::string describe(const EllipsePair& p) {
  std::ostringstream s;
  const auto agent = [&](const char* tag, const AgentState& st, const EllipseShape& sh) {
    s << tag << "_x=" << formatNumber(st.position().x()) << ";" << tag << "_y=" << formatNumber(st.position().y())
      << ";" << tag << "_theta=" << formatNumber(st.theta()) << ";" << tag << "_q_major=" << formatNumber(sh.q_major)
      << ";" << tag << "_q_minor=" << formatNumber(sh.q_minor);
  };
  agent("i", p.state_i, p.shape_i);
  s << ";";
  agent("j", p.state_j, p.shape_j);
  return s.str();
}

std::string describe(const reference::QpInstance& q) {
  std::ostringstream s;
  s << "u_nom=";
  for (Eigen::Index k = 0; k < q.u_nom.size(); ++k) s << (k ? " " : "") << formatNumber(q.u_nom[k]);
  for (std::size_t r = 0; r < q.rows.size(); ++r) {
    s << ";row" << r << "=";
    for (const auto& [idx, c] : q.rows[r].coeffs) s << idx << ":" << formatNumber(c) << " ";
    s << "b:" << formatNumber(q.rows[r].rhs_alpha);
  }
  return s.str();
}

std::mt19937_64 trialRng(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

TrialResult runTrial(std::mt19937_64& rng) {
  TrialResult r;
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

  // Duality: strong (maximizer vs primal) and weak (every sampled line).
  const EllipsePair pair = randomDisjointPair(rng);
  const double w = certifiedDistance(pair.state_i, pair.shape_i, pair.state_j, pair.shape_j).w_star;
  const double h_star = maximizeClearance(pair.state_i, pair.shape_i, pair.state_j, pair.shape_j).h_star;
  r.values[0] = std::abs(h_star - w);
  const double phase = angle(rng);
  double excess = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < kWeakDualitySamples; ++s) {
    const SupportLineParam phi(phase + 2.0 * std::numbers::pi * s / kWeakDualitySamples);
    excess = std::max(excess, signedClearance(pair.state_i, pair.shape_i, pair.state_j, pair.shape_j, phi) - w);
  }
  r.values[1] = std::max(0.0, excess);
  r.pair_inputs = describe(pair);

  // Gradient against central differences, and the unit position blocks.
  const EllipsePair g = randomPair(rng);
  const double phi = angle(rng);
  const ClearanceGradient analytic = clearanceGradient(g.state_i, g.shape_i, g.state_j, g.shape_j, SupportLineParam(phi));
  const ClearanceGradient fd = reference::finiteDifferenceGradient(
      [&](const AgentState& a, const AgentState& b, double p) {
        return signedClearance(a, g.shape_i, b, g.shape_j, SupportLineParam(p));
      },
      g.state_i, g.state_j, phi, kFiniteDifferenceStep);
  r.values[2] = reference::worstRelativeError(analytic, fd);
  r.values[3] = std::max(std::abs(analytic.d_p_i.norm() - 1.0), std::abs(analytic.d_p_j.norm() - 1.0));
  r.gradient_inputs = describe(g) + ";phi=" + formatNumber(phi);

  // QP against exhaustive enumeration; KKT; strictly feasible nominal passes through.
  const reference::QpInstance q = reference::randomQpInstance(rng);
  r.qp_inputs = describe(q);
  const int dim = static_cast<int>(q.u_nom.size());
  try {
    const QpSolution sol = solveQp(q.u_nom, q.rows);
    Eigen::VectorXd b;
    const Eigen::MatrixXd a = reference::denseRows(q.rows, dim, &b);
    const auto ref = reference::enumerateActiveSets(q.u_nom, a, b);
    r.values[4] = ref ? (sol.u - *ref).lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    r.values[5] = kktResiduals(q.u_nom, q.rows, sol).worst();
    auto loose = q.rows;
    for (auto& row : loose) row.rhs_alpha += 1.0;
    r.values[6] = (solveQp(sol.u, loose).u - sol.u).lpNorm<Eigen::Infinity>();
  } catch (const std::exception&) {
    r.values[4] = r.values[5] = r.values[6] = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace

int verifyCommand(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (options.trials < 1) {
    err << "error: --trials must be >= 1\n";
    return kExitValidation;
  }
  std::error_code ec;
  fs::create_directories(options.out, ec);
  if (ec) {
    err << "error: cannot create " << options.out.string() << ": " << ec.message() << "\n";
    return kExitValidation;
  }

  Manifest manifest("verify");
  manifest.set("seed", std::to_string(options.seed));
  manifest.set("trials", std::to_string(options.trials));
  manifest.set("output_dir", options.out.string());

  const fs::path report_path = options.out / "verify_report.csv";
  const fs::path failures_path = options.out / "verify_failures.csv";
  std::ofstream report_file(report_path);
  std::vector<std::string> header{"trial"};
  for (const Check& c : kChecks) header.emplace_back(c.name);
  header.emplace_back("pass");
  CsvWriter report(report_file, header);

  std::ofstream failures_file;
  std::optional<CsvWriter> failures;

  double worst[kCheckCount] = {};
  int failed_trials = 0;
  for (int trial = 0; trial < options.trials; ++trial) {
    std::mt19937_64 rng = trialRng(options.seed, trial);
    const TrialResult r = runTrial(rng);
    bool pass = true;
    report.add(trial);
    for (std::size_t k = 0; k < kCheckCount; ++k) {
      report.add(r.values[k]);
      worst[k] = std::max(worst[k], r.values[k]);
      if (r.values[k] <= kChecks[k].tolerance) continue;
      pass = false;
      if (!failures) {
        failures_file.open(failures_path);
        failures.emplace(failures_file, std::vector<std::string>{"trial", "check", "value", "tolerance", "inputs"});
      }
      const std::string& inputs = k < 2 ? r.pair_inputs : k < 4 ? r.gradient_inputs : r.qp_inputs;
      failures->add(trial).add(kChecks[k].name).add(r.values[k]).add(kChecks[k].tolerance).add(inputs).endRow();
    }
    report.add(pass ? "1" : "0").endRow();
    failed_trials += !pass;
  }
  report_file.close();
  manifest.addFile(report_path);
  if (failures) {
    failures_file.close();
    manifest.addFile(failures_path);
  }

  for (std::size_t k = 0; k < kCheckCount; ++k) {
    out << kChecks[k].name << ": max " << formatNumber(worst[k]) << " (tolerance " << kChecks[k].tolerance << ") "
        << (worst[k] <= kChecks[k].tolerance ? "ok" : "FAILED") << "\n";
  }
  const int code = failed_trials == 0 ? kExitOk : kExitNumerical;
  if (failed_trials) err << "error: " << failed_trials << " of " << options.trials << " trials breached a tolerance\n";
  manifest.set("status", failed_trials == 0 ? "ok" : "tolerance_breach");
  manifest.set("failed_trials", std::to_string(failed_trials));
  manifest.write(options.out, code, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return code;
}

}  // namespace ellcbf::cli
