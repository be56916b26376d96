#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ellcbf/simulator.hpp"

namespace ellcbf::cli {

/// Syntax or schema problem in a scenario file. line is 0 when the problem
/// is not tied to a single line (e.g. a missing key).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, std::string field, const std::string& message);

  int line;
  std::string field;
};

/// Arithmetic over numbers and `pi`: + - * / unary minus and parentheses,
/// e.g. "-pi/4" or "5*pi/4". Throws std::invalid_argument.
double evaluateExpression(std::string_view text);

/// Scenario file:
///
///   # comment
///   [global]
///   dt = 1e-3
///   phi_init = random      # scan | random
///   phi_1_2 = 0.3          # optional explicit line angle, 1-based ids
///
///   [agent 1]
///   q_major = 0.4
///   q_minor = 0.2
///   x = 0
///   y = 1
///   theta = -pi/4
///   goal_x = 2             # optional, with goal_y
///   goal_theta = 0         # optional
///
/// Agents are numbered 1..n without gaps. Unknown keys are errors.
ScenarioConfig parseScenario(std::istream& in, const std::string& source);

/// The `section,key,value` table written by writeResolvedScenario.
ScenarioConfig parseResolvedScenario(std::istream& in, const std::string& source);

/// Chooses the format from the first line: a `section,key,value` header
/// means a resolved table, anything else is a scenario file.
ScenarioConfig loadScenario(const std::filesystem::path& path);

/// Every setting of a resolved scenario (goals, goal headings and all pair
/// angles included) as `section,key,value` rows. Loading the result and
/// running it reproduces the original run bit for bit.
void writeResolvedScenario(std::ostream& out, const ScenarioConfig& resolved);

}  // namespace ellcbf::cli
