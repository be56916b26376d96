#include "ellcbf/cli/scenario_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "ellcbf/cli/csv.hpp"

namespace ellcbf::cli {

ParseError::ParseError(const std::string& source, int line, std::string field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         (field.empty() ? std::string() : field + ": ") + message),
      line(line),
      field(std::move(field)) {}

namespace {

// Recursive descent over  expr := term {(+|-) term},  term := unary {(*|/) unary},
// unary := (+|-) unary | number | pi | ( expr ).
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : s_(text) {}

  double parse() {
    const double v = expr();
    skipSpace();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("bad expression '" + std::string(s_) + "': " + what);
  }

  void skipSpace() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skipSpace();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    if (accept('(')) {
      const double v = expr();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    skipSpace();
    if (s_.substr(pos_, 2) == "pi") {
      pos_ += 2;
      return std::numbers::pi;
    }
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const auto [end, ec] = std::from_chars(begin, s_.data() + s_.size(), v);
    if (ec != std::errc() || end == begin) fail(pos_ < s_.size() ? "expected a number" : "unexpected end");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

// Collects entries section by section and turns them into a ScenarioConfig;
// shared by both file formats.
class ScenarioBuilder {
 public:
  explicit ScenarioBuilder(std::string source) : source_(std::move(source)) {}

  void openSection(const std::string& name, int line) { sectionFor(name, line); }

  void add(const std::string& section, const std::string& key, const std::string& value, int line) {
    Section& target = sectionFor(section, line);
    if (key.empty()) error(line, "", "missing key");
    if (!target.emplace(key, Entry{value, line}).second) error(line, key, "duplicate key in [" + section + "]");
  }

  ScenarioConfig build() {
    ScenarioConfig c;
    for (const auto& [key, entry] : global_) applyGlobal(c, key, entry);

    int expected = 1;
    for (const auto& [number, section] : agents_) {
      if (number != expected) error(0, "agent " + std::to_string(expected), "agents must be numbered 1..n without gaps");
      c.agents.push_back(buildAgent(number, section));
      ++expected;
    }
    const int n = static_cast<int>(c.agents.size());
    for (const auto& [pair, phi] : c.phi_overrides) {
      if (pair.second >= n) {
        const auto it = global_.find(pairKey(pair));
        error(it != global_.end() ? it->second.line : 0, pairKey(pair), "names an agent that is not defined");
      }
    }
    return c;
  }

 private:
  [[noreturn]] void error(int line, const std::string& field, const std::string& message) const {
    throw ParseError(source_, line, field, message);
  }

  static std::string pairKey(const std::pair<int, int>& p) {
    return "phi_" + std::to_string(p.first + 1) + "_" + std::to_string(p.second + 1);
  }

  Section& sectionFor(const std::string& name, int line) {
    if (name == "global") return global_;
    if (name.rfind("agent", 0) == 0) {
      const std::string id = trim(std::string_view(name).substr(5));
      int number = 0;
      const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), number);
      if (!id.empty() && ec == std::errc() && end == id.data() + id.size() && number >= 1) return agents_[number];
    }
    error(line, name, "unknown section (expected [global] or [agent N])");
  }

  double number(const std::string& key, const Entry& e) const {
    try {
      return evaluateExpression(e.value);
    } catch (const std::invalid_argument& ex) {
      error(e.line, key, ex.what());
    }
  }

  void applyGlobal(ScenarioConfig& c, const std::string& key, const Entry& e) const {
    if (key == "alpha_gain") {
      c.alpha_gain = number(key, e);
    } else if (key == "gamma") {
      c.gamma = number(key, e);
    } else if (key == "dt") {
      c.dt = number(key, e);
    } else if (key == "duration") {
      c.duration = number(key, e);
    } else if (key == "nominal_gain") {
      c.nominal_gain = number(key, e);
    } else if (key == "transient") {
      c.transient = number(key, e);
    } else if (key == "seed") {
      const std::string v = trim(e.value);
      std::uint64_t seed = 0;
      const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (v.empty() || ec != std::errc() || end != v.data() + v.size()) {
        error(e.line, key, "expected a non-negative integer");
      }
      c.seed = seed;
    } else if (key == "phi_init") {
      const std::string v = trim(e.value);
      if (v == "scan") {
        c.phi_init = PhiInitMode::Scan;
      } else if (v == "random") {
        c.phi_init = PhiInitMode::Random;
      } else {
        error(e.line, key, "expected 'scan' or 'random'");
      }
    } else if (key.rfind("phi_", 0) == 0) {
      int i = 0;
      int j = 0;
      char tail = 0;
      if (std::sscanf(key.c_str(), "phi_%d_%d%c", &i, &j, &tail) != 2 || i < 1 || j <= i) {
        error(e.line, key, "pair angles are written phi_i_j with 1 <= i < j");
      }
      c.phi_overrides[{i - 1, j - 1}] = number(key, e);
    } else {
      error(e.line, key, "unknown key in [global]");
    }
  }

  AgentSpec buildAgent(int number_1based, const Section& s) const {
    const std::string name = "agent " + std::to_string(number_1based);
    static const char* const kKnown[] = {"q_major", "q_minor", "x", "y", "theta", "goal_x", "goal_y", "goal_theta"};
    for (const auto& [key, entry] : s) {
      bool known = false;
      for (const char* k : kKnown) known = known || key == k;
      if (!known) error(entry.line, key, "unknown key in [" + name + "]");
    }
    const auto required = [&](const char* key) {
      const auto it = s.find(key);
      if (it == s.end()) error(0, key, "missing in [" + name + "]");
      return number(key, it->second);
    };
    const auto optional = [&](const char* key) -> std::optional<double> {
      const auto it = s.find(key);
      if (it == s.end()) return std::nullopt;
      return number(key, it->second);
    };

    AgentSpec a;
    const double q_major = required("q_major");
    const double q_minor = required("q_minor");
    try {
      a.shape = EllipseShape::make(q_major, q_minor);
    } catch (const std::invalid_argument& ex) {
      error(s.at("q_minor").line, "q_minor", ex.what());
    }
    a.initial = AgentState(required("x"), required("y"), required("theta"));
    const auto gx = optional("goal_x");
    const auto gy = optional("goal_y");
    if (gx.has_value() != gy.has_value()) {
      error(s.at(gx ? "goal_x" : "goal_y").line, gx ? "goal_y" : "goal_x", "goal_x and goal_y go together");
    }
    if (gx) a.goal = Vec2(*gx, *gy);
    a.goal_theta = optional("goal_theta");
    return a;
  }

  std::string source_;
  Section global_;
  std::map<int, Section> agents_;
};

ScenarioConfig parseResolvedRows(std::istream& in, const std::string& source, int first_line) {
  ScenarioBuilder builder(source);
  std::string line;
  int line_no = first_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw ParseError(source, line_no, "", "expected section,key,value");
    }
    builder.add(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1), line_no);
  }
  return builder.build();
}

constexpr std::string_view kResolvedHeader = "section,key,value";

}  // namespace

double evaluateExpression(std::string_view text) { return ExpressionParser(text).parse(); }

ScenarioConfig parseScenario(std::istream& in, const std::string& source) {
  ScenarioBuilder builder(source);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "", "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      builder.openSection(section, line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "", "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (section.empty()) throw ParseError(source, line_no, key, "key outside any section");
    builder.add(section, key, trim(std::string_view(line).substr(eq + 1)), line_no);
  }
  return builder.build();
}

ScenarioConfig parseResolvedScenario(std::istream& in, const std::string& source) {
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kResolvedHeader) throw ParseError(source, 1, "", "expected header 'section,key,value'");
  return parseResolvedRows(in, source, 1);
}

ScenarioConfig loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open scenario file");
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  in.clear();
  in.seekg(0);
  if (first == kResolvedHeader) return parseResolvedScenario(in, path.string());
  return parseScenario(in, path.string());
}

void writeResolvedScenario(std::ostream& out, const ScenarioConfig& c) {
  CsvWriter w(out, {"section", "key", "value"});
  const auto row = [&](const std::string& section, const std::string& key, const std::string& value) {
    w.add(section).add(key).add(value).endRow();
  };
  const auto num = [&](const std::string& section, const std::string& key, double value) {
    row(section, key, formatNumber(value));
  };
  num("global", "alpha_gain", c.alpha_gain);
  num("global", "gamma", c.gamma);
  num("global", "dt", c.dt);
  num("global", "duration", c.duration);
  num("global", "nominal_gain", c.nominal_gain);
  num("global", "transient", c.transient);
  row("global", "seed", std::to_string(c.seed));
  row("global", "phi_init", c.phi_init == PhiInitMode::Random ? "random" : "scan");
  for (const auto& [pair, phi] : c.phi_overrides) {
    num("global", "phi_" + std::to_string(pair.first + 1) + "_" + std::to_string(pair.second + 1), phi);
  }
  for (std::size_t a = 0; a < c.agents.size(); ++a) {
    const AgentSpec& s = c.agents[a];
    const std::string section = "agent " + std::to_string(a + 1);
    num(section, "q_major", s.shape.q_major);
    num(section, "q_minor", s.shape.q_minor);
    num(section, "x", s.initial.position().x());
    num(section, "y", s.initial.position().y());
    num(section, "theta", s.initial.theta());
    if (s.goal) {
      num(section, "goal_x", s.goal->x());
      num(section, "goal_y", s.goal->y());
    }
    if (s.goal_theta) num(section, "goal_theta", *s.goal_theta);
  }
}

}  // namespace ellcbf::cli
