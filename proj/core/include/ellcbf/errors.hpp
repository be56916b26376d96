#pragma once

#include <stdexcept>
#include <string>

namespace ellcbf {

/// No separating supporting line exists for a pair at start-up.
class InitializationError : public std::runtime_error {
 public:
  InitializationError(int i, int j, const std::string& what)
      : std::runtime_error(what), agent_i(i), agent_j(j) {}

  int agent_i;
  int agent_j;
};

/// The stacked barrier constraints admit no input.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to terminate or produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ellcbf
