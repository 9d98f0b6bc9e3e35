// Error types shared across the emulator modules.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aeronet {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scheduling a task before the current simulation time.
struct PastTimeError : SimError {
  using SimError::SimError;
};

// Event appended with a timestamp earlier than the previous record.
struct OrderingError : SimError {
  using SimError::SimError;
};

// Link registry / transport failures.
struct AlreadyOpenError : SimError {
  using SimError::SimError;
};
struct LinkDownError : SimError {
  using SimError::SimError;
};
struct UnsupportedLinkError : SimError {
  using SimError::SimError;
};

// Control-protocol failures.
struct InvalidSystemIdError : SimError {
  using SimError::SimError;
};
struct UnsupportedCommandError : SimError {
  using SimError::SimError;
};
struct UnknownVehicleError : SimError {
  using SimError::SimError;
};

// Datagram larger than the network MTU.
struct MtuExceededError : SimError {
  using SimError::SimError;
};

// Structured-log parsing failure; line is 1-based.
struct LogParseError : SimError {
  LogParseError(std::size_t line_no, const std::string& what)
      : SimError("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  std::size_t line;
};

// Log ends without the run terminator record.
struct PartialLogError : SimError {
  using SimError::SimError;
};

// Scenario file violates the schema; carries the full violation list.
struct ScenarioValidationError : SimError {
  explicit ScenarioValidationError(std::vector<std::string> v)
      : SimError(join(v)), violations(std::move(v)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += '\n';
      out += s;
    }
    return out;
  }
};

}  // namespace aeronet
