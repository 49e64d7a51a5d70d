#pragma once

#include <stdexcept>
#include <string>

namespace mlm {

// Two families, matching the CLI exit codes: domain/config problems (1) and
// simulation failures (2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class OutOfRange : public DomainError {
public:
    using DomainError::DomainError;
};

class InvalidTopology : public DomainError {
public:
    using DomainError::DomainError;
};

class InvalidParameter : public DomainError {
public:
    using DomainError::DomainError;
};

/// Config document error anchored to a 1-based source line (0 when unknown).
class ConfigError : public DomainError {
public:
    ConfigError(const std::string& message, int line)
        : DomainError(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class SingularNetwork : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class NonQuiescentRead : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class DegenerateLevels : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class CalibrationFailed : public SimulationError {
public:
    using SimulationError::SimulationError;
};

}  // namespace mlm
