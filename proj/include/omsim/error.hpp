#pragma once

#include <stdexcept>
#include <string>

namespace omsim {

enum class ErrorKind { invalid_parameter, bistable, diverged, unstable, config, numerical, verification };

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::bistable: return "possibly_bistable";
    case ErrorKind::diverged: return "integration_diverged";
    case ErrorKind::unstable: return "unstable";
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::verification: return "verification_failed";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what) : Error(ErrorKind::invalid_parameter, what) {}
};

/// Damped fixed-point iteration for Q0 did not settle. Carries the last two iterates.
class BistableError : public Error {
public:
    BistableError(const std::string& what, double last, double previous)
        : Error(ErrorKind::bistable, what), last_(last), previous_(previous) {}
    double last() const noexcept { return last_; }
    double previous() const noexcept { return previous_; }

private:
    double last_;
    double previous_;
};

class DivergedError : public Error {
public:
    DivergedError(const std::string& what, double time) : Error(ErrorKind::diverged, what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class UnstableError : public Error {
public:
    explicit UnstableError(const std::string& what) : Error(ErrorKind::unstable, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line)
        : Error(ErrorKind::config, line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class VerificationFailure : public Error {
public:
    explicit VerificationFailure(const std::string& what) : Error(ErrorKind::verification, what) {}
};

} // namespace omsim
