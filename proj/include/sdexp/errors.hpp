#pragma once

#include <stdexcept>
#include <string>

namespace sdexp {

/// Argument outside an operation's domain (u <= 0, delta <= 0, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// b(u) = 0 at some u != 0, so the drift/noise ratio is undefined.
class DegenerateDiffusionError : public std::domain_error {
public:
    explicit DegenerateDiffusionError(double u)
        : std::domain_error("diffusion factor vanishes at u=" + std::to_string(u)),
          u_(u) {}
    double where() const { return u_; }

private:
    double u_;
};

/// A coefficient evaluated to a negative (or NaN) value on the nonnegative domain.
class CoefficientNegativeError : public std::domain_error {
public:
    CoefficientNegativeError(const std::string& which, double u, double value)
        : std::domain_error(which + " factor is negative at u=" + std::to_string(u) +
                            " (value " + std::to_string(value) + ")"),
          u_(u) {}
    double where() const { return u_; }

private:
    double u_;
};

/// Guard configuration is inconsistent (explosion threshold <= absorption floor).
class InvalidGuardError : public std::invalid_argument {
public:
    explicit InvalidGuardError(const std::string& what) : std::invalid_argument(what) {}
};

/// No admissible moment exponent exists for the given verdict.
class NoValidPError : public std::invalid_argument {
public:
    explicit NoValidPError(const std::string& what) : std::invalid_argument(what) {}
};

/// A trajectory statistic is undefined for the given path.
class UndefinedEstimateError : public std::runtime_error {
public:
    explicit UndefinedEstimateError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed coefficient expression.
class ExpressionError : public std::runtime_error {
public:
    explicit ExpressionError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration; names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sdexp
