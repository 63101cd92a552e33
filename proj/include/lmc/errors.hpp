#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation outside a function's domain (density pole, radial f at x = y).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter value or violated precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Singular or otherwise malformed coefficient structure.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Quadrature or simulation failure; carries the residual that triggered it.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A rate certificate cannot be assembled (divergent integral, failed hypothesis).
class CertificateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace lmc
