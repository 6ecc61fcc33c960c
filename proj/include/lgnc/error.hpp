#pragma once

#include <stdexcept>
#include <string>

namespace lgnc {

/// Bad input to a library routine (empty mesh, n = 0, unknown case name...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested feature outside what the library provides (e.g. quadrature degree > 6).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Krylov solve that did not reach its tolerance within the iteration budget.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// dt * |w|_{1,inf} exceeded 1/4.
class CflViolation : public std::runtime_error {
public:
    CflViolation(const std::string& what, double product)
        : std::runtime_error(what), product_(product) {}
    double product() const noexcept { return product_; }

private:
    double product_;
};

/// A characteristic foot left the closed domain by more than the clamp tolerance.
class FootOutside : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration / mesh file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lgnc
