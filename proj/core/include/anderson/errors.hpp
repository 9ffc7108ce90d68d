#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace anderson {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite integrand, nonpositive input to a log fit, E inside the spectrum.
class DomainError : public Error {
public:
    using Error::Error;
};

// (lambda, E, eps) outside the regime where the fixed-point maps contract.
class InadmissibleError : public Error {
public:
    using Error::Error;
};

class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& what, std::vector<double> history = {})
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class IncompleteSampleError : public Error {
public:
    using Error::Error;
};

class UnsupportedVariantError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Combinatorial or desk-scale size limits.
class GuardError : public Error {
public:
    using Error::Error;
};

class EigenvalueHitError : public Error {
public:
    using Error::Error;
};

// A post-solve bound that should hold did not.
class CertificateError : public Error {
public:
    using Error::Error;
};

}  // namespace anderson
