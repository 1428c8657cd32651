#pragma once

#include <stdexcept>
#include <string>

namespace fgap {

// Bad input: malformed gaps, divisor points off their gap, unsupported options.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical stage failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double last, double previous)
        : NumericalError(what), last_(last), previous_(previous) {}
    double last_estimate() const noexcept { return last_; }
    double previous_estimate() const noexcept { return previous_; }

private:
    double last_;
    double previous_;
};

class BuildError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InversionError : public NumericalError {
public:
    InversionError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace fgap
