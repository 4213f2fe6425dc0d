#pragma once

#include <stdexcept>
#include <string>

namespace rsvgd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad caller-supplied data: dimension mismatch, non-finite values, empty sets.
class InputError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Factorization, eigensolver or non-finite intermediate failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double time, std::size_t step)
        : NumericalError(what), time_(time), step_(step) {}
    double time() const noexcept { return time_; }
    std::size_t step() const noexcept { return step_; }

private:
    double time_;
    std::size_t step_;
};

// No schedule satisfies the step-size caps.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, std::string constraint)
        : Error(what), constraint_(std::move(constraint)) {}
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

}  // namespace rsvgd
