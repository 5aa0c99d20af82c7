#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdeconv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a vector or image does not have the size an operator expects.
class DimensionError : public Error {
public:
    DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
        : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
                std::to_string(actual)),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

/// A point left the domain of a function (e.g. the Poisson gradient at eta <= 0).
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// An iterative routine ran out of iterations; carries the last estimate it had.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_estimate, int iterations)
        : Error(what + " after " + std::to_string(iterations) +
                " iterations (last estimate " + std::to_string(last_estimate) + ")"),
          last_estimate_(last_estimate), iterations_(iterations) {}

    double last_estimate() const noexcept { return last_estimate_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_estimate_;
    int iterations_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace pdeconv
