#pragma once

#include <stdexcept>
#include <string>

namespace juelab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative procedure exhausted its budget.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::size_t budget)
        : Error(what + " (iteration budget " + std::to_string(budget) + " exceeded)"), budget_(budget) {}
    std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t budget_;
};

/// The working precision is too low for the requested quantity.
class PrecisionLoss : public Error {
public:
    PrecisionLoss(const std::string& what, unsigned required_bits)
        : Error(what + " (estimated precision needed: " + std::to_string(required_bits) + " bits)"),
          required_bits_(required_bits) {}
    unsigned required_bits() const noexcept { return required_bits_; }

private:
    unsigned required_bits_;
};

/// A formula was evaluated at a point where one of its denominators vanishes.
class DegeneratePoint : public Error {
public:
    DegeneratePoint(const std::string& where, const std::string& factor)
        : Error(where + ": degenerate point, vanishing factor " + factor), factor_(factor) {}
    const std::string& factor() const noexcept { return factor_; }

private:
    std::string factor_;
};

/// The denominator D of the r_n = N/D reconstruction vanished.
class ZeroDenominator : public Error {
public:
    using Error::Error;
};

}  // namespace juelab
