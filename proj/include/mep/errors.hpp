#pragma once

#include <stdexcept>
#include <string>

namespace mep {

/// Vector lengths disagree with the model dimension.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain an operation is defined on.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine failed (non-convergence, underflow of both sides of a ratio, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input (files, CLI values). Carries the offending line when known.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mep
