#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Bad arguments: dimension mismatch, out-of-range parameters, malformed config.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of a function (e.g. a kernel at the identity).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A linear system without a solution (inconsistent bracket decomposition).
class UnsolvableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace carnot
