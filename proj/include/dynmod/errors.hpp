// errors.hpp: exception types shared by the dynmod library

#pragma once

#include <stdexcept>
#include <string>

namespace dynmod {

// Precondition violation on an argument (bad step size, order overflow, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A qubit state or amplitude ratio that violates normalization.
class InvalidState : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace dynmod
