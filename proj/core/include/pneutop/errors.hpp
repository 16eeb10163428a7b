#pragma once

#include <stdexcept>
#include <string>

namespace pneutop {

/// Invalid or inconsistent user configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Field length does not match the domain it is applied to.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear solve failed or produced a residual above tolerance. Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called on an object that is not ready for it (e.g. se* not frozen yet).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace pneutop
