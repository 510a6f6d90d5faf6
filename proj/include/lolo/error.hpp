#pragma once

#include <stdexcept>
#include <string>

namespace lolo {

/// Malformed input or configuration: schema, data file, flags. CLI exit 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fit or decomposition that could not produce a usable answer. CLI exit 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lolo
