#pragma once

#include <stdexcept>
#include <string>

namespace haarprod {

/// A numerical routine failed to converge or broke down. The message names
/// the routine and, when known, the seed and trial that produced the input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimensions or shapes that do not satisfy an operation's contract.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace haarprod
