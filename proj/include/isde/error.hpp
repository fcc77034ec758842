#pragma once

#include <stdexcept>
#include <string>

namespace isde {

// Failure to read or write a file, or malformed file content.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a result (singular matrix, guard exceeded, ...).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace isde
