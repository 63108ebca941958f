#pragma once

#include <stdexcept>
#include <string>

namespace oralstack {

// Bad flags or config documents (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal contract, e.g. a patient on both sides of a split (CLI exit code 4).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace oralstack
