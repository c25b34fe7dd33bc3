#pragma once

#include <stdexcept>
#include <string>

namespace seqsel {

// Bad user-supplied configuration (unknown dependence label, malformed flag
// combination). CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data, or an I/O failure. CLI exit code 3.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation degenerated numerically, e.g. the predictive density
// underflowed to zero in the forward filter. CLI exit code 4.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seqsel
