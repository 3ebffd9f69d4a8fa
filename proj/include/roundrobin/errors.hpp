#pragma once

#include <stdexcept>
#include <string>

namespace roundrobin {

/// Invalid argument to a model or math routine (bad n, p, lambda, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a hard resource limit (enumeration size, allocation).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace roundrobin
