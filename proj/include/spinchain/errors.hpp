#pragma once

#include <stdexcept>
#include <string>

namespace spinchain {

// Thrown when a request exceeds the desk-scale resource guards
// (e.g. exact propagation beyond 14 qubits). CLI maps it to exit code 3.
struct resource_limit_error : std::runtime_error {
    explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinchain
