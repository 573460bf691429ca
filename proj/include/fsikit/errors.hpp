#pragma once

#include <stdexcept>
#include <string>

namespace fsikit {

// Invalid or inconsistent converter configuration (bad field value, impossible
// operating point, unsupported scheme/topology combination).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed to produce a result (no unity-gain crossing,
// Newton non-convergence, DCM encountered where CCM is required, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fsikit
