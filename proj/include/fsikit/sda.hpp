#pragma once

#include "fsikit/switchsim.hpp"

#include <complex>
#include <vector>

namespace fsikit {

// Eigenvalue analysis of the clock-to-clock (stroboscopic/Poincare) map:
// subharmonic onset <=> a map eigenvalue crosses -1.
struct PoincareResult {
    Eigen::VectorXd fixed_point;
    double duty_at_fixed_point = 0.0;
    std::vector<std::complex<double>> eigenvalues; // length = state dimension
    std::complex<double> dominant;                 // largest magnitude
    bool unstable = false;        // max |lambda| > 1 + tol_eig
    bool marginal = false;        // | max|lambda| - 1 | <= tol_eig
    bool jacobian_warning = false; // step-halving disagreement > tol_eig
};

inline constexpr double kEigenvalueTol = 1e-3;

// One-period map of the switched converter (shared implementation with the
// simulator).  Throws NumericalError if the period hits DCM (the map is
// analyzed under the CCM assumption).
Eigen::VectorXd stroboscopic_map(const SwitchedModel& model,
                                 const Eigen::VectorXd& x);

// Newton iteration on P(x) - x with a finite-difference Jacobian; converges
// for unstable orbits too.  Seeded from the operating-point estimate when no
// seed is given.  Throws NumericalError (with the residual history) after 50
// iterations without convergence to 1e-10 * state scale.
Eigen::VectorXd find_periodic_orbit(const SwitchedModel& model);
Eigen::VectorXd find_periodic_orbit(const SwitchedModel& model,
                                    const Eigen::VectorXd& seed);

// Central-difference Jacobian of the map at x_star (per-state steps of 1e-6
// of the state scale) and its eigenvalues.  A step-halving re-computation
// that moves any eigenvalue by more than tol_eig sets jacobian_warning.
PoincareResult jacobian_eigenvalues(const SwitchedModel& model,
                                    const Eigen::VectorXd& x_star);

struct SdaVerdict {
    bool stable = false;   // all |lambda| < 1 - tol_eig
    bool marginal = false; // dominant within tol_eig of the unit circle
    PoincareResult details;
};

// Orbit + Jacobian eigenvalues for a config (v_c taken from the config or
// estimated, as in build_model).
SdaVerdict sda_verdict(const ConverterConfig& cfg);

// Solves for the constant control voltage whose periodic orbit realizes the
// duty cycle implied by the config operating point (secant iteration on the
// orbit duty).  Returns the calibrated v_c.
double calibrate_control_voltage(const ConverterConfig& cfg);

} // namespace fsikit
