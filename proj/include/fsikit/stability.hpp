#pragma once

#include "fsikit/loopgain.hpp"

#include <iosfwd>
#include <vector>

namespace fsikit {

// A gain limit that may be "no limit at all" (negative denominator in the
// closed form means the converter cannot be destabilized through this
// mechanism).  Kept as an explicit flag rather than infinity so CSV output
// and comparisons stay well-defined.
struct Bound {
    bool always_stable = false;
    double value = 0.0; // valid when !always_stable
};

// Closed-form harmonic-balance verdict.  stable <=> index < 1
// <=> required_ramp_slope < m_a = V_m/T.
struct StabilityVerdict {
    bool stable = false;
    double index = 0.0;              // dimensionless, L-plot value
    double required_ramp_slope = 0.0; // S, V/s
    double margin = 0.0;             // 1 - index
};

// PCMC, open voltage loop: S = v_a*R_s*(D-1/2)/L, index = v_a*R_s*alpha0 /
// (V_m*L*omega_s).
StabilityVerdict pcmc_min_ramp(const ConverterConfig& cfg);

// K_max(D, p) = 1/(alpha0 - alpha); flagged always-stable when the
// denominator is not positive.
Bound kmax(double D, double p);

// Ktilde_max(D, z) = 1/(alpha0/z + alpha1); always-stable when the
// denominator is not positive.
Bound ktilde_max(double D, double z);

// ACMC type-II verdict.  Simplified mode (omega_z << omega_s):
// index = K*(alpha0 - alpha).  General mode: index of the full gain
// (1+s/omega_z)/(s^2(1+s/omega_p)) via the F-transform,
// index = Ktilde*(alpha1 + (1/p - 1/z)(alpha - alpha0)).
StabilityVerdict acmc_type2_verdict(const ConverterConfig& cfg,
                                    bool use_general);

// ACMC PI verdict:
// S = (v_a*R_s*K_c/L) * ((2D-1)/(2*omega_z) + (1-2D+2D^2)*T/4).
StabilityVerdict acmc_pi_verdict(const ConverterConfig& cfg);

// The T*omega_z << 1 simplification of the PI required ramp:
// S ~= v_a*R_s*K_c*(D-1/2)/(L*omega_z).
double acmc_pi_ramp_simplified(const ConverterConfig& cfg);

// Sufficient (conservative) stability conditions; each true forces the
// closed-form verdict stable.
struct ConservativeChecks {
    bool k_lt_1_over_pi = false;      // K < 1/pi            (type-II)
    bool ktilde_lt_bound = false;     // Ktilde < z/(pi(1+pi z))  (PI)
    bool wc_lt_ws_over_pi = false;    // omega_c < omega_s/pi
};
ConservativeChecks conservative_checks(const ConverterConfig& cfg);

// Earlier-literature conservative bound used as a sweep overlay:
// boost: min(1/(pi(1-D)), 1/(2pi));  buck: min(D/(pi(1-D)), 1/(2pi)).
double sb99_reference_bound(double D, Topology topology);

// Ramp-slope contribution m_v of the voltage-loop ripple (buck PCMC):
//   Open: 0
//   Proportional: (rho v_s k_p/(T L C omega_s^2)) (alpha0/r + alpha1)
//   Type2:        (K_v/omega_s^2) (alpha1 + (1/p - 1/r)(alpha - alpha0))
//   Pi:           (K_v/omega_s^2) (alpha0/r + alpha1)
// with K_v = rho v_s K_c/(T L C omega_z), r = omega_esr/omega_s, and
// alpha evaluated at the voltage compensator pole (type-II).
// Universal condition: v_s R_s (D-1/2)/L < m_a - m_v.
double voltage_loop_mv(const ConverterConfig& cfg);

// Combined buck PCMC + voltage-loop stability index (current part plus
// m_v/m_a), computed through the F-transform of the two-part loop gain.
double pcmc_voltage_loop_index(const ConverterConfig& cfg);

// Largest proportional voltage-loop gain before subharmonic onset:
// k_p < (omega_s C/rho)(V_m L omega_s/v_s - R_s alpha0)/(alpha0/r + alpha1).
// Always-stable when the denominator is not positive.
Bound kp_limit(const ConverterConfig& cfg);

struct SweepCell {
    bool stable = false;
    Bound bound;               // K_max or Ktilde_max for the cell
    bool sign_straddle = false; // denominator changes sign near this cell
};

struct SweepGrid {
    Scheme scheme = Scheme::AcmcType2; // AcmcType2 -> (D,p); AcmcPi -> (D,z)
    double gain = 0.0;                 // K or Ktilde the verdict is taken at
    std::vector<double> d_axis;
    std::vector<double> pz_axis;
    std::vector<SweepCell> cells; // row-major: [i_d * pz_axis.size() + i_pz]
};

// Rectangular grid of closed-form verdicts (default resolution 201x201 when
// driven from the CLI).  Cell stability is gain < bound (or always-stable).
SweepGrid sweep_stability(Scheme scheme, double gain, double d_min,
                          double d_max, double pz_min, double pz_max,
                          int n_d, int n_pz, int n_jobs = 1);

// CSV: header "D,p,stable,kmax" (or "D,z,stable,kmax"), one row per cell;
// always-stable cells carry the token ALWAYS_STABLE in the kmax column.
void write_sweep_csv(const SweepGrid& grid, std::ostream& os);

// CSV overlay "D,bound" of the sb99 reference bound over a D axis.
void write_overlay_csv(const std::vector<double>& d_axis, Topology topology,
                       std::ostream& os);

} // namespace fsikit
