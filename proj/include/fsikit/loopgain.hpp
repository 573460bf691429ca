#pragma once

#include "fsikit/core_math.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace fsikit {

enum class Topology { Buck, Boost, BuckBoost };
enum class Scheme { Pcmc, AcmcType2, AcmcPi };
enum class VoltageLoopKind { Open, Proportional, Type2, Pi };

// Outer voltage-loop compensator G_v (only exercised for the buck PCMC
// ripple analysis and the closed-loop simulator mode).
struct VoltageLoop {
    VoltageLoopKind kind = VoltageLoopKind::Open;
    double k_p = 0.0;     // Proportional
    double K_c = 0.0;     // Type2 / Pi integral gain (1/s)
    double omega_z = 0.0; // rad/s
    double omega_p = 0.0; // rad/s, Type2 only
    double v_r = 0.0;     // reference voltage (V)
};

// The single input record for every analysis: topology, power-stage values,
// control scheme, current compensator, ramp, and operating point.
//
// Operating point: specify (v_s, v_o) or (v_s, duty); v_c is an optional
// direct override used by the simulator / sampled-data legs (when absent it
// is derived from the periodic steady state).
struct ConverterConfig {
    Topology topology = Topology::Buck;
    Scheme scheme = Scheme::Pcmc;

    double v_s = 0.0; // source voltage (V)
    std::optional<double> v_o;
    std::optional<double> duty;
    std::optional<double> v_c;

    double f_s = 0.0; // switching frequency (Hz)
    double L = 0.0;   // H
    double C = 0.0;   // F
    double R = 0.0;   // load (ohm)
    double R_c = 0.0; // capacitor ESR (ohm), 0 allowed
    double R_s = 0.0; // current-sense resistance (ohm)

    double V_m = 0.0; // ramp amplitude (V); slope m_a = V_m / T
    double V_l = 0.0; // ramp start level (V)

    // Current-loop compensator G_c (ignored for PCMC):
    // Type2: K_c*(1+s/omega_z)/(s*(1+s/omega_p));  Pi: K_c*(1+s/omega_z)/s.
    double K_c = 0.0;     // 1/s
    double omega_z = 0.0; // rad/s
    double omega_p = 0.0; // rad/s (unused for Pi)

    VoltageLoop voltage_loop;

    double omega_s() const;   // 2*pi*f_s
    double period() const;    // 1/f_s
    double rho() const;       // R/(R+R_c)
    double omega_esr() const; // 1/(R_c*C); +inf when R_c == 0

    void validate() const; // throws ConfigError with a field-level message
};

struct OperatingPoint {
    double D;   // duty cycle
    double v_a; // unified source amplitude (V): v_h - v_l of the v_L square wave
    double m1;  // on-phase inductor current slope (A/s)
    double m2;  // off-phase downward slope magnitude (A/s)
    double v_o; // output voltage implied by the operating point (V)
};

// Duty cycle, unified amplitude v_a, and inductor slopes from the topology:
// Buck: D = v_o/v_s, v_a = v_s;  Boost: D = 1 - v_s/v_o, v_a = v_o;
// Buck-boost: D = v_o/(v_o+v_s), v_a = v_s/(1-D).
// m1 = (1-D)*v_a/L, m2 = D*v_a/L.  Throws ConfigError if D is not in (0,1).
OperatingPoint duty_and_va(const ConverterConfig& cfg);

// One real-rational factor: dc_gain_coeff * prod(1+s/z) / (s^origin_order *
// prod(1+s/p)), with real positive zeros and distinct real positive poles.
struct RationalLoopGain {
    double dc_gain_coeff = 0.0;
    std::vector<double> zeros; // rad/s
    std::vector<double> poles; // rad/s
    int origin_order = 0;      // 0..3
};

// A loop gain as a sum of rational parts.  Single-part for the current-loop
// builders; the buck PCMC voltage-loop gain needs two parts (its combined
// numerator is not guaranteed to factor over the reals).
struct LoopGain {
    std::vector<RationalLoopGain> parts;
};

// Current-loop gain T(s) = v_a * G_c * G_i / V_m with G_i = R_s/(s L):
//   PCMC:       (v_a R_s / V_m L) / s
//   ACMC type2: (v_a R_s K_c / V_m L) (1+s/omega_z)/(s^2 (1+s/omega_p))
//   ACMC PI:    (v_a R_s K_c / V_m L) (1+s/omega_z)/s^2
// Requires an open voltage loop.
LoopGain build_loop_gain(const ConverterConfig& cfg);

// High-frequency loop gain of the buck PCMC converter with a closed voltage
// loop (two parts):
//   v_s R_s/(V_m L s)  +  rho v_s (1+s/omega_esr) G_v /(V_m L C s^2)
// with G_v replaced by its high-frequency form (k_p for proportional,
// K_c/omega_z for PI, (K_c/omega_z)/(1+s/omega_p) for type-II).
// Buck topology + PCMC only; requires a non-open voltage loop.
LoopGain build_pcmc_voltage_loop_gain(const ConverterConfig& cfg);

std::complex<double> evaluate_at(const RationalLoopGain& T, double omega);
std::complex<double> evaluate_at(const LoopGain& T, double omega);

// Exact partial-fraction decomposition (strictly proper parts, origin order
// <= 2, distinct poles).  Recombining terms reproduces the original gain.
std::vector<PartialFractionTerm> partial_fractions(const RationalLoopGain& T);
std::vector<PartialFractionTerm> partial_fractions(const LoopGain& T);

// Unique omega_c with |T(j omega_c)| = 1, located by log-grid bracketing and
// bisection to 1e-10 relative, searched in [1e-3, 1e3]*omega_s.
// Throws NumericalError if there is no crossing (or more than one).
double crossover_frequency(const LoopGain& T, double omega_s);

// 180 deg + phase(T(j omega_c)), in degrees.
double phase_margin(const LoopGain& T, double omega_s);

// Closed-form crossovers used as cross-checks:
// type-II (omega_z << omega_s): omega_c = (omega_s/sqrt2)*sqrt(sqrt(p^4+4K^2p^2)-p^2)
// PI: omega_c = sqrt2*omega_s*Kt*z / sqrt(sqrt(Kt^4+4Kt^2 z^4)-Kt^2)
double crossover_type2_closed_form(double K, double p, double omega_s);
double crossover_pi_closed_form(double Ktilde, double z, double omega_s);

// Consolidated dimensionless quantities echoed by the CLI and used by the
// closed-form conditions.  r = omega_esr/omega_s (0 marks "absent", R_c = 0).
struct NormalizedGains {
    double K;      // v_a R_s K_c / (V_m omega_z L omega_s)   (type-II)
    double Ktilde; // v_a R_s K_c / (V_m L omega_s^2)         (PI)
    double p;      // omega_p / omega_s (0 if absent)
    double z;      // omega_z / omega_s
    double r;      // omega_esr / omega_s (0 if R_c == 0)
    double rho;
    double D;
    double v_a;
};
NormalizedGains normalized_gains(const ConverterConfig& cfg);

} // namespace fsikit
