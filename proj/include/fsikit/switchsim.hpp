#pragma once

#include "fsikit/loopgain.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace fsikit {

enum class TraceClass { Period1, Subharmonic, Dcm, Unclassified };

// State layout: [i_L, v_C, current-compensator states..., voltage-compensator
// states...].  Compensator order: PCMC 0, PI 1, type-II 2.
// Per-phase dynamics are affine: dx/dt = A x + b.
std::pair<Eigen::MatrixXd, Eigen::VectorXd>
state_matrices(const ConverterConfig& cfg, bool switch_on);

// Fully assembled switched model: per-phase affine systems, the comparator
// feedback signal y(x) = c_y x + d_y, the output-voltage readout, and the
// ramp h(t) = V_l + (V_m - V_l) t/T per cycle.
struct SwitchedModel {
    ConverterConfig cfg;
    OperatingPoint op;
    int n = 0; // state dimension (2..6)
    double v_c = 0.0;
    double T = 0.0;

    Eigen::MatrixXd A_on, A_off;
    Eigen::VectorXd b_on, b_off;
    Eigen::RowVectorXd c_y_on, c_y_off; // y = c_y x + d_y
    double d_y_on = 0.0, d_y_off = 0.0;
    Eigen::RowVectorXd c_vo_on, c_vo_off; // v_o = c_vo x

    // Cached one-substep propagators of the augmented system
    // [[A, b], [0, 0]] for the fixed substep T/kSubsteps.
    static constexpr int kSubsteps = 64;
    Eigen::MatrixXd M_on, M_off;     // augmented (n+1)x(n+1)
    Eigen::MatrixXd Phi_on, Phi_off; // exp(M * T/kSubsteps)

    double ramp(double t_in_cycle) const;
    double y(const Eigen::VectorXd& x, bool on) const;
};

// Builds the model; uses cfg.v_c when present, otherwise an analytic
// steady-state estimate (ACMC: the integrator forces v_c = R_s * mean(i_L);
// PCMC: v_c = R_s * i_peak + ramp level at the switching instant).
SwitchedModel build_model(const ConverterConfig& cfg);

// Analytic v_c estimate used when the config does not pin it.
double estimate_control_voltage(const ConverterConfig& cfg);

// Operating-point state estimate plus a 0.1% multiplicative perturbation
// (reaches the attractor quickly while exposing instability).
Eigen::VectorXd default_initial_state(const SwitchedModel& model);

struct TraceSample {
    double t;
    double i_L, v_C, v_o;
    double y, h;
    int sw; // 1 on, 0 off
};

struct SimTrace {
    std::vector<TraceSample> samples;
    std::vector<Eigen::VectorXd> clock_samples; // state at t = nT (n = 0..N)
    std::vector<double> duty_sequence;          // one entry per cycle
    TraceClass classification = TraceClass::Unclassified;
    bool dcm_stop = false; // inductor current reached zero; run cut short
};

struct CycleResult {
    Eigen::VectorXd x_end;
    double duty = 0.0;
    bool dcm = false;
    bool saturated = false; // no comparator crossing: on for the full cycle
};

// Advances one switching period from a clock instant using exact
// matrix-exponential segments.  Trailing-edge, latched: ON at the clock, OFF
// at the first y(t) <= h(t), then OFF until the next clock.  The crossing is
// bracketed on a 64-substep grid and bisected to 1e-12*T.  If `trace` is
// non-null, substep samples are appended (t0 = absolute time of the clock).
CycleResult advance_one_period(const SwitchedModel& model,
                               const Eigen::VectorXd& x0, double t0 = 0.0,
                               std::vector<TraceSample>* trace = nullptr);

// Classification on clock samples after settling:
//   Period1     max ||x[k+1]-x[k]|| below tolerance, or a decaying
//               alternating transient (period-2 amplitude shrinking by more
//               than 20% across the window halves)
//   Subharmonic sustained alternation: ||x[k+2]-x[k]|| under 10% of the
//               period-2 amplitude and the amplitude not decaying
//   Dcm         flagged by the simulator
//   Unclassified anything else
TraceClass classify_trace(const std::vector<Eigen::VectorXd>& clock_samples,
                          int settle_periods, int window_periods,
                          bool dcm = false);

struct SimOptions {
    std::optional<Eigen::VectorXd> x0;
    int settle_periods = -1; // -1: derived from n_periods (150 when room)
    int window_periods = -1; // -1: derived from n_periods (100 when room)
    bool record_samples = true;
};

SimTrace simulate(const ConverterConfig& cfg, int n_periods,
                  const SimOptions& opts = {});

// Independent fixed-step classical RK4 integrator with the same event rule
// (event located by step bisection); used to cross-validate the exact
// matrix-exponential path.  steps_per_period >= 1000.
SimTrace rk4_crosscheck(const ConverterConfig& cfg, int n_periods,
                        int steps_per_period, const SimOptions& opts = {});

// CSV: "t,i_L,v_C,v_o,y,h,switch".
void write_trace_csv(const SimTrace& trace, std::ostream& os);

} // namespace fsikit
