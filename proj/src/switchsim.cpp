#include "fsikit/switchsim.hpp"

#include "fsikit/csv.hpp"
#include "fsikit/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fsikit {

namespace {

int current_comp_states(Scheme s) {
    switch (s) {
    case Scheme::Pcmc:
        return 0;
    case Scheme::AcmcPi:
        return 1;
    case Scheme::AcmcType2:
        return 2;
    }
    return 0;
}

int voltage_comp_states(VoltageLoopKind k) {
    switch (k) {
    case VoltageLoopKind::Open:
    case VoltageLoopKind::Proportional:
        return 0;
    case VoltageLoopKind::Pi:
        return 1;
    case VoltageLoopKind::Type2:
        return 2;
    }
    return 0;
}

Eigen::MatrixXd augmented(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = A;
    M.topRightCorner(n, 1) = b;
    return M;
}

constexpr double kDcmCurrentFloor = -1e-9; // amperes

} // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd>
state_matrices(const ConverterConfig& cfg, bool switch_on) {
    cfg.validate();
    const bool closed_vloop = cfg.voltage_loop.kind != VoltageLoopKind::Open;
    if (closed_vloop &&
        (cfg.topology != Topology::Buck || cfg.scheme != Scheme::Pcmc))
        throw ConfigError(
            "closed voltage-loop simulation is supported for buck PCMC only");

    const int nc = current_comp_states(cfg.scheme);
    const int nv = voltage_comp_states(cfg.voltage_loop.kind);
    const int n = 2 + nc + nv;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    const double rho = cfg.rho();
    const double L = cfg.L;
    const double C = cfg.C;
    const double R = cfg.R;
    const double R_c = cfg.R_c;

    // Output voltage row c_vo (v_o = c_vo * x) per phase, and power-stage
    // rows.  "Series" phase = the inductor feeds the output through the
    // diode/switch; "isolated" phase = the capacitor alone supplies the load.
    Eigen::RowVectorXd c_vo = Eigen::RowVectorXd::Zero(n);
    const bool series_phase =
        (cfg.topology == Topology::Buck) ? true : !switch_on;
    if (series_phase) {
        // v_o = rho*(v_C + R_c*i_L); i_C = rho*(i_L - v_C/R)
        c_vo(0) = rho * R_c;
        c_vo(1) = rho;
        A(1, 0) = rho / C;
        A(1, 1) = -rho / (R * C);
    } else {
        // capacitor discharges into R alone through its ESR
        c_vo(1) = rho;
        A(1, 1) = -rho / (R * C);
    }

    // Inductor equation per topology/phase.
    switch (cfg.topology) {
    case Topology::Buck:
        A.row(0) = -c_vo / L;
        if (switch_on)
            b(0) = cfg.v_s / L;
        break;
    case Topology::Boost:
        if (switch_on) {
            b(0) = cfg.v_s / L;
        } else {
            A.row(0) = -c_vo / L;
            b(0) = cfg.v_s / L;
        }
        break;
    case Topology::BuckBoost:
        if (switch_on)
            b(0) = cfg.v_s / L;
        else
            A.row(0) = -c_vo / L;
        break;
    }

    // Current-loop compensator, driven by e = v_c - R_s*i_L.  The constant
    // v_c enters through d_y/b at model-assembly time; here only the state
    // coupling (-R_s*i_L) is placed, with the v_c feed marked by b-entries of
    // +1 to be scaled by v_c in build_model.  To keep state_matrices usable
    // standalone, v_c is folded in by build_model; the rows here use v_c = 0.
    if (nc >= 1)
        A(2, 0) = -cfg.R_s; // d(xc1)/dt = e
    if (nc == 2) {
        A(3, 0) = -cfg.R_s; // d(xc2)/dt = -omega_p*xc2 + e
        A(3, 3) = -cfg.omega_p;
    }

    // Voltage-loop compensator states, driven by e_v = v_r - v_o.
    if (nv >= 1) {
        A.row(2 + nc) = -c_vo;
        b(2 + nc) = cfg.voltage_loop.v_r;
    }
    if (nv == 2) {
        A.row(3 + nc) = -c_vo;
        A(3 + nc, 3 + nc) += -cfg.voltage_loop.omega_p;
        b(3 + nc) = cfg.voltage_loop.v_r;
    }

    return {A, b};
}

double SwitchedModel::ramp(double t_in_cycle) const {
    return cfg.V_l + (cfg.V_m - cfg.V_l) * t_in_cycle / T;
}

double SwitchedModel::y(const Eigen::VectorXd& x, bool on) const {
    return on ? c_y_on.dot(x) + d_y_on : c_y_off.dot(x) + d_y_off;
}

double estimate_control_voltage(const ConverterConfig& cfg) {
    const OperatingPoint op = duty_and_va(cfg);
    const double i_mean = (cfg.topology == Topology::Buck)
                              ? op.v_o / cfg.R
                              : op.v_o / (cfg.R * (1.0 - op.D));
    if (cfg.scheme == Scheme::Pcmc) {
        // At the crossing: v_c - R_s*i_peak = h(D*T).
        const double i_peak = i_mean + 0.5 * op.m1 * op.D / cfg.f_s;
        return cfg.R_s * i_peak + cfg.V_l + (cfg.V_m - cfg.V_l) * op.D;
    }
    // ACMC: the compensator integrator forces mean(v_c - R_s*i_L) = 0.
    return cfg.R_s * i_mean;
}

SwitchedModel build_model(const ConverterConfig& cfg) {
    cfg.validate();
    SwitchedModel m;
    m.cfg = cfg;
    m.op = duty_and_va(cfg);
    m.T = cfg.period();

    const int nc = current_comp_states(cfg.scheme);
    const int nv = voltage_comp_states(cfg.voltage_loop.kind);
    m.n = 2 + nc + nv;

    const bool closed_vloop = cfg.voltage_loop.kind != VoltageLoopKind::Open;
    m.v_c = cfg.v_c.has_value()
                ? *cfg.v_c
                : (closed_vloop ? 0.0 : estimate_control_voltage(cfg));

    auto on_sys = state_matrices(cfg, true);
    auto off_sys = state_matrices(cfg, false);
    m.A_on = on_sys.first;
    m.b_on = on_sys.second;
    m.A_off = off_sys.first;
    m.b_off = off_sys.second;

    // Feed the constant v_c into the current-compensator drive e = v_c-R_s i_L.
    if (nc >= 1) {
        m.b_on(2) += m.v_c;
        m.b_off(2) += m.v_c;
    }
    if (nc == 2) {
        m.b_on(3) += m.v_c;
        m.b_off(3) += m.v_c;
    }

    // Output-voltage readouts.
    const double rho = cfg.rho();
    auto vo_row = [&](bool on) {
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(m.n);
        const bool series =
            (cfg.topology == Topology::Buck) ? true : !on;
        if (series) {
            c(0) = rho * cfg.R_c;
            c(1) = rho;
        } else {
            c(1) = rho;
        }
        return c;
    };
    m.c_vo_on = vo_row(true);
    m.c_vo_off = vo_row(false);

    // Comparator signal y.
    auto y_row = [&](bool on) -> std::pair<Eigen::RowVectorXd, double> {
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(m.n);
        double d = 0.0;
        const Eigen::RowVectorXd& c_vo = on ? m.c_vo_on : m.c_vo_off;
        switch (cfg.scheme) {
        case Scheme::Pcmc: {
            // y = v_c_eff - R_s*i_L with v_c_eff = v_c + G_v(v_r - v_o)
            c(0) = -cfg.R_s;
            d = m.v_c;
            switch (cfg.voltage_loop.kind) {
            case VoltageLoopKind::Open:
                break;
            case VoltageLoopKind::Proportional:
                c -= cfg.voltage_loop.k_p * c_vo;
                d += cfg.voltage_loop.k_p * cfg.voltage_loop.v_r;
                break;
            case VoltageLoopKind::Pi:
                c(2) = cfg.voltage_loop.K_c;
                c -= cfg.voltage_loop.K_c / cfg.voltage_loop.omega_z * c_vo;
                d += cfg.voltage_loop.K_c / cfg.voltage_loop.omega_z *
                     cfg.voltage_loop.v_r;
                break;
            case VoltageLoopKind::Type2:
                c(2) = cfg.voltage_loop.K_c;
                c(3) = cfg.voltage_loop.K_c *
                       (cfg.voltage_loop.omega_p - cfg.voltage_loop.omega_z) /
                       cfg.voltage_loop.omega_z;
                break;
            }
            break;
        }
        case Scheme::AcmcPi:
            // y = G_c(v_c - R_s i_L) + v_c, G_c = K_c(1+s/omega_z)/s
            c(2) = cfg.K_c;
            c(0) = -cfg.K_c / cfg.omega_z * cfg.R_s;
            d = m.v_c * (1.0 + cfg.K_c / cfg.omega_z);
            break;
        case Scheme::AcmcType2:
            // G_c = K_c(1+s/omega_z)/(s(1+s/omega_p)) realized as
            // u = K_c*xc1 + K_c*(omega_p-omega_z)/omega_z * xc2
            c(2) = cfg.K_c;
            c(3) = cfg.K_c * (cfg.omega_p - cfg.omega_z) / cfg.omega_z;
            d = m.v_c;
            break;
        }
        return {c, d};
    };
    auto y_on = y_row(true);
    auto y_off = y_row(false);
    m.c_y_on = y_on.first;
    m.d_y_on = y_on.second;
    m.c_y_off = y_off.first;
    m.d_y_off = y_off.second;

    m.M_on = augmented(m.A_on, m.b_on);
    m.M_off = augmented(m.A_off, m.b_off);
    const double h = m.T / SwitchedModel::kSubsteps;
    m.Phi_on = (m.M_on * h).exp();
    m.Phi_off = (m.M_off * h).exp();
    return m;
}

Eigen::VectorXd default_initial_state(const SwitchedModel& m) {
    const ConverterConfig& cfg = m.cfg;
    const OperatingPoint& op = m.op;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m.n);
    const double i_mean = (cfg.topology == Topology::Buck)
                              ? op.v_o / cfg.R
                              : op.v_o / (cfg.R * (1.0 - op.D));
    x(0) = i_mean;
    x(1) = op.v_o;
    if (cfg.scheme != Scheme::Pcmc) {
        // Put the integrator near its steady level: y(D*T) = h(D*T).
        const double h_at_duty = cfg.V_l + (cfg.V_m - cfg.V_l) * op.D;
        x(2) = (h_at_duty - m.v_c) / cfg.K_c;
    }
    return x * 1.001; // 0.1% perturbation to expose instability
}

namespace {

// State after time tau under the augmented propagator from xa = [x; 1].
Eigen::VectorXd propagate(const Eigen::MatrixXd& M, const Eigen::VectorXd& xa,
                          double tau) {
    const Eigen::MatrixXd Phi = (M * tau).exp();
    return Phi * xa;
}

} // namespace

CycleResult advance_one_period(const SwitchedModel& m,
                               const Eigen::VectorXd& x0, double t0,
                               std::vector<TraceSample>* trace) {
    const int n = m.n;
    const int nsub = SwitchedModel::kSubsteps;
    const double h = m.T / nsub;

    Eigen::VectorXd xa(n + 1);
    xa.head(n) = x0;
    xa(n) = 1.0;

    CycleResult res;
    res.dcm = false;
    res.saturated = false;

    auto record = [&](double t, const Eigen::VectorXd& state, bool on) {
        if (!trace)
            return;
        TraceSample s{};
        s.t = t0 + t;
        s.i_L = state(0);
        s.v_C = state(1);
        s.v_o = on ? m.c_vo_on.dot(state) : m.c_vo_off.dot(state);
        s.y = m.y(state, on);
        s.h = m.ramp(std::min(t, m.T * (1.0 - 1e-15)));
        s.sw = on ? 1 : 0;
        trace->push_back(s);
    };

    auto phi_on = [&](const Eigen::VectorXd& state, double t) {
        return m.y(state, true) - m.ramp(t);
    };

    double t_off = -1.0;
    Eigen::VectorXd xa_off;

    if (phi_on(x0, 0.0) <= 0.0) {
        // Comparator already below the ramp at the clock: zero duty.
        t_off = 0.0;
        xa_off = xa;
    } else {
        record(0.0, x0, true);
        double t_prev = 0.0;
        Eigen::VectorXd xa_prev = xa;
        for (int k = 1; k <= nsub; ++k) {
            Eigen::VectorXd xa_next = m.Phi_on * xa_prev;
            const double t_next = k * h;
            if (phi_on(xa_next.head(n), t_next) <= 0.0) {
                // Bracketed crossing in [t_prev, t_next]: bisect.
                double lo = 0.0, hi = h;
                Eigen::VectorXd x_hi = xa_next;
                for (int it = 0; it < 80 && (hi - lo) > 1e-12 * m.T; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    Eigen::VectorXd x_mid = propagate(m.M_on, xa_prev, mid);
                    if (phi_on(x_mid.head(n), t_prev + mid) <= 0.0) {
                        hi = mid;
                        x_hi = x_mid;
                    } else {
                        lo = mid;
                    }
                }
                t_off = t_prev + hi;
                xa_off = x_hi;
                break;
            }
            if (xa_next(0) < kDcmCurrentFloor)
                res.dcm = true;
            record(t_next, xa_next.head(n), true);
            xa_prev = xa_next;
            t_prev = t_next;
        }
        if (t_off < 0.0) {
            // No crossing: switch stays on for the full cycle.
            res.saturated = true;
            res.duty = 1.0;
            res.x_end = xa_prev.head(n);
            return res;
        }
    }

    res.duty = t_off / m.T;
    record(t_off, xa_off.head(n), false);

    // Off phase: partial segment to the substep grid, then cached steps.
    const int k_grid = std::min(
        nsub, static_cast<int>(std::ceil(t_off / h - 1e-12)));
    double t = t_off;
    Eigen::VectorXd xa_cur = xa_off;
    const double t_grid = k_grid * h;
    if (t_grid > t_off + 1e-15 * m.T) {
        xa_cur = propagate(m.M_off, xa_cur, t_grid - t_off);
        t = t_grid;
        if (xa_cur(0) < kDcmCurrentFloor)
            res.dcm = true;
        record(t, xa_cur.head(n), false);
    }
    for (int k = k_grid + 1; k <= nsub; ++k) {
        xa_cur = m.Phi_off * xa_cur;
        t = k * h;
        if (xa_cur(0) < kDcmCurrentFloor)
            res.dcm = true;
        record(t, xa_cur.head(n), false);
    }
    res.x_end = xa_cur.head(n);
    return res;
}

TraceClass classify_trace(const std::vector<Eigen::VectorXd>& clock_samples,
                          int settle_periods, int window_periods, bool dcm) {
    if (dcm)
        return TraceClass::Dcm;
    const int N = static_cast<int>(clock_samples.size());
    if (settle_periods < 0 || window_periods < 3 ||
        settle_periods + window_periods + 1 > N)
        return TraceClass::Unclassified;

    const int s = settle_periods;
    const int w = window_periods;

    double scale = 0.0;
    for (int i = s; i <= s + w; ++i)
        scale = std::max(scale, clock_samples[static_cast<size_t>(i)].norm());
    const double tol = (1e-6 + 1e-4) * scale;

    std::vector<double> d1(static_cast<size_t>(w));
    double max_d1 = 0.0, max_d2 = 0.0;
    for (int i = 0; i < w; ++i) {
        d1[static_cast<size_t>(i)] =
            (clock_samples[static_cast<size_t>(s + i + 1)] -
             clock_samples[static_cast<size_t>(s + i)])
                .norm();
        max_d1 = std::max(max_d1, d1[static_cast<size_t>(i)]);
    }
    for (int i = 0; i + 2 <= w; ++i)
        max_d2 = std::max(max_d2,
                          (clock_samples[static_cast<size_t>(s + i + 2)] -
                           clock_samples[static_cast<size_t>(s + i)])
                              .norm());

    if (max_d1 < tol)
        return TraceClass::Period1;

    const bool alternating = max_d2 < 0.1 * max_d1;
    if (alternating) {
        // Distinguish a sustained period-2 orbit from a decaying alternating
        // transient (eigenvalue near -1 but inside the unit circle).
        const int half = w / 2;
        double a1 = 0.0, a2 = 0.0;
        for (int i = 0; i < half; ++i)
            a1 = std::max(a1, d1[static_cast<size_t>(i)]);
        for (int i = half; i < w; ++i)
            a2 = std::max(a2, d1[static_cast<size_t>(i)]);
        return (a2 < 0.8 * a1) ? TraceClass::Period1 : TraceClass::Subharmonic;
    }
    return TraceClass::Unclassified;
}

namespace {

void derive_windows(int n_periods, const SimOptions& opts, int& settle,
                    int& window) {
    settle = opts.settle_periods;
    window = opts.window_periods;
    if (settle < 0 || window < 0) {
        if (n_periods >= 260) {
            settle = 150;
            window = 100;
        } else {
            settle = n_periods / 2;
            window = std::max(3, n_periods - settle - 2);
        }
    }
}

} // namespace

SimTrace simulate(const ConverterConfig& cfg, int n_periods,
                  const SimOptions& opts) {
    if (n_periods < 1)
        throw ConfigError("n_periods must be >= 1");
    const SwitchedModel model = build_model(cfg);
    Eigen::VectorXd x =
        opts.x0.has_value() ? *opts.x0 : default_initial_state(model);
    if (x.size() != model.n)
        throw ConfigError("initial state has the wrong dimension");

    SimTrace trace;
    trace.clock_samples.push_back(x);
    for (int k = 0; k < n_periods; ++k) {
        CycleResult cyc = advance_one_period(
            model, x, k * model.T,
            opts.record_samples ? &trace.samples : nullptr);
        trace.duty_sequence.push_back(cyc.duty);
        x = cyc.x_end;
        trace.clock_samples.push_back(x);
        if (cyc.dcm) {
            trace.dcm_stop = true;
            break;
        }
    }

    int settle, window;
    derive_windows(static_cast<int>(trace.duty_sequence.size()), opts, settle,
                   window);
    trace.classification =
        classify_trace(trace.clock_samples, settle, window, trace.dcm_stop);
    return trace;
}

SimTrace rk4_crosscheck(const ConverterConfig& cfg, int n_periods,
                        int steps_per_period, const SimOptions& opts) {
    if (steps_per_period < 1000)
        throw ConfigError("rk4_crosscheck requires >= 1000 steps per period");
    if (n_periods < 1)
        throw ConfigError("n_periods must be >= 1");
    const SwitchedModel model = build_model(cfg);
    const int n = model.n;
    const double T = model.T;
    const double h = T / steps_per_period;

    auto deriv = [&](const Eigen::VectorXd& x, bool on) -> Eigen::VectorXd {
        return on ? (model.A_on * x + model.b_on).eval()
                  : (model.A_off * x + model.b_off).eval();
    };
    auto rk4_step = [&](const Eigen::VectorXd& x, double dt,
                        bool on) -> Eigen::VectorXd {
        const Eigen::VectorXd k1 = deriv(x, on);
        const Eigen::VectorXd k2 = deriv(x + 0.5 * dt * k1, on);
        const Eigen::VectorXd k3 = deriv(x + 0.5 * dt * k2, on);
        const Eigen::VectorXd k4 = deriv(x + dt * k3, on);
        return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    Eigen::VectorXd x =
        opts.x0.has_value() ? *opts.x0 : default_initial_state(model);
    if (x.size() != n)
        throw ConfigError("initial state has the wrong dimension");

    SimTrace trace;
    trace.clock_samples.push_back(x);
    for (int cycle = 0; cycle < n_periods; ++cycle) {
        double t = 0.0; // within cycle
        bool dcm = false;
        double duty = 1.0;
        bool crossed = false;

        auto phi_on = [&](const Eigen::VectorXd& s, double tc) {
            return model.y(s, true) - model.ramp(tc);
        };

        if (phi_on(x, 0.0) <= 0.0) {
            duty = 0.0;
            crossed = true;
        } else {
            for (int k = 0; k < steps_per_period; ++k) {
                const Eigen::VectorXd x_next = rk4_step(x, h, true);
                const double t_next = (k + 1) * h;
                if (phi_on(x_next, t_next) <= 0.0) {
                    double lo = 0.0, hi = h;
                    for (int it = 0; it < 80 && (hi - lo) > 1e-12 * T; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const Eigen::VectorXd xm = rk4_step(x, mid, true);
                        if (phi_on(xm, t + mid) <= 0.0)
                            hi = mid;
                        else
                            lo = mid;
                    }
                    x = rk4_step(x, hi, true);
                    t += hi;
                    duty = t / T;
                    crossed = true;
                    break;
                }
                x = x_next;
                t = t_next;
                if (x(0) < kDcmCurrentFloor)
                    dcm = true;
            }
        }

        if (crossed) {
            // Partial off step back onto the step grid, then full steps.
            const int k_grid = std::min(
                steps_per_period, static_cast<int>(std::ceil(t / h - 1e-12)));
            const double t_grid = k_grid * h;
            if (t_grid > t + 1e-15 * T) {
                x = rk4_step(x, t_grid - t, false);
                t = t_grid;
            }
            for (int k = k_grid; k < steps_per_period; ++k) {
                x = rk4_step(x, h, false);
                if (x(0) < kDcmCurrentFloor)
                    dcm = true;
            }
        }
        trace.duty_sequence.push_back(duty);
        trace.clock_samples.push_back(x);
        if (dcm) {
            trace.dcm_stop = true;
            break;
        }
    }

    int settle, window;
    derive_windows(static_cast<int>(trace.duty_sequence.size()), opts, settle,
                   window);
    trace.classification =
        classify_trace(trace.clock_samples, settle, window, trace.dcm_stop);
    return trace;
}

void write_trace_csv(const SimTrace& trace, std::ostream& os) {
    os << "t,i_L,v_C,v_o,y,h,switch\n";
    for (const auto& s : trace.samples)
        os << format_number(s.t) << ',' << format_number(s.i_L) << ','
           << format_number(s.v_C) << ',' << format_number(s.v_o) << ','
           << format_number(s.y) << ',' << format_number(s.h) << ',' << s.sw
           << '\n';
}

} // namespace fsikit
