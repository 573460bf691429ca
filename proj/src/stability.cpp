#include "fsikit/stability.hpp"

#include "fsikit/csv.hpp"
#include "fsikit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

namespace fsikit {

namespace {
constexpr double kPi = std::numbers::pi;

StabilityVerdict verdict_from_index(double index, double m_a) {
    StabilityVerdict v{};
    v.index = index;
    v.required_ramp_slope = index * m_a;
    v.margin = 1.0 - index;
    v.stable = index < 1.0;
    return v;
}
} // namespace

StabilityVerdict pcmc_min_ramp(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.scheme != Scheme::Pcmc)
        throw ConfigError("pcmc_min_ramp requires scheme = PCMC");
    const OperatingPoint op = duty_and_va(cfg);
    const double index =
        op.v_a * cfg.R_s * alpha0(op.D) / (cfg.V_m * cfg.L * cfg.omega_s());
    const double m_a = cfg.V_m * cfg.f_s;
    StabilityVerdict v = verdict_from_index(index, m_a);
    // identical to index*m_a; kept in the printed S = v_a R_s (D - 1/2)/L form
    v.required_ramp_slope = op.v_a * cfg.R_s * (op.D - 0.5) / cfg.L;
    return v;
}

Bound kmax(double D, double p) {
    const double den = alpha0(D) - alpha_closed(D, p);
    if (den <= 0.0)
        return {true, 0.0};
    return {false, 1.0 / den};
}

Bound ktilde_max(double D, double z) {
    if (!(z > 0.0))
        throw std::domain_error("z must be > 0");
    const double den = alpha0(D) / z + alpha1(D);
    if (den <= 0.0)
        return {true, 0.0};
    return {false, 1.0 / den};
}

StabilityVerdict acmc_type2_verdict(const ConverterConfig& cfg,
                                    bool use_general) {
    cfg.validate();
    if (cfg.scheme != Scheme::AcmcType2)
        throw ConfigError("acmc_type2_verdict requires scheme = ACMC type-II");
    const NormalizedGains g = normalized_gains(cfg);
    const double m_a = cfg.V_m * cfg.f_s;
    double index;
    if (use_general) {
        index = f_transform(partial_fractions(build_loop_gain(cfg)), g.D,
                            cfg.omega_s());
    } else {
        index = g.K * (alpha0(g.D) - alpha_closed(g.D, g.p));
    }
    return verdict_from_index(index, m_a);
}

StabilityVerdict acmc_pi_verdict(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.scheme != Scheme::AcmcPi)
        throw ConfigError("acmc_pi_verdict requires scheme = ACMC PI");
    const OperatingPoint op = duty_and_va(cfg);
    const double D = op.D;
    const double T = cfg.period();
    const double S = op.v_a * cfg.R_s * cfg.K_c / cfg.L *
                     ((2.0 * D - 1.0) / (2.0 * cfg.omega_z) +
                      (1.0 - 2.0 * D + 2.0 * D * D) * T / 4.0);
    const double m_a = cfg.V_m * cfg.f_s;
    StabilityVerdict v = verdict_from_index(S / m_a, m_a);
    v.required_ramp_slope = S;
    return v;
}

double acmc_pi_ramp_simplified(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.scheme != Scheme::AcmcPi)
        throw ConfigError("acmc_pi_ramp_simplified requires scheme = ACMC PI");
    const OperatingPoint op = duty_and_va(cfg);
    return op.v_a * cfg.R_s * cfg.K_c * (op.D - 0.5) / (cfg.L * cfg.omega_z);
}

ConservativeChecks conservative_checks(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.scheme == Scheme::Pcmc)
        throw ConfigError(
            "conservative_checks applies to the ACMC schemes only");
    const NormalizedGains g = normalized_gains(cfg);
    ConservativeChecks c{};
    c.k_lt_1_over_pi = g.K > 0.0 && g.K < 1.0 / kPi;
    c.ktilde_lt_bound =
        g.z > 0.0 && g.Ktilde < g.z / (kPi * (1.0 + kPi * g.z));
    const double wc = crossover_frequency(build_loop_gain(cfg), cfg.omega_s());
    c.wc_lt_ws_over_pi = wc < cfg.omega_s() / kPi;
    return c;
}

double sb99_reference_bound(double D, Topology topology) {
    if (!(D > 0.0 && D < 1.0))
        throw std::domain_error("D must lie in (0, 1)");
    const double cap = 1.0 / (2.0 * kPi);
    switch (topology) {
    case Topology::Buck:
        return std::min(D / (kPi * (1.0 - D)), cap);
    case Topology::Boost:
    case Topology::BuckBoost:
        return std::min(1.0 / (kPi * (1.0 - D)), cap);
    }
    throw std::domain_error("unknown topology");
}

double voltage_loop_mv(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.topology != Topology::Buck || cfg.scheme != Scheme::Pcmc)
        throw ConfigError(
            "voltage-loop ripple term is derived for the buck PCMC case");
    if (cfg.voltage_loop.kind == VoltageLoopKind::Open)
        return 0.0;

    const OperatingPoint op = duty_and_va(cfg);
    const double D = op.D;
    const double ws = cfg.omega_s();
    const double T = cfg.period();
    // 1/r = omega_s/omega_esr = omega_s*R_c*C (0 when R_c = 0: ESR zero at
    // infinity contributes nothing).
    const double inv_r = cfg.R_c * cfg.C * ws;
    const double a0_over_r_plus_a1 = alpha0(D) * inv_r + alpha1(D);

    switch (cfg.voltage_loop.kind) {
    case VoltageLoopKind::Proportional:
        return cfg.rho() * cfg.v_s * cfg.voltage_loop.k_p /
               (T * cfg.L * cfg.C * ws * ws) * a0_over_r_plus_a1;
    case VoltageLoopKind::Pi: {
        const double K_v = cfg.rho() * cfg.v_s * cfg.voltage_loop.K_c /
                           (T * cfg.L * cfg.C * cfg.voltage_loop.omega_z);
        return K_v / (ws * ws) * a0_over_r_plus_a1;
    }
    case VoltageLoopKind::Type2: {
        const double K_v = cfg.rho() * cfg.v_s * cfg.voltage_loop.K_c /
                           (T * cfg.L * cfg.C * cfg.voltage_loop.omega_z);
        const double p = cfg.voltage_loop.omega_p / ws;
        const double al = alpha_closed(D, p);
        return K_v / (ws * ws) *
               (alpha1(D) + (1.0 / p - inv_r) * (al - alpha0(D)));
    }
    case VoltageLoopKind::Open:
        break;
    }
    return 0.0;
}

double pcmc_voltage_loop_index(const ConverterConfig& cfg) {
    const OperatingPoint op = duty_and_va(cfg);
    return f_transform(partial_fractions(build_pcmc_voltage_loop_gain(cfg)),
                       op.D, cfg.omega_s());
}

Bound kp_limit(const ConverterConfig& cfg) {
    cfg.validate();
    if (cfg.topology != Topology::Buck || cfg.scheme != Scheme::Pcmc)
        throw ConfigError("kp_limit is derived for the buck PCMC case");
    const OperatingPoint op = duty_and_va(cfg);
    const double ws = cfg.omega_s();
    const double inv_r = cfg.R_c * cfg.C * ws;
    const double den = alpha0(op.D) * inv_r + alpha1(op.D);
    if (den <= 0.0)
        return {true, 0.0};
    const double num =
        cfg.V_m * cfg.L * ws / cfg.v_s - cfg.R_s * alpha0(op.D);
    return {false, ws * cfg.C / cfg.rho() * num / den};
}

SweepGrid sweep_stability(Scheme scheme, double gain, double d_min,
                          double d_max, double pz_min, double pz_max, int n_d,
                          int n_pz, int n_jobs) {
    if (scheme == Scheme::Pcmc)
        throw ConfigError("sweep_stability covers the ACMC schemes");
    if (n_d < 2 || n_pz < 2)
        throw ConfigError("sweep resolution must be >= 2 per axis");
    if (!(d_min < d_max) || !(pz_min < pz_max))
        throw ConfigError("sweep ranges must be increasing");
    if (!(d_min > 0.0 && d_max < 1.0 && pz_min > 0.0))
        throw ConfigError("sweep ranges must satisfy 0 < D < 1 and p,z > 0");

    SweepGrid grid;
    grid.scheme = scheme;
    grid.gain = gain;
    grid.d_axis.resize(static_cast<size_t>(n_d));
    grid.pz_axis.resize(static_cast<size_t>(n_pz));
    for (int i = 0; i < n_d; ++i)
        grid.d_axis[static_cast<size_t>(i)] =
            d_min + (d_max - d_min) * i / (n_d - 1);
    for (int j = 0; j < n_pz; ++j)
        grid.pz_axis[static_cast<size_t>(j)] =
            pz_min + (pz_max - pz_min) * j / (n_pz - 1);
    grid.cells.resize(static_cast<size_t>(n_d) * static_cast<size_t>(n_pz));

    // den(D, p/z); the bound is 1/den where positive.
    auto den_at = [&](double D, double pz) {
        return scheme == Scheme::AcmcType2
                   ? alpha0(D) - alpha_closed(D, pz)
                   : alpha0(D) / pz + alpha1(D);
    };

    auto work = [&](int i0, int i1) {
        for (int i = i0; i < i1; ++i) {
            const double D = grid.d_axis[static_cast<size_t>(i)];
            for (int j = 0; j < n_pz; ++j) {
                const double pz = grid.pz_axis[static_cast<size_t>(j)];
                SweepCell& cell =
                    grid.cells[static_cast<size_t>(i) * n_pz + j];
                const double den = den_at(D, pz);
                if (den <= 0.0) {
                    cell.bound = {true, 0.0};
                    cell.stable = true;
                } else {
                    cell.bound = {false, 1.0 / den};
                    cell.stable = gain < cell.bound.value;
                }
                // flag cells where the denominator changes sign within half a
                // grid spacing in D (the bound blows up across the change)
                const double hd =
                    0.5 * (grid.d_axis[1] - grid.d_axis[0]);
                const double d_lo = std::max(1e-6, D - hd);
                const double d_hi = std::min(1.0 - 1e-6, D + hd);
                cell.sign_straddle =
                    (den_at(d_lo, pz) > 0.0) != (den_at(d_hi, pz) > 0.0);
            }
        }
    };

    const int jobs = std::max(1, std::min(n_jobs, n_d));
    if (jobs == 1) {
        work(0, n_d);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(jobs));
        const int chunk = (n_d + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            const int i0 = t * chunk;
            const int i1 = std::min(n_d, i0 + chunk);
            if (i0 < i1)
                pool.emplace_back(work, i0, i1);
        }
        for (auto& th : pool)
            th.join();
    }
    return grid;
}

void write_sweep_csv(const SweepGrid& grid, std::ostream& os) {
    const char* pz_name = grid.scheme == Scheme::AcmcType2 ? "p" : "z";
    os << "D," << pz_name << ",stable,kmax\n";
    const size_t n_pz = grid.pz_axis.size();
    for (size_t i = 0; i < grid.d_axis.size(); ++i) {
        for (size_t j = 0; j < n_pz; ++j) {
            const SweepCell& cell = grid.cells[i * n_pz + j];
            os << format_number(grid.d_axis[i]) << ','
               << format_number(grid.pz_axis[j]) << ','
               << (cell.stable ? 1 : 0) << ',';
            if (cell.bound.always_stable)
                os << "ALWAYS_STABLE";
            else
                os << format_number(cell.bound.value);
            os << '\n';
        }
    }
}

void write_overlay_csv(const std::vector<double>& d_axis, Topology topology,
                       std::ostream& os) {
    os << "D,bound\n";
    for (double D : d_axis)
        os << format_number(D) << ','
           << format_number(sb99_reference_bound(D, topology)) << '\n';
}

} // namespace fsikit
