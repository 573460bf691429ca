#include "fsikit/loopgain.hpp"

#include "fsikit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fsikit {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* message) {
    if (!ok)
        throw ConfigError(message);
}
} // namespace

double ConverterConfig::omega_s() const { return 2.0 * kPi * f_s; }
double ConverterConfig::period() const { return 1.0 / f_s; }
double ConverterConfig::rho() const { return R / (R + R_c); }
double ConverterConfig::omega_esr() const {
    return R_c > 0.0 ? 1.0 / (R_c * C) : std::numeric_limits<double>::infinity();
}

void ConverterConfig::validate() const {
    require(v_s > 0.0, "v_s must be > 0");
    require(f_s > 0.0, "f_s must be > 0");
    require(L > 0.0, "L must be > 0");
    require(C > 0.0, "C must be > 0");
    require(R > 0.0, "R must be > 0");
    require(R_c >= 0.0, "R_c must be >= 0");
    require(R_s > 0.0, "R_s must be > 0");
    require(V_m > 0.0, "V_m must be > 0");
    require(V_l >= 0.0 && V_l < V_m, "V_l must satisfy 0 <= V_l < V_m");

    require(v_o.has_value() || duty.has_value(),
            "operating point requires v_o or duty");
    require(!(v_o.has_value() && duty.has_value()),
            "specify the operating point as v_o or duty, not both");

    if (scheme == Scheme::AcmcType2) {
        require(K_c > 0.0, "K_c must be > 0 for ACMC type-II");
        require(omega_z > 0.0, "omega_z must be > 0 for ACMC type-II");
        require(omega_p > 0.0, "omega_p must be > 0 for ACMC type-II");
        require(omega_z < omega_p,
                "omega_z must be < omega_p (type-II is phase-lead)");
    } else if (scheme == Scheme::AcmcPi) {
        require(K_c > 0.0, "K_c must be > 0 for ACMC PI");
        require(omega_z > 0.0, "omega_z must be > 0 for ACMC PI");
    }

    switch (voltage_loop.kind) {
    case VoltageLoopKind::Open:
        break;
    case VoltageLoopKind::Proportional:
        require(voltage_loop.k_p >= 0.0, "voltage-loop k_p must be >= 0");
        break;
    case VoltageLoopKind::Type2:
        require(voltage_loop.K_c > 0.0, "voltage-loop K_c must be > 0");
        require(voltage_loop.omega_z > 0.0, "voltage-loop omega_z must be > 0");
        require(voltage_loop.omega_p > 0.0, "voltage-loop omega_p must be > 0");
        require(voltage_loop.omega_z < voltage_loop.omega_p,
                "voltage-loop omega_z must be < omega_p");
        break;
    case VoltageLoopKind::Pi:
        require(voltage_loop.K_c > 0.0, "voltage-loop K_c must be > 0");
        require(voltage_loop.omega_z > 0.0, "voltage-loop omega_z must be > 0");
        break;
    }

    duty_and_va(*this); // rejects D outside (0,1)
}

OperatingPoint duty_and_va(const ConverterConfig& cfg) {
    require(cfg.duty.has_value() || cfg.v_o.has_value(),
            "operating point requires v_o or duty");
    require(cfg.v_s > 0.0, "v_s must be > 0");
    require(cfg.L > 0.0, "L must be > 0");
    double D;
    double v_out;
    if (cfg.duty.has_value()) {
        D = *cfg.duty;
        require(D > 0.0 && D < 1.0, "duty must lie in (0, 1)");
        switch (cfg.topology) {
        case Topology::Buck:
            v_out = D * cfg.v_s;
            break;
        case Topology::Boost:
            v_out = cfg.v_s / (1.0 - D);
            break;
        case Topology::BuckBoost:
            v_out = cfg.v_s * D / (1.0 - D);
            break;
        default:
            throw ConfigError("unknown topology");
        }
    } else {
        v_out = *cfg.v_o;
        require(v_out > 0.0, "v_o must be > 0");
        switch (cfg.topology) {
        case Topology::Buck:
            D = v_out / cfg.v_s;
            break;
        case Topology::Boost:
            D = 1.0 - cfg.v_s / v_out;
            break;
        case Topology::BuckBoost:
            D = v_out / (v_out + cfg.v_s);
            break;
        default:
            throw ConfigError("unknown topology");
        }
        require(D > 0.0 && D < 1.0,
                "invalid operating point: implied duty outside (0, 1)");
    }

    OperatingPoint op{};
    op.D = D;
    op.v_o = v_out;
    op.v_a = (cfg.topology == Topology::Buck) ? cfg.v_s : cfg.v_s / (1.0 - D);
    op.m1 = (1.0 - D) * op.v_a / cfg.L;
    op.m2 = D * op.v_a / cfg.L;
    return op;
}

LoopGain build_loop_gain(const ConverterConfig& cfg) {
    cfg.validate();
    require(cfg.voltage_loop.kind == VoltageLoopKind::Open,
            "build_loop_gain requires an open voltage loop");
    const OperatingPoint op = duty_and_va(cfg);

    RationalLoopGain part{};
    switch (cfg.scheme) {
    case Scheme::Pcmc:
        part.dc_gain_coeff = op.v_a * cfg.R_s / (cfg.V_m * cfg.L);
        part.origin_order = 1;
        break;
    case Scheme::AcmcType2:
        part.dc_gain_coeff = op.v_a * cfg.R_s * cfg.K_c / (cfg.V_m * cfg.L);
        part.zeros = {cfg.omega_z};
        part.poles = {cfg.omega_p};
        part.origin_order = 2;
        break;
    case Scheme::AcmcPi:
        part.dc_gain_coeff = op.v_a * cfg.R_s * cfg.K_c / (cfg.V_m * cfg.L);
        part.zeros = {cfg.omega_z};
        part.origin_order = 2;
        break;
    }
    return LoopGain{{part}};
}

LoopGain build_pcmc_voltage_loop_gain(const ConverterConfig& cfg) {
    cfg.validate();
    require(cfg.topology == Topology::Buck,
            "voltage-loop gain is derived for the buck topology only");
    require(cfg.scheme == Scheme::Pcmc,
            "voltage-loop gain builder applies to PCMC");
    require(cfg.voltage_loop.kind != VoltageLoopKind::Open,
            "voltage loop must be closed for this builder");

    LoopGain T;
    RationalLoopGain current{};
    current.dc_gain_coeff = cfg.v_s * cfg.R_s / (cfg.V_m * cfg.L);
    current.origin_order = 1;
    T.parts.push_back(current);

    // rho*v_s*(1+s/omega_esr)*G_v/(V_m*L*C*s^2), with the high-frequency form
    // of G_v (the (1+s/omega_z) factor of PI/type-II collapses to s/omega_z).
    const double base = cfg.rho() * cfg.v_s / (cfg.V_m * cfg.L * cfg.C);
    RationalLoopGain volt{};
    volt.origin_order = 2;
    if (cfg.R_c > 0.0)
        volt.zeros.push_back(cfg.omega_esr());
    switch (cfg.voltage_loop.kind) {
    case VoltageLoopKind::Proportional:
        volt.dc_gain_coeff = base * cfg.voltage_loop.k_p;
        break;
    case VoltageLoopKind::Pi:
        volt.dc_gain_coeff =
            base * cfg.voltage_loop.K_c / cfg.voltage_loop.omega_z;
        break;
    case VoltageLoopKind::Type2:
        volt.dc_gain_coeff =
            base * cfg.voltage_loop.K_c / cfg.voltage_loop.omega_z;
        volt.poles.push_back(cfg.voltage_loop.omega_p);
        break;
    case VoltageLoopKind::Open:
        break; // unreachable
    }
    if (volt.dc_gain_coeff != 0.0)
        T.parts.push_back(volt);
    return T;
}

std::complex<double> evaluate_at(const RationalLoopGain& T, double omega) {
    const std::complex<double> s(0.0, omega);
    std::complex<double> num(T.dc_gain_coeff, 0.0);
    for (double z : T.zeros)
        num *= 1.0 + s / z;
    std::complex<double> den(1.0, 0.0);
    for (int k = 0; k < T.origin_order; ++k)
        den *= s;
    for (double p : T.poles)
        den *= 1.0 + s / p;
    return num / den;
}

std::complex<double> evaluate_at(const LoopGain& T, double omega) {
    std::complex<double> sum(0.0, 0.0);
    for (const auto& part : T.parts)
        sum += evaluate_at(part, omega);
    return sum;
}

std::vector<PartialFractionTerm> partial_fractions(const RationalLoopGain& T) {
    const size_t n_zeros = T.zeros.size();
    const size_t n_poles = T.poles.size();
    if (T.origin_order < 0 || T.origin_order > 2)
        throw std::invalid_argument(
            "partial fractions: origin order outside 0..2");
    if (n_zeros >= static_cast<size_t>(T.origin_order) + n_poles)
        throw std::invalid_argument(
            "partial fractions require a strictly proper gain");
    for (double z : T.zeros)
        if (!(z > 0.0))
            throw std::invalid_argument("zeros must be strictly positive");
    for (size_t i = 0; i < n_poles; ++i) {
        if (!(T.poles[i] > 0.0))
            throw std::invalid_argument("poles must be strictly positive");
        for (size_t j = i + 1; j < n_poles; ++j)
            if (std::abs(T.poles[i] - T.poles[j]) <=
                1e-12 * std::max(T.poles[i], T.poles[j]))
                throw std::invalid_argument("poles must be distinct");
    }

    const double g = T.dc_gain_coeff;
    std::vector<PartialFractionTerm> terms;
    if (g == 0.0)
        return terms;

    // N(s) = g * prod(1 + s/z_i);  T(s) = N(s) / (s^m * prod(1 + s/p_j)).
    auto N = [&](double s) {
        double v = g;
        for (double z : T.zeros)
            v *= 1.0 + s / z;
        return v;
    };

    if (T.origin_order == 1) {
        terms.push_back({TermKind::Origin1, g, 0.0});
    } else if (T.origin_order == 2) {
        terms.push_back({TermKind::Origin2, g, 0.0});
        double c1 = 0.0; // g * (sum 1/z_i - sum 1/p_j)
        for (double z : T.zeros)
            c1 += 1.0 / z;
        for (double p : T.poles)
            c1 -= 1.0 / p;
        c1 *= g;
        if (c1 != 0.0)
            terms.push_back({TermKind::Origin1, c1, 0.0});
    }

    // Residue at s = -p_j of N(s)*prod(p_k) / (s^m * prod(s + p_k)).
    for (size_t j = 0; j < n_poles; ++j) {
        const double pj = T.poles[j];
        double c = N(-pj);
        for (size_t k = 0; k < n_poles; ++k) {
            c *= T.poles[k];
            if (k != j)
                c /= T.poles[k] - pj;
        }
        for (int m = 0; m < T.origin_order; ++m)
            c /= -pj;
        terms.push_back({TermKind::RealPole, c, pj});
    }
    return terms;
}

std::vector<PartialFractionTerm> partial_fractions(const LoopGain& T) {
    // Concatenate the per-part decompositions, merging terms over a common
    // basis function (same origin order, or poles equal to relative 1e-12)
    // so the multi-part gain stays inside the F-transform coverage.
    std::vector<PartialFractionTerm> all;
    for (const auto& part : T.parts) {
        for (const auto& t : partial_fractions(part)) {
            auto same = [&](const PartialFractionTerm& u) {
                if (u.kind != t.kind)
                    return false;
                if (t.kind != TermKind::RealPole)
                    return true;
                return std::abs(u.pole_rad_per_s - t.pole_rad_per_s) <=
                       1e-12 * t.pole_rad_per_s;
            };
            auto it = std::find_if(all.begin(), all.end(), same);
            if (it != all.end())
                it->coefficient += t.coefficient;
            else
                all.push_back(t);
        }
    }
    return all;
}

double crossover_frequency(const LoopGain& T, double omega_s) {
    if (!(omega_s > 0.0))
        throw NumericalError("crossover search requires omega_s > 0");
    const double lo = 1e-3 * omega_s;
    const double hi = 1e3 * omega_s;
    const int n_grid = 1200;

    auto mag = [&](double w) { return std::abs(evaluate_at(T, w)); };

    double w_prev = lo;
    double m_prev = mag(lo);
    if (m_prev < 1.0)
        throw NumericalError(
            "no unity-gain crossing: |T| < 1 at the lower search bound");

    double bracket_lo = 0.0, bracket_hi = 0.0;
    int crossings = 0;
    for (int i = 1; i <= n_grid; ++i) {
        const double w =
            lo * std::pow(hi / lo, static_cast<double>(i) / n_grid);
        const double m = mag(w);
        if ((m_prev >= 1.0) != (m >= 1.0)) {
            ++crossings;
            if (crossings == 1) {
                bracket_lo = w_prev;
                bracket_hi = w;
            }
        }
        w_prev = w;
        m_prev = m;
    }
    if (crossings == 0)
        throw NumericalError(
            "no unity-gain crossing in [1e-3, 1e3]*omega_s");
    if (crossings > 1)
        throw NumericalError(
            "|T(jw)| is not monotone through unity gain: multiple crossings");

    double a = bracket_lo, b = bracket_hi;
    for (int it = 0; it < 200 && (b - a) > 1e-10 * b; ++it) {
        const double mid = 0.5 * (a + b);
        if (mag(mid) >= 1.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

double phase_margin(const LoopGain& T, double omega_s) {
    const double wc = crossover_frequency(T, omega_s);
    double deg = std::arg(evaluate_at(T, wc)) * 180.0 / kPi;
    // These loop gains carry at least one origin pole, so the true phase is
    // strictly negative; undo principal-value wrapping.
    if (deg > 0.0)
        deg -= 360.0;
    return 180.0 + deg;
}

double crossover_type2_closed_form(double K, double p, double omega_s) {
    const double inner = std::sqrt(p * p * p * p + 4.0 * K * K * p * p);
    return omega_s / std::sqrt(2.0) * std::sqrt(inner - p * p);
}

double crossover_pi_closed_form(double Ktilde, double z, double omega_s) {
    const double k2 = Ktilde * Ktilde;
    const double inner = std::sqrt(k2 * k2 + 4.0 * k2 * z * z * z * z);
    return std::sqrt(2.0) * omega_s * Ktilde * z / std::sqrt(inner - k2);
}

NormalizedGains normalized_gains(const ConverterConfig& cfg) {
    cfg.validate();
    const OperatingPoint op = duty_and_va(cfg);
    const double ws = cfg.omega_s();
    NormalizedGains g{};
    g.D = op.D;
    g.v_a = op.v_a;
    g.rho = cfg.rho();
    g.z = cfg.omega_z > 0.0 ? cfg.omega_z / ws : 0.0;
    g.p = cfg.omega_p > 0.0 ? cfg.omega_p / ws : 0.0;
    g.r = cfg.R_c > 0.0 ? cfg.omega_esr() / ws : 0.0;
    g.Ktilde = cfg.K_c > 0.0
                   ? op.v_a * cfg.R_s * cfg.K_c / (cfg.V_m * cfg.L * ws * ws)
                   : 0.0;
    g.K = (cfg.K_c > 0.0 && cfg.omega_z > 0.0)
              ? op.v_a * cfg.R_s * cfg.K_c / (cfg.V_m * cfg.omega_z * cfg.L * ws)
              : 0.0;
    return g;
}

} // namespace fsikit
