#include "fsikit/report.hpp"

#include "fsikit/csv.hpp"
#include "fsikit/errors.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace fsikit {

namespace {

const char* class_name(TraceClass c) {
    switch (c) {
    case TraceClass::Period1:
        return "PERIOD1";
    case TraceClass::Subharmonic:
        return "SUBHARMONIC";
    case TraceClass::Dcm:
        return "DCM";
    case TraceClass::Unclassified:
        return "UNCLASSIFIED";
    }
    return "UNCLASSIFIED";
}

} // namespace

StabilityReport run_report(const ConverterConfig& cfg, int sim_periods) {
    cfg.validate();
    StabilityReport rep;
    const NormalizedGains g = normalized_gains(cfg);

    // HBA leg.
    try {
        if (cfg.scheme == Scheme::Pcmc) {
            if (cfg.voltage_loop.kind == VoltageLoopKind::Open) {
                rep.hba = pcmc_min_ramp(cfg);
            } else {
                const double index = pcmc_voltage_loop_index(cfg);
                rep.hba.index = index;
                rep.hba.margin = 1.0 - index;
                rep.hba.stable = index < 1.0;
                rep.hba.required_ramp_slope = index * cfg.V_m * cfg.f_s;
            }
        } else if (cfg.scheme == Scheme::AcmcType2) {
            rep.hba = acmc_type2_verdict(cfg, /*use_general=*/true);
            rep.index_simplified =
                acmc_type2_verdict(cfg, /*use_general=*/false).index;
            rep.gain = g.K;
            rep.gain_limit = kmax(g.D, g.p);
            rep.conservative = conservative_checks(cfg);
        } else {
            rep.hba = acmc_pi_verdict(cfg);
            rep.gain = g.Ktilde;
            rep.gain_limit = ktilde_max(g.D, g.z);
            rep.conservative = conservative_checks(cfg);
        }
        rep.hba_ok = true;
    } catch (const std::exception& e) {
        rep.hba_error = e.what();
    }

    // SDA leg.
    try {
        rep.sda = sda_verdict(cfg);
        rep.sda_ok = true;
    } catch (const std::exception& e) {
        rep.sda_error = e.what();
    }

    // Simulation leg.
    try {
        SimOptions opts;
        opts.record_samples = false;
        const SimTrace trace = simulate(cfg, sim_periods, opts);
        rep.sim_class = trace.classification;
        if (!trace.duty_sequence.empty())
            rep.sim_mean_duty =
                std::accumulate(trace.duty_sequence.begin(),
                                trace.duty_sequence.end(), 0.0) /
                static_cast<double>(trace.duty_sequence.size());
        rep.sim_ok = true;
    } catch (const std::exception& e) {
        rep.sim_error = e.what();
    }

    // SSAA leg (averaged model: crossover + phase margin).
    try {
        const LoopGain T = cfg.voltage_loop.kind == VoltageLoopKind::Open
                               ? build_loop_gain(cfg)
                               : build_pcmc_voltage_loop_gain(cfg);
        rep.omega_c = crossover_frequency(T, cfg.omega_s());
        rep.pm_deg = phase_margin(T, cfg.omega_s());
        rep.ssaa_ok = true;
    } catch (const std::exception& e) {
        rep.ssaa_error = e.what();
    }

    if (rep.hba_ok && rep.sda_ok && rep.sim_ok &&
        (rep.sim_class == TraceClass::Period1 ||
         rep.sim_class == TraceClass::Subharmonic)) {
        const bool sim_stable = rep.sim_class == TraceClass::Period1;
        rep.methods_agree = (rep.hba.stable == rep.sda.stable) &&
                            (rep.sda.stable == sim_stable);
    }
    return rep;
}

void print_report(const StabilityReport& rep, std::ostream& os) {
    os << "== HBA (closed-form harmonic balance) ==\n";
    if (rep.hba_ok) {
        os << "  index          " << format_number(rep.hba.index)
           << (rep.hba.stable ? "  (< 1: stable)" : "  (>= 1: unstable)")
           << "\n";
        if (rep.index_simplified)
            os << "  index (omega_z<<omega_s form) "
               << format_number(*rep.index_simplified) << "\n";
        os << "  required ramp S " << format_number(rep.hba.required_ramp_slope)
           << " V/s\n"
           << "  margin (1-index) " << format_number(rep.hba.margin) << "\n";
        if (rep.gain && rep.gain_limit) {
            os << "  gain            " << format_number(*rep.gain) << "\n";
            os << "  gain limit      ";
            if (rep.gain_limit->always_stable)
                os << "ALWAYS_STABLE";
            else
                os << format_number(rep.gain_limit->value);
            os << "\n";
        }
        if (rep.conservative)
            os << "  conservative: K<1/pi=" << rep.conservative->k_lt_1_over_pi
               << " Kt<z/(pi(1+pi z))=" << rep.conservative->ktilde_lt_bound
               << " wc<ws/pi=" << rep.conservative->wc_lt_ws_over_pi << "\n";
    } else {
        os << "  error: " << rep.hba_error << "\n";
    }

    os << "== SDA (stroboscopic-map eigenvalues) ==\n";
    if (rep.sda_ok) {
        os << "  duty at fixed point "
           << format_number(rep.sda.details.duty_at_fixed_point) << "\n";
        os << "  eigenvalues        ";
        for (const auto& ev : rep.sda.details.eigenvalues)
            os << " (" << format_number(ev.real()) << ","
               << format_number(ev.imag()) << ")";
        os << "\n  verdict            "
           << (rep.sda.stable ? "stable" : "unstable")
           << (rep.sda.marginal ? " (marginal)" : "") << "\n";
        if (rep.sda.details.jacobian_warning)
            os << "  warning: Jacobian step-halving disagreement\n";
    } else {
        os << "  error: " << rep.sda_error << "\n";
    }

    os << "== SIM (switched time-domain) ==\n";
    if (rep.sim_ok) {
        os << "  classification " << class_name(rep.sim_class) << "\n"
           << "  mean duty      " << format_number(rep.sim_mean_duty) << "\n";
    } else {
        os << "  error: " << rep.sim_error << "\n";
    }

    os << "== SSAA (averaged model; does not predict subharmonics) ==\n";
    if (rep.ssaa_ok) {
        os << "  crossover omega_c " << format_number(rep.omega_c)
           << " rad/s\n"
           << "  phase margin      " << format_number(rep.pm_deg) << " deg\n";
    } else {
        os << "  error: " << rep.ssaa_error << "\n";
    }

    os << "== agreement ==\n  HBA/SDA/SIM "
       << (rep.methods_agree ? "agree" : "disagree or incomplete") << "\n";
}

void write_report_csv(const StabilityReport& rep, std::ostream& os) {
    os << "section,key,value\n";
    auto row = [&](const char* sec, const char* key, const std::string& v) {
        os << sec << ',' << key << ',' << v << '\n';
    };
    if (rep.hba_ok) {
        row("hba", "index", format_number(rep.hba.index));
        row("hba", "stable", rep.hba.stable ? "1" : "0");
        row("hba", "required_ramp_slope",
            format_number(rep.hba.required_ramp_slope));
        row("hba", "margin", format_number(rep.hba.margin));
        if (rep.index_simplified)
            row("hba", "index_simplified",
                format_number(*rep.index_simplified));
        if (rep.gain)
            row("hba", "gain", format_number(*rep.gain));
        if (rep.gain_limit)
            row("hba", "gain_limit",
                rep.gain_limit->always_stable
                    ? "ALWAYS_STABLE"
                    : format_number(rep.gain_limit->value));
    } else {
        row("hba", "error", rep.hba_error);
    }
    if (rep.sda_ok) {
        row("sda", "stable", rep.sda.stable ? "1" : "0");
        row("sda", "marginal", rep.sda.marginal ? "1" : "0");
        row("sda", "duty", format_number(rep.sda.details.duty_at_fixed_point));
        for (const auto& ev : rep.sda.details.eigenvalues)
            row("sda", "eigenvalue",
                format_number(ev.real()) + "+" + format_number(ev.imag()) +
                    "j");
    } else {
        row("sda", "error", rep.sda_error);
    }
    if (rep.sim_ok) {
        row("sim", "classification", class_name(rep.sim_class));
        row("sim", "mean_duty", format_number(rep.sim_mean_duty));
    } else {
        row("sim", "error", rep.sim_error);
    }
    if (rep.ssaa_ok) {
        row("ssaa", "omega_c", format_number(rep.omega_c));
        row("ssaa", "pm_deg", format_number(rep.pm_deg));
    } else {
        row("ssaa", "error", rep.ssaa_error);
    }
    row("agreement", "hba_sda_sim", rep.methods_agree ? "1" : "0");
}

} // namespace fsikit
