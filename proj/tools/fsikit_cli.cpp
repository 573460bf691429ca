// fsikit: subharmonic-oscillation (fast-scale instability) analysis for
// buck/boost/buck-boost converters under peak/average current-mode control.
//
// Commands: alpha, analyze, sweep, simulate, sda, report.
// Exit codes: 0 = ran, 2 = configuration error, 3 = numerical failure.

#include "fsikit/config_io.hpp"
#include "fsikit/core_math.hpp"
#include "fsikit/csv.hpp"
#include "fsikit/errors.hpp"
#include "fsikit/report.hpp"
#include "fsikit/sda.hpp"
#include "fsikit/stability.hpp"
#include "fsikit/switchsim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <numbers>
#include <thread>

namespace {

using namespace fsikit;

struct RangeSpec {
    double lo = 0.0, hi = 0.0;
    int n = 0;
};

RangeSpec parse_range(const std::string& s) {
    RangeSpec r;
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("range must be formatted as lo:hi:n, got '" + s +
                          "'");
    try {
        r.lo = std::stod(s.substr(0, c1));
        r.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
        r.n = std::stoi(s.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("range must be formatted as lo:hi:n, got '" + s +
                          "'");
    }
    if (r.n < 2)
        throw ConfigError("range must contain at least 2 points");
    return r;
}

int cmd_alpha(double D, double p, int n_terms) {
    const AlphaTerms t = alpha_terms(D, p);
    std::cout << "alpha0      " << format_number(t.alpha0) << "\n"
              << "alpha1      " << format_number(t.alpha1) << "\n"
              << "closed      " << format_number(t.closed) << "\n"
              << "correction  " << format_number(t.correction) << "\n";
    if (n_terms > 0)
        std::cout << "series(" << n_terms << ")  "
                  << format_number(alpha_series(D, p, n_terms)) << "\n";
    return 0;
}

void echo_config(const ConverterConfig& cfg) {
    const NormalizedGains g = normalized_gains(cfg);
    std::cout << "D     " << format_number(g.D) << "\n"
              << "v_a   " << format_number(g.v_a) << "\n"
              << "rho   " << format_number(g.rho) << "\n";
    if (g.z > 0.0)
        std::cout << "z     " << format_number(g.z) << "\n";
    if (g.p > 0.0)
        std::cout << "p     " << format_number(g.p) << "\n";
    if (g.r > 0.0)
        std::cout << "r     " << format_number(g.r) << "\n";
    if (g.K > 0.0)
        std::cout << "K     " << format_number(g.K) << "\n";
    if (g.Ktilde > 0.0)
        std::cout << "Kt    " << format_number(g.Ktilde) << "\n";
}

int cmd_analyze(const std::string& path, bool general) {
    const ConverterConfig cfg = parse_config(path);
    echo_config(cfg);
    StabilityVerdict v;
    if (cfg.scheme == Scheme::Pcmc) {
        if (cfg.voltage_loop.kind == VoltageLoopKind::Open) {
            v = pcmc_min_ramp(cfg);
        } else {
            const double index = pcmc_voltage_loop_index(cfg);
            v.index = index;
            v.stable = index < 1.0;
            v.margin = 1.0 - index;
            v.required_ramp_slope = index * cfg.V_m * cfg.f_s;
            std::cout << "m_v    " << format_number(voltage_loop_mv(cfg))
                      << " V/s\n";
            const Bound kp = kp_limit(cfg);
            std::cout << "k_p max "
                      << (kp.always_stable ? std::string("ALWAYS_STABLE")
                                           : format_number(kp.value))
                      << "\n";
        }
    } else if (cfg.scheme == Scheme::AcmcType2) {
        v = acmc_type2_verdict(cfg, general);
    } else {
        v = acmc_pi_verdict(cfg);
    }
    std::cout << "index  " << format_number(v.index) << "\n"
              << "S      " << format_number(v.required_ramp_slope) << " V/s\n"
              << "m_a    " << format_number(cfg.V_m * cfg.f_s) << " V/s\n"
              << "margin " << format_number(v.margin) << "\n"
              << "verdict " << (v.stable ? "stable" : "unstable") << "\n";
    return 0;
}

int cmd_sweep(const std::string& scheme_name, double gain,
              const std::string& d_range, const std::string& pz_range,
              const std::string& out_dir, const std::string& topo_name,
              double curve_pz, int jobs) {
    const Scheme scheme = scheme_name == "type2" ? Scheme::AcmcType2
                        : scheme_name == "pi"    ? Scheme::AcmcPi
                                                 : throw ConfigError(
                                                       "--scheme must be "
                                                       "type2 or pi");
    Topology topology = Topology::Boost;
    if (topo_name == "buck")
        topology = Topology::Buck;
    else if (topo_name == "buckboost")
        topology = Topology::BuckBoost;
    else if (topo_name != "boost")
        throw ConfigError("--topology must be buck|boost|buckboost");

    const RangeSpec dr = parse_range(d_range);
    const RangeSpec pzr = parse_range(pz_range);
    std::filesystem::create_directories(out_dir);

    const SweepGrid grid = sweep_stability(scheme, gain, dr.lo, dr.hi, pzr.lo,
                                           pzr.hi, dr.n, pzr.n, jobs);

    atomic_write(out_dir + "/region.csv",
                 [&](std::ostream& os) { write_sweep_csv(grid, os); });
    atomic_write(out_dir + "/overlay.csv", [&](std::ostream& os) {
        write_overlay_csv(grid.d_axis, topology, os);
    });

    // Gain-limit curve along D at a fixed p (or z).
    const double pz = curve_pz > 0.0 ? curve_pz : 0.5 * (pzr.lo + pzr.hi);
    atomic_write(out_dir + "/curve.csv", [&](std::ostream& os) {
        os << "D,kmax\n";
        for (double D : grid.d_axis) {
            const Bound b = scheme == Scheme::AcmcType2 ? kmax(D, pz)
                                                        : ktilde_max(D, pz);
            os << format_number(D) << ','
               << (b.always_stable ? std::string("ALWAYS_STABLE")
                                   : format_number(b.value))
               << '\n';
        }
    });

    if (topology == Topology::Buck && scheme == Scheme::AcmcType2) {
        // D*K_max curves: the buck converter's limit expressed against the
        // source-referred gain.
        atomic_write(out_dir + "/dkmax.csv", [&](std::ostream& os) {
            os << "D,dkmax\n";
            for (double D : grid.d_axis) {
                const Bound b = kmax(D, pz);
                os << format_number(D) << ','
                   << (b.always_stable ? std::string("ALWAYS_STABLE")
                                       : format_number(D * b.value))
                   << '\n';
            }
        });
    }

    if (scheme == Scheme::AcmcType2) {
        // Phase margin of the simplified average model at the swept K: a
        // function of (K, p) only, independent of D.
        atomic_write(out_dir + "/pm.csv", [&](std::ostream& os) {
            os << "p,pm_deg\n";
            const double ws = 2.0 * std::numbers::pi; // normalized
            for (double p : grid.pz_axis) {
                const double wc = crossover_type2_closed_form(gain, p, ws);
                const double pm =
                    90.0 - std::atan(wc / (p * ws)) * 180.0 / std::numbers::pi;
                os << format_number(p) << ',' << format_number(pm) << '\n';
            }
        });
    }
    std::cout << "sweep written to " << out_dir << "\n";
    return 0;
}

int cmd_simulate(const std::string& path, int periods,
                 const std::string& out) {
    const ConverterConfig cfg = parse_config(path);
    const SimTrace trace = simulate(cfg, periods);
    if (!out.empty())
        atomic_write(out,
                     [&](std::ostream& os) { write_trace_csv(trace, os); });
    const char* names[] = {"PERIOD1", "SUBHARMONIC", "DCM", "UNCLASSIFIED"};
    std::cout << "classification " << names[static_cast<int>(trace.classification)]
              << "\n";
    const size_t nd = trace.duty_sequence.size();
    std::cout << "duty tail      ";
    for (size_t i = nd >= 4 ? nd - 4 : 0; i < nd; ++i)
        std::cout << format_number(trace.duty_sequence[i]) << ' ';
    std::cout << "\n";
    if (trace.dcm_stop)
        std::cout << "note: run stopped early (inductor current hit zero)\n";
    return 0;
}

int cmd_sda(const std::string& path) {
    const ConverterConfig cfg = parse_config(path);
    const SdaVerdict v = sda_verdict(cfg);
    std::cout << "duty " << format_number(v.details.duty_at_fixed_point)
              << "\n";
    std::cout << "fixed point";
    for (int i = 0; i < v.details.fixed_point.size(); ++i)
        std::cout << ' ' << format_number(v.details.fixed_point(i));
    std::cout << "\n";
    for (const auto& ev : v.details.eigenvalues)
        std::cout << "eigenvalue " << format_number(ev.real()) << ' '
                  << format_number(ev.imag()) << "\n";
    std::cout << "verdict " << (v.stable ? "stable" : "unstable")
              << (v.marginal ? " (marginal)" : "") << "\n";
    if (v.details.jacobian_warning)
        std::cout << "warning: Jacobian step-halving disagreement\n";
    return 0;
}

int cmd_report(const std::string& path, int periods, const std::string& out) {
    const ConverterConfig cfg = parse_config(path);
    const StabilityReport rep = run_report(cfg, periods);
    print_report(rep, std::cout);
    if (!out.empty())
        atomic_write(out,
                     [&](std::ostream& os) { write_report_csv(rep, os); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subharmonic-oscillation analysis for current-mode-controlled "
                 "DC-DC converters"};
    app.require_subcommand(1);

    // alpha
    double d_val = 0.5, p_val = 0.0;
    int n_terms = 0;
    auto* alpha_cmd = app.add_subcommand("alpha", "Evaluate the alpha function");
    alpha_cmd->add_option("--d", d_val, "duty cycle")->required();
    alpha_cmd->add_option("--p", p_val, "normalized pole")->required();
    alpha_cmd->add_option("--terms", n_terms, "also print the series sum");

    // analyze
    std::string analyze_cfg;
    bool general = false;
    auto* analyze_cmd =
        app.add_subcommand("analyze", "Closed-form stability verdict");
    analyze_cmd->add_option("config", analyze_cfg, "config file")->required();
    analyze_cmd->add_flag("--general", general,
                          "use the full type-II gain (no omega_z<<omega_s "
                          "simplification)");

    // sweep
    std::string sweep_scheme = "type2", d_range, pz_range, out_dir = "sweep";
    std::string sweep_topology = "boost";
    double sweep_gain = 0.0, curve_pz = 0.0;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    auto* sweep_cmd = app.add_subcommand("sweep", "Stability-region grid CSVs");
    sweep_cmd->add_option("--scheme", sweep_scheme, "type2|pi")->required();
    sweep_cmd->add_option("--k", sweep_gain, "K or Ktilde")->required();
    sweep_cmd->add_option("--d-range", d_range, "lo:hi:n")->required();
    sweep_cmd->add_option("--p-range,--z-range", pz_range, "lo:hi:n")
        ->required();
    sweep_cmd->add_option("--out", out_dir, "output directory");
    sweep_cmd->add_option("--topology", sweep_topology,
                          "buck|boost|buckboost (overlay curve)");
    sweep_cmd->add_option("--curve", curve_pz,
                          "p (or z) for the gain-limit curve CSV");
    sweep_cmd->add_option("--jobs", jobs, "worker threads");

    // simulate
    std::string sim_cfg, sim_out;
    int periods = 300;
    auto* sim_cmd = app.add_subcommand("simulate", "Switched time-domain run");
    sim_cmd->add_option("config", sim_cfg, "config file")->required();
    sim_cmd->add_option("--periods", periods, "number of switching periods");
    sim_cmd->add_option("--out", sim_out, "trace CSV path");

    // sda
    std::string sda_cfg;
    auto* sda_cmd =
        app.add_subcommand("sda", "Stroboscopic-map eigenvalue analysis");
    sda_cmd->add_option("config", sda_cfg, "config file")->required();

    // report
    std::string rep_cfg, rep_out;
    int rep_periods = 300;
    auto* rep_cmd =
        app.add_subcommand("report", "All four methods side by side");
    rep_cmd->add_option("config", rep_cfg, "config file")->required();
    rep_cmd->add_option("--periods", rep_periods, "simulation periods");
    rep_cmd->add_option("--out", rep_out, "report CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*alpha_cmd)
            return cmd_alpha(d_val, p_val, n_terms);
        if (*analyze_cmd)
            return cmd_analyze(analyze_cfg, general);
        if (*sweep_cmd)
            return cmd_sweep(sweep_scheme, sweep_gain, d_range, pz_range,
                             out_dir, sweep_topology, curve_pz, jobs);
        if (*sim_cmd)
            return cmd_simulate(sim_cfg, periods, sim_out);
        if (*sda_cmd)
            return cmd_sda(sda_cfg);
        if (*rep_cmd)
            return cmd_report(rep_cfg, rep_periods, rep_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
