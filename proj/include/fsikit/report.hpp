#pragma once

#include "fsikit/sda.hpp"
#include "fsikit/stability.hpp"
#include "fsikit/switchsim.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace fsikit {

// Side-by-side verdicts of the four methods: closed-form harmonic balance
// (HBA), sampled-data eigenvalues (SDA), time-domain simulation (SIM), and
// the averaged-model frequency response (SSAA).  The averaged model is
// reported as context only: it famously does not predict subharmonic
// oscillation.
struct StabilityReport {
    // HBA closed form
    bool hba_ok = false;
    std::string hba_error;
    StabilityVerdict hba;                 // authoritative closed-form verdict
    std::optional<double> index_simplified; // type-II only: K*(alpha0-alpha)
    std::optional<Bound> gain_limit;      // K_max or Ktilde_max at (D, p/z)
    std::optional<double> gain;           // K or Ktilde
    std::optional<ConservativeChecks> conservative;

    // SDA
    bool sda_ok = false;
    std::string sda_error;
    SdaVerdict sda;

    // Simulation
    bool sim_ok = false;
    std::string sim_error;
    TraceClass sim_class = TraceClass::Unclassified;
    double sim_mean_duty = 0.0;

    // SSAA
    bool ssaa_ok = false;
    std::string ssaa_error;
    double omega_c = 0.0;
    double pm_deg = 0.0;

    bool methods_agree = false; // HBA, SDA and SIM reach the same verdict
};

StabilityReport run_report(const ConverterConfig& cfg, int sim_periods = 300);

void print_report(const StabilityReport& rep, std::ostream& os);

// Flat CSV rows (section,key,value) for machine consumption.
void write_report_csv(const StabilityReport& rep, std::ostream& os);

} // namespace fsikit
