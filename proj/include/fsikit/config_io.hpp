#pragma once

#include "fsikit/loopgain.hpp"

#include <string>

namespace fsikit {

// Flat key-value config format, one "key = value" per line, '#' comments.
// Units are SI: V, A, H, F, ohm, Hz for f_s, rad/s for angular frequencies.
// Every angular-frequency key also accepts a "_hz" alternate (converted by
// 2*pi).  Recognized keys:
//   topology (buck|boost|buckboost), scheme (pcmc|acmc_type2|acmc_pi),
//   v_s, v_o, duty, v_c, f_s, L, C, R, R_c, R_s, V_m, V_l,
//   K_c, omega_z[_hz], omega_p[_hz],
//   voltage_loop (open|proportional|type2|pi), k_p, v_r,
//   vloop_K_c, vloop_omega_z[_hz], vloop_omega_p[_hz]
// Throws ConfigError with a field-level message on any problem.
ConverterConfig parse_config_text(const std::string& text);
ConverterConfig parse_config(const std::string& path);

// Canonical serialization; parse(emit(cfg)) reproduces cfg exactly.
std::string emit_config(const ConverterConfig& cfg);

} // namespace fsikit
