#include "fsikit/config_io.hpp"

#include "fsikit/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace fsikit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    size_t used = 0;
    double v;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': not a number: '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("field '" + key + "': trailing characters in '" +
                          value + "'");
    if (!std::isfinite(v))
        throw ConfigError("field '" + key + "': value must be finite");
    return v;
}

// Full-precision float round-trip for emit/parse identity.
std::string emit_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

ConverterConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        if (kv.count(key))
            throw ConfigError("duplicate field '" + key + "'");
        kv[key] = value;
    }

    ConverterConfig cfg;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end())
            return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto need_number = [&](const char* key) {
        const std::string v = take(key);
        if (v.empty())
            throw ConfigError(std::string("missing required field '") + key +
                              "'");
        return parse_double(key, v);
    };
    auto opt_number = [&](const char* key, double fallback) {
        const std::string v = take(key);
        return v.empty() ? fallback : parse_double(key, v);
    };
    // rad/s value with an optional "<key>_hz" alternate.
    auto angular = [&](const std::string& key, bool required) {
        const std::string raw = take(key.c_str());
        const std::string raw_hz = take((key + "_hz").c_str());
        if (!raw.empty() && !raw_hz.empty())
            throw ConfigError("field '" + key + "': give rad/s or _hz, not both");
        if (!raw.empty())
            return parse_double(key, raw);
        if (!raw_hz.empty())
            return kTwoPi * parse_double(key + "_hz", raw_hz);
        if (required)
            throw ConfigError("missing required field '" + key + "' (or '" +
                              key + "_hz')");
        return 0.0;
    };

    const std::string topo = take("topology");
    if (topo == "buck")
        cfg.topology = Topology::Buck;
    else if (topo == "boost")
        cfg.topology = Topology::Boost;
    else if (topo == "buckboost")
        cfg.topology = Topology::BuckBoost;
    else
        throw ConfigError("field 'topology': expected buck|boost|buckboost, "
                          "got '" +
                          topo + "'");

    const std::string scheme = take("scheme");
    if (scheme == "pcmc")
        cfg.scheme = Scheme::Pcmc;
    else if (scheme == "acmc_type2")
        cfg.scheme = Scheme::AcmcType2;
    else if (scheme == "acmc_pi")
        cfg.scheme = Scheme::AcmcPi;
    else
        throw ConfigError(
            "field 'scheme': expected pcmc|acmc_type2|acmc_pi, got '" +
            scheme + "'");

    cfg.v_s = need_number("v_s");
    {
        const std::string vo = take("v_o");
        if (!vo.empty())
            cfg.v_o = parse_double("v_o", vo);
        const std::string d = take("duty");
        if (!d.empty())
            cfg.duty = parse_double("duty", d);
        const std::string vc = take("v_c");
        if (!vc.empty())
            cfg.v_c = parse_double("v_c", vc);
    }
    cfg.f_s = need_number("f_s");
    cfg.L = need_number("L");
    cfg.C = need_number("C");
    cfg.R = need_number("R");
    cfg.R_c = opt_number("R_c", 0.0);
    cfg.R_s = need_number("R_s");
    cfg.V_m = need_number("V_m");
    cfg.V_l = opt_number("V_l", 0.0);

    if (cfg.scheme != Scheme::Pcmc) {
        cfg.K_c = need_number("K_c");
        cfg.omega_z = angular("omega_z", true);
        cfg.omega_p =
            angular("omega_p", cfg.scheme == Scheme::AcmcType2);
    } else {
        cfg.K_c = opt_number("K_c", 0.0);
        cfg.omega_z = angular("omega_z", false);
        cfg.omega_p = angular("omega_p", false);
    }

    const std::string vloop = take("voltage_loop");
    if (vloop.empty() || vloop == "open") {
        cfg.voltage_loop.kind = VoltageLoopKind::Open;
    } else {
        if (vloop == "proportional")
            cfg.voltage_loop.kind = VoltageLoopKind::Proportional;
        else if (vloop == "type2")
            cfg.voltage_loop.kind = VoltageLoopKind::Type2;
        else if (vloop == "pi")
            cfg.voltage_loop.kind = VoltageLoopKind::Pi;
        else
            throw ConfigError("field 'voltage_loop': expected "
                              "open|proportional|type2|pi, got '" +
                              vloop + "'");
        cfg.voltage_loop.v_r = opt_number("v_r", 0.0);
        if (cfg.voltage_loop.kind == VoltageLoopKind::Proportional) {
            cfg.voltage_loop.k_p = need_number("k_p");
        } else {
            cfg.voltage_loop.K_c = need_number("vloop_K_c");
            cfg.voltage_loop.omega_z = angular("vloop_omega_z", true);
            cfg.voltage_loop.omega_p = angular(
                "vloop_omega_p", cfg.voltage_loop.kind == VoltageLoopKind::Type2);
        }
    }

    if (!kv.empty())
        throw ConfigError("unknown field '" + kv.begin()->first + "'");

    cfg.validate();
    return cfg;
}

ConverterConfig parse_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const ConverterConfig& cfg) {
    std::ostringstream os;
    os << "topology = "
       << (cfg.topology == Topology::Buck
               ? "buck"
               : cfg.topology == Topology::Boost ? "boost" : "buckboost")
       << "\n";
    os << "scheme = "
       << (cfg.scheme == Scheme::Pcmc
               ? "pcmc"
               : cfg.scheme == Scheme::AcmcType2 ? "acmc_type2" : "acmc_pi")
       << "\n";
    os << "v_s = " << emit_double(cfg.v_s) << "\n";
    if (cfg.v_o)
        os << "v_o = " << emit_double(*cfg.v_o) << "\n";
    if (cfg.duty)
        os << "duty = " << emit_double(*cfg.duty) << "\n";
    if (cfg.v_c)
        os << "v_c = " << emit_double(*cfg.v_c) << "\n";
    os << "f_s = " << emit_double(cfg.f_s) << "\n";
    os << "L = " << emit_double(cfg.L) << "\n";
    os << "C = " << emit_double(cfg.C) << "\n";
    os << "R = " << emit_double(cfg.R) << "\n";
    os << "R_c = " << emit_double(cfg.R_c) << "\n";
    os << "R_s = " << emit_double(cfg.R_s) << "\n";
    os << "V_m = " << emit_double(cfg.V_m) << "\n";
    os << "V_l = " << emit_double(cfg.V_l) << "\n";
    if (cfg.scheme != Scheme::Pcmc) {
        os << "K_c = " << emit_double(cfg.K_c) << "\n";
        os << "omega_z = " << emit_double(cfg.omega_z) << "\n";
        if (cfg.scheme == Scheme::AcmcType2)
            os << "omega_p = " << emit_double(cfg.omega_p) << "\n";
    }
    switch (cfg.voltage_loop.kind) {
    case VoltageLoopKind::Open:
        os << "voltage_loop = open\n";
        break;
    case VoltageLoopKind::Proportional:
        os << "voltage_loop = proportional\n";
        os << "k_p = " << emit_double(cfg.voltage_loop.k_p) << "\n";
        os << "v_r = " << emit_double(cfg.voltage_loop.v_r) << "\n";
        break;
    case VoltageLoopKind::Pi:
    case VoltageLoopKind::Type2:
        os << "voltage_loop = "
           << (cfg.voltage_loop.kind == VoltageLoopKind::Pi ? "pi" : "type2")
           << "\n";
        os << "vloop_K_c = " << emit_double(cfg.voltage_loop.K_c) << "\n";
        os << "vloop_omega_z = " << emit_double(cfg.voltage_loop.omega_z)
           << "\n";
        if (cfg.voltage_loop.kind == VoltageLoopKind::Type2)
            os << "vloop_omega_p = " << emit_double(cfg.voltage_loop.omega_p)
               << "\n";
        os << "v_r = " << emit_double(cfg.voltage_loop.v_r) << "\n";
        break;
    }
    return os.str();
}

} // namespace fsikit
