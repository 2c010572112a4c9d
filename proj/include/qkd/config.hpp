#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkd/experiment.hpp"

namespace qkd {

/// Raised for malformed config text, unknown keys, and out-of-range values.
/// The message always names the offending key.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline double parse_double_strict(const std::string& text, const std::string& key) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError(key + ": expected a number (got \"" + text + "\")");
    }
    return v;
}

inline std::int64_t parse_int_strict(const std::string& text, const std::string& key) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ConfigError(key + ": expected an integer (got \"" + text + "\")");
    }
    return v;
}

inline std::uint64_t parse_uint_strict(const std::string& text, const std::string& key) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || text.front() == '-') {
        throw ConfigError(key + ": expected a nonnegative integer (got \"" + text + "\")");
    }
    return v;
}

inline bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "on" || text == "1") return true;
    if (text == "false" || text == "off" || text == "0") return false;
    throw ConfigError(key + ": expected true/false or on/off (got \"" + text + "\")");
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Parses an angle in radians. Plain numbers are accepted as-is; multiples of
/// pi may be written as "pi", "pi/4", "3pi/8", "-pi/2", or "0.5pi".
inline double parse_angle(std::string_view text) {
    const std::string s = detail::trim(text);
    const std::size_t pos = s.find("pi");
    if (pos == std::string::npos) {
        return detail::parse_double_strict(s, "angle");
    }
    const std::string coef_str = detail::trim(s.substr(0, pos));
    std::string rest = detail::trim(s.substr(pos + 2));

    double coefficient = 1.0;
    if (coef_str == "-") {
        coefficient = -1.0;
    } else if (coef_str == "+" || coef_str.empty()) {
        coefficient = 1.0;
    } else {
        coefficient = detail::parse_double_strict(coef_str, "angle");
    }
    double divisor = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') {
            throw ConfigError("angle: malformed pi expression \"" + s + "\"");
        }
        divisor = detail::parse_double_strict(detail::trim(rest.substr(1)), "angle");
        if (divisor == 0.0) {
            throw ConfigError("angle: division by zero in \"" + s + "\"");
        }
    }
    return coefficient * std::numbers::pi / divisor;
}

namespace detail {

inline double parse_angle_value(const std::string& text, const std::string& key) {
    try {
        return parse_angle(text);
    } catch (const ConfigError&) {
        throw ConfigError(key + ": expected an angle in radians or a pi expression (got \"" +
                          text + "\")");
    }
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "protocol.name") {
        if (value == "kmb09") cfg.protocol = Protocol::Kmb09;
        else if (value == "bb84") cfg.protocol = Protocol::Bb84;
        else throw ConfigError(key + ": expected kmb09 or bb84 (got \"" + value + "\")");
    } else if (key == "protocol.dimension") {
        cfg.dimension = static_cast<int>(parse_int_strict(value, key));
    } else if (key == "run.iterations") {
        cfg.iterations = parse_int_strict(value, key);
    } else if (key == "run.seed") {
        cfg.seed = parse_uint_strict(value, key);
    } else if (key == "run.workers") {
        cfg.workers = static_cast<int>(parse_int_strict(value, key));
    } else if (key == "channel.rotation.enabled") {
        cfg.rotation.enabled = parse_bool(value, key);
    } else if (key == "channel.rotation.theta") {
        cfg.rotation.theta = parse_angle_value(value, key);
    } else if (key == "channel.rotation.rho") {
        cfg.rotation.rho = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.enabled") {
        cfg.turbulence.enabled = parse_bool(value, key);
    } else if (key == "channel.turbulence.inner_scale") {
        cfg.turbulence.inner_scale = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.outer_scale") {
        cfg.turbulence.outer_scale = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.alpha") {
        cfg.turbulence.alpha = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.coherence_radius") {
        cfg.turbulence.coherence_radius = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.wavelength") {
        cfg.turbulence.wavelength = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.distance") {
        cfg.turbulence.distance = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.gain") {
        cfg.turbulence.gain = parse_double_strict(value, key);
    } else if (key == "channel.turbulence.kappa_min") {
        cfg.turbulence.kappa_min =
            value == "auto" ? std::nullopt
                            : std::optional<double>(parse_double_strict(value, key));
    } else if (key == "channel.turbulence.kappa_max") {
        cfg.turbulence.kappa_max =
            value == "auto" ? std::nullopt
                            : std::optional<double>(parse_double_strict(value, key));
    } else if (key == "homodyne.p_signal") {
        cfg.homodyne.p_signal = parse_double_strict(value, key);
    } else if (key == "homodyne.p_lo") {
        cfg.homodyne.p_lo = parse_double_strict(value, key);
    } else if (key == "homodyne.omega_if") {
        cfg.homodyne.omega_if = parse_double_strict(value, key);
    } else if (key == "homodyne.phi_signal") {
        cfg.homodyne.phi_signal = parse_angle_value(value, key);
    } else if (key == "homodyne.phi_lo") {
        cfg.homodyne.phi_lo = parse_angle_value(value, key);
    } else if (key == "homodyne.beat_mode") {
        if (value == "paper" || value == "paper_literal") {
            cfg.homodyne.beat_mode = BeatMode::PaperLiteral;
        } else if (value == "standard") {
            cfg.homodyne.beat_mode = BeatMode::Standard;
        } else {
            throw ConfigError(key + ": expected paper, paper_literal, or standard (got \"" +
                              value + "\")");
        }
    } else if (key == "homodyne.decision_mode") {
        if (value == "probabilistic") cfg.homodyne.decision_mode = DecisionMode::Probabilistic;
        else if (value == "threshold") cfg.homodyne.decision_mode = DecisionMode::Threshold;
        else throw ConfigError(key + ": expected probabilistic or threshold (got \"" + value +
                               "\")");
    } else if (key == "homodyne.threshold") {
        cfg.homodyne.threshold = parse_double_strict(value, key);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

} // namespace detail

/// Builds an ExperimentConfig from flat key/value text plus flag overrides.
/// File lines look like `channel.rotation.theta = pi/4`; `#` starts a
/// comment. Overrides are applied after the file, so flags win. Every value
/// is range-checked and failures name the key; empty input yields the
/// built-in defaults.
inline ExperimentConfig parse_config(
    std::string_view file_text,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    ExperimentConfig cfg;
    std::size_t line_start = 0;
    int line_no = 0;
    while (line_start <= file_text.size()) {
        const std::size_t line_end = std::min(file_text.find('\n', line_start), file_text.size());
        std::string_view line = file_text.substr(line_start, line_end - line_start);
        line_start = line_end + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value (got \"" + stripped + "\")");
        }
        const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
        const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key or value");
        }
        detail::apply_key(cfg, key, value);
    }
    for (const auto& [key, value] : overrides) {
        detail::apply_key(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

/// Canonical flat-text form of a config; parse_config(serialize_config(c))
/// reproduces c exactly (doubles are printed with 17 significant digits).
inline std::string serialize_config(const ExperimentConfig& cfg) {
    using detail::format_double;
    std::string out;
    const auto emit = [&](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    emit("protocol.name", protocol_name(cfg.protocol));
    emit("protocol.dimension", std::to_string(cfg.dimension));
    emit("run.iterations", std::to_string(cfg.iterations));
    emit("run.seed", std::to_string(cfg.seed));
    emit("run.workers", std::to_string(cfg.workers));
    emit("channel.rotation.enabled", cfg.rotation.enabled ? "true" : "false");
    emit("channel.rotation.theta", format_double(cfg.rotation.theta));
    emit("channel.rotation.rho", format_double(cfg.rotation.rho));
    emit("channel.turbulence.enabled", cfg.turbulence.enabled ? "true" : "false");
    emit("channel.turbulence.inner_scale", format_double(cfg.turbulence.inner_scale));
    emit("channel.turbulence.outer_scale", format_double(cfg.turbulence.outer_scale));
    emit("channel.turbulence.alpha", format_double(cfg.turbulence.alpha));
    emit("channel.turbulence.coherence_radius", format_double(cfg.turbulence.coherence_radius));
    emit("channel.turbulence.wavelength", format_double(cfg.turbulence.wavelength));
    emit("channel.turbulence.distance", format_double(cfg.turbulence.distance));
    emit("channel.turbulence.gain", format_double(cfg.turbulence.gain));
    emit("channel.turbulence.kappa_min", cfg.turbulence.kappa_min.has_value()
                                             ? format_double(*cfg.turbulence.kappa_min)
                                             : "auto");
    emit("channel.turbulence.kappa_max", cfg.turbulence.kappa_max.has_value()
                                             ? format_double(*cfg.turbulence.kappa_max)
                                             : "auto");
    emit("homodyne.p_signal", format_double(cfg.homodyne.p_signal));
    emit("homodyne.p_lo", format_double(cfg.homodyne.p_lo));
    emit("homodyne.omega_if", format_double(cfg.homodyne.omega_if));
    emit("homodyne.phi_signal", format_double(cfg.homodyne.phi_signal));
    emit("homodyne.phi_lo", format_double(cfg.homodyne.phi_lo));
    emit("homodyne.beat_mode",
         cfg.homodyne.beat_mode == BeatMode::PaperLiteral ? "paper" : "standard");
    emit("homodyne.decision_mode",
         cfg.homodyne.decision_mode == DecisionMode::Probabilistic ? "probabilistic"
                                                                   : "threshold");
    emit("homodyne.threshold", format_double(cfg.homodyne.threshold));
    return out;
}

} // namespace qkd
