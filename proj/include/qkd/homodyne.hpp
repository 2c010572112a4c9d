#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkd {

/// How the coherent beat term is computed. PaperLiteral uses
/// 2*sqrt(P_S + P_LO) as the cross-term amplitude; Standard uses the
/// conventional 2*sqrt(P_S * P_LO).
enum class BeatMode { PaperLiteral, Standard };

/// How a phase mismatch turns into a bit decision error. Probabilistic flips
/// with probability (1 - cos(delta))/2; Threshold flips deterministically
/// whenever cos(delta) falls below `threshold`.
enum class DecisionMode { Probabilistic, Threshold };

/// Homodyne receiver parameters. Powers are abstract nonnegative units;
/// omega_if must be 0 (the local oscillator tracks the carrier frequency).
struct HomodyneConfig {
    double p_signal = 3.0;
    double p_lo = 8.0;
    double omega_if = 0.0;
    double phi_signal = 0.0;
    double phi_lo = 0.0;
    BeatMode beat_mode = BeatMode::PaperLiteral;
    DecisionMode decision_mode = DecisionMode::Probabilistic;
    double threshold = 0.0;

    void validate() const {
        if (!(p_signal >= 0.0)) {
            throw std::invalid_argument("homodyne.p_signal: must be nonnegative");
        }
        if (!(p_lo >= 0.0)) {
            throw std::invalid_argument("homodyne.p_lo: must be nonnegative");
        }
        if (omega_if != 0.0) {
            throw std::invalid_argument(
                "homodyne.omega_if: homodyne operation requires omega_if = 0");
        }
        if (!std::isfinite(phi_signal) || !std::isfinite(phi_lo)) {
            throw std::invalid_argument("homodyne.phi_signal/phi_lo: must be finite");
        }
        if (!std::isfinite(threshold)) {
            throw std::invalid_argument("homodyne.threshold: must be finite");
        }
    }

    friend bool operator==(const HomodyneConfig&, const HomodyneConfig&) = default;
};

/// Result of detecting one pulse: the mixed optical power, the total phase
/// mismatch that produced it, and whether the decoded bit was flipped.
struct DetectionOutcome {
    double power = 0.0;
    double delta_phase = 0.0; // phi_signal + turbulence delta - phi_lo
    bool flipped = false;
};

/// Mixed power at the detector for a given turbulence phase offset:
///   P = P_S + P_LO + cross * cos(omega_if + phi_signal + delta - phi_lo)
/// with cross = 2*sqrt(P_S + P_LO) (PaperLiteral) or 2*sqrt(P_S * P_LO)
/// (Standard). The signal power is never neglected against the LO power.
inline double mixed_power(const HomodyneConfig& cfg, double turbulence_delta) {
    cfg.validate();
    const double cross = cfg.beat_mode == BeatMode::PaperLiteral
                             ? 2.0 * std::sqrt(cfg.p_signal + cfg.p_lo)
                             : 2.0 * std::sqrt(cfg.p_signal * cfg.p_lo);
    const double arg = cfg.omega_if + cfg.phi_signal + turbulence_delta - cfg.phi_lo;
    return cfg.p_signal + cfg.p_lo + cross * std::cos(arg);
}

/// Probability that a phase mismatch of delta flips the decoded bit:
/// (1 - cos(delta))/2. Even in delta, 0 at perfect match, 1 at full inversion.
inline double flip_probability(double delta_phase) {
    return (1.0 - std::cos(delta_phase)) / 2.0;
}

/// Bit-flip decision for one detection event. Probabilistic mode consumes the
/// uniform variate u; threshold mode ignores it.
inline bool decide_flip(const HomodyneConfig& cfg, double delta_phase, double u) {
    cfg.validate();
    if (cfg.decision_mode == DecisionMode::Probabilistic) {
        return u < flip_probability(delta_phase);
    }
    return std::cos(delta_phase) < cfg.threshold;
}

/// Full detection of one pulse given the turbulence phase offset.
inline DetectionOutcome detect(const HomodyneConfig& cfg, double turbulence_delta, double u) {
    DetectionOutcome out;
    out.delta_phase = cfg.phi_signal + turbulence_delta - cfg.phi_lo;
    out.power = mixed_power(cfg, turbulence_delta);
    out.flipped = decide_flip(cfg, out.delta_phase, u);
    return out;
}

} // namespace qkd
