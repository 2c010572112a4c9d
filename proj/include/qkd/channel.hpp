#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "qkd/states.hpp"

namespace qkd {

/// Collective-rotation (depolarizing) noise: each pulse is rotated by `theta`
/// with probability `rho`. For dimensions above 2 the rotation is replaced by
/// a uniform basis-state substitution (see depolarize_replace).
struct RotationNoiseConfig {
    bool enabled = true;
    double theta = std::numbers::pi / 4.0;
    double rho = 1.0;

    void validate() const {
        if (!std::isfinite(theta)) {
            throw std::invalid_argument("channel.rotation.theta: must be finite");
        }
        if (!(rho >= 0.0 && rho <= 1.0)) {
            throw std::invalid_argument("channel.rotation.rho: must be in [0,1] (got " +
                                        std::to_string(rho) + ")");
        }
    }

    friend bool operator==(const RotationNoiseConfig&, const RotationNoiseConfig&) = default;
};

/// Von Karman random-phase turbulence over the free-space path.
///
/// The spectrum is evaluated between the outer-scale and inner-scale spatial
/// frequencies kappa_0 = 2*pi/outer_scale and kappa_m = 2*pi/inner_scale,
/// which are also the default sampling bounds. `gain` rescales the sampled
/// phase magnitude; wavelength and distance are carried for reporting only.
struct TurbulenceConfig {
    bool enabled = true;
    double inner_scale = 0.01;       // l0 [m]
    double outer_scale = 10.0;       // L0 [m]
    double alpha = 5.0 / 3.0;        // spectral exponent
    double coherence_radius = 0.02;  // r_c [m]; with gain=1 this calibrates the
                                     // turbulence-only error rate to ~0.12
    double wavelength = 1500e-9;     // [m]
    double distance = 1000.0;        // [m]
    double gain = 1.0;
    std::optional<double> kappa_min; // [rad/m]; defaults to kappa_0
    std::optional<double> kappa_max; // [rad/m]; defaults to kappa_m

    double kappa_m() const { return 2.0 * std::numbers::pi / inner_scale; }
    double kappa_0() const { return 2.0 * std::numbers::pi / outer_scale; }
    double kappa_lo() const { return kappa_min.value_or(kappa_0()); }
    double kappa_hi() const { return kappa_max.value_or(kappa_m()); }

    void validate() const {
        if (!(inner_scale > 0.0)) {
            throw std::invalid_argument("channel.turbulence.inner_scale: must be positive");
        }
        if (!(outer_scale > inner_scale)) {
            throw std::invalid_argument(
                "channel.turbulence.outer_scale: must exceed inner_scale");
        }
        if (!(alpha > 0.0 && alpha < 2.0)) {
            throw std::invalid_argument("channel.turbulence.alpha: must lie in (0,2) (got " +
                                        std::to_string(alpha) + ")");
        }
        if (!(coherence_radius > 0.0)) {
            throw std::invalid_argument(
                "channel.turbulence.coherence_radius: must be positive");
        }
        if (!(wavelength > 0.0)) {
            throw std::invalid_argument("channel.turbulence.wavelength: must be positive");
        }
        if (!(distance > 0.0)) {
            throw std::invalid_argument("channel.turbulence.distance: must be positive");
        }
        if (!(gain >= 0.0)) {
            throw std::invalid_argument("channel.turbulence.gain: must be nonnegative");
        }
        if (!(kappa_lo() > 0.0)) {
            throw std::invalid_argument("channel.turbulence.kappa_min: must be positive");
        }
        if (!(kappa_lo() <= kappa_hi())) {
            throw std::invalid_argument(
                "channel.turbulence.kappa_min: must not exceed kappa_max");
        }
    }

    friend bool operator==(const TurbulenceConfig&, const TurbulenceConfig&) = default;
};

/// One sampled turbulence event: spatial frequency, phase magnitude, and the
/// signed phase offset delta = sign * magnitude that enters the beat term.
struct PhaseSample {
    double kappa = 0.0;     // [rad/m]
    double magnitude = 0.0; // [rad]
    int sign = 1;           // +1 or -1
    double delta = 0.0;     // [rad]
};

/// Normalization factor of the phase spectrum,
/// C(alpha) = alpha * 2^(alpha-2) * Gamma(1+alpha/2) / (pi * Gamma(1-alpha/2)).
/// Defined for alpha in (0,2); Gamma(1-alpha/2) has a pole at alpha = 2.
inline double c_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw std::domain_error("c_alpha: alpha must lie in (0,2) (got " +
                                std::to_string(alpha) + ")");
    }
    return alpha * std::pow(2.0, alpha - 2.0) * std::tgamma(1.0 + alpha / 2.0) /
           (std::numbers::pi * std::tgamma(1.0 - alpha / 2.0));
}

/// Von Karman power spectral density of the random phase at spatial
/// frequency kappa:
///   [C(alpha) * r_c^-alpha] * exp(-kappa^2/kappa_m^2)
///     / (kappa^2 + kappa_0^2)^(1+alpha/2).
/// Strictly positive and strictly decreasing for kappa >= 0.
inline double von_karman_psd(double kappa, const TurbulenceConfig& cfg) {
    cfg.validate();
    if (!(kappa >= 0.0)) {
        throw std::invalid_argument("von_karman_psd: kappa must be nonnegative");
    }
    const double km = cfg.kappa_m();
    const double k0 = cfg.kappa_0();
    const double scale = c_alpha(cfg.alpha) * std::pow(cfg.coherence_radius, -cfg.alpha);
    return scale * std::exp(-(kappa * kappa) / (km * km)) /
           std::pow(kappa * kappa + k0 * k0, 1.0 + cfg.alpha / 2.0);
}

/// Draws one turbulence phase sample from two uniform variates: kappa is
/// log-uniform over [kappa_min, kappa_max] (covering the spectrum's decades
/// evenly), the magnitude is gain * psd(kappa), and the sign is +1 when
/// u_sign < 0.5. Deterministic in (cfg, u_kappa, u_sign).
inline PhaseSample sample_phase(const TurbulenceConfig& cfg, double u_kappa, double u_sign) {
    if (!cfg.enabled) {
        throw std::logic_error("sample_phase: turbulence is disabled");
    }
    cfg.validate();
    const double lo = cfg.kappa_lo();
    const double hi = cfg.kappa_hi();
    PhaseSample s;
    s.kappa = lo * std::pow(hi / lo, u_kappa);
    s.magnitude = cfg.gain * von_karman_psd(s.kappa, cfg);
    s.sign = u_sign < 0.5 ? 1 : -1;
    s.delta = s.sign * s.magnitude;
    return s;
}

/// SO(2) rotation of a 2-dimensional state:
/// R(theta) = [[cos, -sin], [sin, cos]] applied to both complex amplitudes.
inline StateVector apply_rotation(const StateVector& s, double theta) {
    if (s.dimension() != 2) {
        throw std::invalid_argument(
            "apply_rotation: defined for dimension 2 only; use depolarize_replace "
            "for higher dimensions");
    }
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    return StateVector({c * s[0] - sn * s[1], sn * s[0] + c * s[1]});
}

/// Noise stand-in for dimensions above 2: replaces the pulse with a uniformly
/// chosen state among the 2N basis states (slots 1..N are e_1..e_N, slots
/// N+1..2N are f_1..f_N).
inline StateVector depolarize_replace(const StateVector& s, const BasisSet& bases, double u) {
    if (s.dimension() != bases.dimension()) {
        throw std::invalid_argument("depolarize_replace: dimension mismatch");
    }
    if (!(u >= 0.0) || u >= 1.0) {
        throw std::invalid_argument("depolarize_replace: variate outside [0,1)");
    }
    const int n = bases.dimension();
    int slot = static_cast<int>(u * 2.0 * n) + 1;
    if (slot > 2 * n) slot = 2 * n;
    return slot <= n ? bases.e_state(slot) : bases.f_state(slot - n);
}

} // namespace qkd
