#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qkd/experiment.hpp"

namespace qkd {

/// Exact expectations for a configured channel, computed without Monte Carlo.
struct OracleResult {
    double expected_efficiency = 0.0;
    double expected_qber = 0.0;
};

namespace detail {

/// Adaptive Simpson quadrature with Richardson correction. The integrands
/// here are smooth apart from mild oscillation, so this converges quickly.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                               double b, double fb, double m, double fm, double whole,
                               double tol, int depth) {
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

/// Log-kappa fraction on which cos(phi0 + delta(kappa)) < tau, where
/// delta(kappa) = gain * psd(kappa) is strictly decreasing. The flip region's
/// boundaries are located by bisection on the monotone phase, so the result
/// carries no quadrature error at all.
inline double threshold_flip_measure(double phi0, double tau, const TurbulenceConfig& cfg) {
    if (tau >= 1.0) return 1.0; // cos < 1 holds almost everywhere
    if (tau <= -1.0) return 0.0;

    const double t_lo = std::log(cfg.kappa_lo());
    const double t_hi = std::log(cfg.kappa_hi());
    const auto delta_at = [&](double t) {
        return cfg.gain * von_karman_psd(std::exp(t), cfg);
    };
    if (t_hi - t_lo <= 0.0) {
        return std::cos(phi0 + delta_at(t_lo)) < tau ? 1.0 : 0.0;
    }

    // Phase x(t) = phi0 + delta(t) falls monotonically from x_top to x_bot.
    const double x_top = phi0 + delta_at(t_lo);
    const double x_bot = phi0 + delta_at(t_hi);
    const auto t_of_phase = [&](double x) {
        if (x >= x_top) return t_lo;
        if (x <= x_bot) return t_hi;
        double lo = t_lo;
        double hi = t_hi;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (t_hi - t_lo); ++it) {
            const double mid = (lo + hi) / 2.0;
            (phi0 + delta_at(mid) > x ? lo : hi) = mid;
        }
        return (lo + hi) / 2.0;
    };

    const double two_pi = 2.0 * std::numbers::pi;
    const double a = std::acos(tau); // cos(x) < tau iff x mod 2pi in (a, 2pi - a)
    double measure = 0.0;
    const auto k_first = static_cast<long long>(std::floor((x_bot - two_pi) / two_pi)) - 1;
    const auto k_last = static_cast<long long>(std::floor(x_top / two_pi)) + 1;
    for (long long k = k_first; k <= k_last; ++k) {
        const double lo = std::max(x_bot, two_pi * k + a);
        const double hi = std::min(x_top, two_pi * k + two_pi - a);
        if (hi <= lo) continue;
        measure += t_of_phase(lo) - t_of_phase(hi);
    }
    return measure / (t_hi - t_lo);
}

} // namespace detail

/// Expected probability that the detection layer flips a decoded bit, under
/// the same log-uniform kappa density the Monte Carlo sampler draws from.
/// The probabilistic decision mode averages flip_probability over kappa and
/// the phase sign by adaptive quadrature; the threshold mode measures the
/// flip region exactly via the spectrum's monotonicity.
inline double expected_flip_probability(const TurbulenceConfig& turbulence,
                                        const HomodyneConfig& homodyne) {
    turbulence.validate();
    homodyne.validate();
    const double phi0 = homodyne.phi_signal - homodyne.phi_lo;

    const auto flip_at = [&](double delta) {
        if (homodyne.decision_mode == DecisionMode::Probabilistic) {
            return flip_probability(phi0 + delta);
        }
        return std::cos(phi0 + delta) < homodyne.threshold ? 1.0 : 0.0;
    };
    if (!turbulence.enabled || turbulence.gain == 0.0) {
        // No kappa dependence left; only the static phase mismatch remains.
        return flip_at(0.0);
    }

    if (homodyne.decision_mode == DecisionMode::Threshold) {
        // cos(phi0 - delta) = cos(-phi0 + delta), so the minus-sign branch is
        // the plus-sign branch with the static mismatch negated.
        return 0.5 * (detail::threshold_flip_measure(phi0, homodyne.threshold, turbulence) +
                      detail::threshold_flip_measure(-phi0, homodyne.threshold, turbulence));
    }

    const double t_lo = std::log(turbulence.kappa_lo());
    const double t_hi = std::log(turbulence.kappa_hi());
    if (t_hi - t_lo <= 0.0) {
        const double d = turbulence.gain * von_karman_psd(turbulence.kappa_lo(), turbulence);
        return 0.5 * (flip_probability(phi0 + d) + flip_probability(phi0 - d));
    }
    const std::function<double(double)> integrand = [&](double t) {
        const double d = turbulence.gain * von_karman_psd(std::exp(t), turbulence);
        return 0.5 * (flip_probability(phi0 + d) + flip_probability(phi0 - d));
    };
    return detail::integrate(integrand, t_lo, t_hi, 1e-10) / (t_hi - t_lo);
}

/// Brute-force expectation oracle: exhaustively enumerates Alice's bit and
/// index, the rotation trigger (and, above dimension 2, every replacement
/// state), and Bob's basis; weights each branch by its exact Born
/// probabilities; and folds in the detection flip probability computed by
/// quadrature over the kappa sampling density. Entirely independent of the
/// Monte Carlo path: nothing here draws a sample.
inline OracleResult enumeration_oracle(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.dimension > 8) {
        throw std::invalid_argument("enumeration_oracle: supported for dimension <= 8");
    }
    const BasisSet bases = build_bases(cfg.dimension);
    const int n = cfg.dimension;
    const double rho = cfg.rotation.enabled ? cfg.rotation.rho : 0.0;

    // Channel branches: the prepared state goes through unchanged with weight
    // 1-rho, and through the noise map with weight rho.
    const auto channel_branches = [&](const StateVector& prepared) {
        std::vector<std::pair<double, StateVector>> branches;
        if (rho < 1.0) branches.emplace_back(1.0 - rho, prepared);
        if (rho > 0.0) {
            if (n == 2) {
                branches.emplace_back(rho, apply_rotation(prepared, cfg.rotation.theta));
            } else {
                for (int s = 1; s <= n; ++s) {
                    branches.emplace_back(rho / (2.0 * n), bases.e_state(s));
                    branches.emplace_back(rho / (2.0 * n), bases.f_state(s));
                }
            }
        }
        return branches;
    };

    double conclusive_mass = 0.0;
    double error_mass = 0.0;

    if (cfg.protocol == Protocol::Kmb09) {
        for (int bit = 0; bit <= 1; ++bit) {
            for (int index = 1; index <= n; ++index) {
                const double w_prep = 0.5 / n;
                for (const auto& [w_chan, state] : channel_branches(
                         alice_prepare(bit, index, bases))) {
                    for (const BasisId basis : {BasisId::E, BasisId::F}) {
                        const double w = w_prep * w_chan * 0.5;
                        const std::vector<double> p =
                            born_probabilities(state, bases.states(basis));
                        // Summing the conclusive slots directly (instead of
                        // 1 - p[announced]) avoids cancellation, so a channel
                        // that preserves the state exactly contributes an
                        // exact zero here.
                        double p_conclusive = 0.0;
                        for (std::size_t j = 0; j < p.size(); ++j) {
                            if (j != static_cast<std::size_t>(index - 1)) p_conclusive += p[j];
                        }
                        conclusive_mass += w * p_conclusive;
                        const int decoded = basis == BasisId::E ? 1 : 0;
                        if (decoded != bit) error_mass += w * p_conclusive;
                    }
                }
            }
        }
    } else {
        for (int bit = 0; bit <= 1; ++bit) {
            for (const BasisId alice_basis : {BasisId::E, BasisId::F}) {
                const StateVector prepared = bases.state(alice_basis, bit + 1);
                for (const auto& [w_chan, state] : channel_branches(prepared)) {
                    // Mismatched bases are discarded, so only the matching
                    // basis (probability 1/2) contributes.
                    const double w = 0.5 * 0.5 * w_chan * 0.5;
                    const std::vector<double> p =
                        born_probabilities(state, bases.states(alice_basis));
                    conclusive_mass += w;
                    error_mass += w * p[static_cast<std::size_t>(1 - bit)];
                }
            }
        }
    }

    const double p_flip = expected_flip_probability(cfg.turbulence, cfg.homodyne);
    const double q_pre = conclusive_mass > 0.0 ? error_mass / conclusive_mass : 0.0;

    OracleResult result;
    result.expected_efficiency = conclusive_mass;
    // A detection flip turns a correct bit wrong and vice versa.
    result.expected_qber = q_pre + p_flip - 2.0 * q_pre * p_flip;
    return result;
}

} // namespace qkd
