#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkd {

/// Tolerance for exact-math invariants (norms, orthonormality, probability sums).
inline constexpr double kNormTolerance = 1e-9;

/// Which of the two mutually unbiased measurement bases a party uses.
enum class BasisId { E, F };

inline char basis_label(BasisId b) { return b == BasisId::E ? 'E' : 'F'; }

/// An N-dimensional pure state, stored as complex probability amplitudes.
/// Construction enforces unit norm within kNormTolerance and N >= 2.
class StateVector {
  public:
    explicit StateVector(std::vector<std::complex<double>> amplitudes)
        : amps_(std::move(amplitudes)) {
        if (amps_.size() < 2) {
            throw std::invalid_argument(
                "StateVector: dimension must be at least 2 (got " +
                std::to_string(amps_.size()) + ")");
        }
        const double n2 = norm_squared();
        if (std::abs(n2 - 1.0) > kNormTolerance) {
            throw std::invalid_argument(
                "StateVector: amplitudes are not normalized (|a|^2 = " +
                std::to_string(n2) + ")");
        }
    }

    int dimension() const { return static_cast<int>(amps_.size()); }

    /// 0-based amplitude access.
    const std::complex<double>& operator[](std::size_t k) const { return amps_[k]; }

    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

  private:
    std::vector<std::complex<double>> amps_;
};

/// <a|b> with the physics convention (conjugate-linear in the first slot).
inline std::complex<double> inner_product(const StateVector& a, const StateVector& b) {
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument("inner_product: dimension mismatch");
    }
    std::complex<double> s = 0.0;
    for (int k = 0; k < a.dimension(); ++k) s += std::conj(a[k]) * b[k];
    return s;
}

inline double overlap_probability(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

/// The paired measurement bases of one protocol party: the standard basis e
/// and its discrete-Fourier partner f. The two are mutually unbiased, i.e.
/// every cross overlap |<e_i|f_j>|^2 equals 1/N.
class BasisSet {
  public:
    int dimension() const { return dimension_; }

    /// Indices are 1-based, matching the protocol's announcement convention.
    const StateVector& e_state(int index) const { return at(e_states_, index); }
    const StateVector& f_state(int index) const { return at(f_states_, index); }

    const StateVector& state(BasisId basis, int index) const {
        return basis == BasisId::E ? e_state(index) : f_state(index);
    }

    std::span<const StateVector> e_states() const { return e_states_; }
    std::span<const StateVector> f_states() const { return f_states_; }

    std::span<const StateVector> states(BasisId basis) const {
        return basis == BasisId::E ? e_states() : f_states();
    }

    friend BasisSet build_bases(int dimension);

  private:
    BasisSet(int dimension, std::vector<StateVector> e, std::vector<StateVector> f)
        : dimension_(dimension), e_states_(std::move(e)), f_states_(std::move(f)) {}

    const StateVector& at(const std::vector<StateVector>& v, int index) const {
        if (index < 1 || index > dimension_) {
            throw std::out_of_range("BasisSet: index " + std::to_string(index) +
                                    " outside 1.." + std::to_string(dimension_));
        }
        return v[static_cast<std::size_t>(index - 1)];
    }

    int dimension_;
    std::vector<StateVector> e_states_;
    std::vector<StateVector> f_states_;
};

/// Builds the paired bases for a given dimension. The e basis is the standard
/// basis; f_j[k] = exp(2*pi*i*j*k/N)/sqrt(N) is its discrete Fourier
/// transform, which gives exact mutual unbiasedness for every N.
inline BasisSet build_bases(int dimension) {
    if (dimension < 2) {
        throw std::invalid_argument("build_bases: dimension must be at least 2 (got " +
                                    std::to_string(dimension) + ")");
    }
    const auto n = static_cast<std::size_t>(dimension);
    std::vector<StateVector> e;
    std::vector<StateVector> f;
    e.reserve(n);
    f.reserve(n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(dimension));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::complex<double>> ej(n, 0.0);
        ej[j] = 1.0;
        e.emplace_back(std::move(ej));

        std::vector<std::complex<double>> fj(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t turn = j * k % n; // phase as a fraction turn/N of 2*pi
            std::complex<double> unit;
            if (turn * 4 % n == 0) {
                // Exact quarter-turn phases, so the N=2 and N=4 bases carry no
                // trigonometric rounding at all.
                switch (turn * 4 / n) {
                    case 0: unit = {1.0, 0.0}; break;
                    case 1: unit = {0.0, 1.0}; break;
                    case 2: unit = {-1.0, 0.0}; break;
                    default: unit = {0.0, -1.0}; break;
                }
            } else {
                unit = std::polar(1.0, 2.0 * std::numbers::pi *
                                           static_cast<double>(turn) /
                                           static_cast<double>(dimension));
            }
            fj[k] = inv_sqrt_n * unit;
        }
        f.emplace_back(std::move(fj));
    }
    return BasisSet(dimension, std::move(e), std::move(f));
}

/// Projective-measurement probabilities of `s` in the given orthonormal basis:
/// p_j = |<basis_j|s>|^2.
inline std::vector<double> born_probabilities(const StateVector& s,
                                              std::span<const StateVector> basis) {
    if (basis.size() != static_cast<std::size_t>(s.dimension())) {
        throw std::invalid_argument("born_probabilities: basis size " +
                                    std::to_string(basis.size()) +
                                    " does not match state dimension " +
                                    std::to_string(s.dimension()));
    }
    std::vector<double> p(basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        p[j] = overlap_probability(basis[j], s);
    }
    return p;
}

/// Inverse-CDF sampling: returns the smallest 1-based index whose cumulative
/// probability exceeds u (a boundary value belongs to the next bin).
/// Deterministic in (p, u).
inline int sample_outcome(std::span<const double> p, double u) {
    if (p.size() < 1) throw std::invalid_argument("sample_outcome: empty distribution");
    if (!(u >= 0.0) || u >= 1.0) {
        throw std::invalid_argument("sample_outcome: variate outside [0,1)");
    }
    double sum = 0.0;
    for (const double pj : p) {
        if (!(pj >= -kNormTolerance)) {
            throw std::invalid_argument("sample_outcome: negative probability entry");
        }
        sum += pj;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
        throw std::invalid_argument("sample_outcome: probabilities sum to " +
                                    std::to_string(sum) + ", not 1");
    }
    double cumulative = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        cumulative += p[j];
        if (cumulative > u) return static_cast<int>(j) + 1;
    }
    // Rounding can leave the final cumulative at 1 - epsilon < u; the last bin
    // owns the remainder.
    return static_cast<int>(p.size());
}

} // namespace qkd
