#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/homodyne.hpp"
#include "qkd/protocol.hpp"
#include "qkd/rng.hpp"
#include "qkd/states.hpp"

namespace qkd {

enum class Protocol { Kmb09, Bb84 };

inline const char* protocol_name(Protocol p) {
    return p == Protocol::Kmb09 ? "kmb09" : "bb84";
}

/// Full description of one Monte Carlo run. Identical configs (including the
/// seed) produce bit-identical results regardless of the worker count.
struct ExperimentConfig {
    Protocol protocol = Protocol::Kmb09;
    int dimension = 2;
    std::int64_t iterations = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    RotationNoiseConfig rotation{};
    TurbulenceConfig turbulence{};
    HomodyneConfig homodyne{};

    void validate() const {
        if (dimension < 2) {
            throw std::invalid_argument("protocol.dimension: must be at least 2 (got " +
                                        std::to_string(dimension) + ")");
        }
        if (protocol == Protocol::Bb84 && dimension != 2) {
            throw std::invalid_argument("protocol.dimension: bb84 requires dimension 2");
        }
        if (iterations < 1) {
            throw std::invalid_argument("run.iterations: must be at least 1");
        }
        if (workers < 1) {
            throw std::invalid_argument("run.workers: must be at least 1");
        }
        rotation.validate();
        turbulence.validate();
        homodyne.validate();
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Cumulative results of a run. `qber` is errors/sifted (0 when nothing was
/// sifted) and `efficiency` is sifted/rounds; the series hold the running
/// values after each round.
struct RunStats {
    std::int64_t rounds = 0;
    std::int64_t sifted = 0;
    std::int64_t errors = 0;
    double qber = 0.0;
    double efficiency = 0.0;
    std::vector<double> qber_series;
    std::vector<double> efficiency_series;
};

/// Analytical sifting efficiency of the noiseless protocol: (N-1)/(2N).
inline double efficiency_analytic(int dimension) {
    if (dimension < 2) {
        throw std::invalid_argument("efficiency_analytic: dimension must be at least 2");
    }
    return static_cast<double>(dimension - 1) / (2.0 * dimension);
}

namespace detail {

/// Per-round variate order (fixed; determinism depends on it):
/// bit, index/basis draws, rotation trigger, [replacement slot], measurement
/// outcome, then for conclusive rounds [turbulence kappa, turbulence sign],
/// flip variate.
inline PulseRecord simulate_one_round(const ExperimentConfig& cfg, const BasisSet& bases,
                                      std::int64_t round) {
    RoundRng rng = derive_round_randomness(cfg.seed, static_cast<std::uint64_t>(round));
    PulseRecord rec;
    rec.round = round;

    BasisId alice_basis = BasisId::E;
    if (cfg.protocol == Protocol::Kmb09) {
        rec.alice_bit = rng.uniform_bit();
        rec.alice_index = rng.uniform_index(cfg.dimension);
        alice_basis = rec.alice_bit == 0 ? BasisId::E : BasisId::F;
    } else {
        rec.alice_bit = rng.uniform_bit();
        alice_basis = rng.uniform_bit() == 0 ? BasisId::E : BasisId::F;
        rec.alice_index = rec.alice_bit + 1;
    }
    rec.bob_basis = rng.uniform_bit() == 0 ? BasisId::E : BasisId::F;

    StateVector pulse = cfg.protocol == Protocol::Kmb09
                            ? alice_prepare(rec.alice_bit, rec.alice_index, bases)
                            : bases.state(alice_basis, rec.alice_index);

    if (cfg.rotation.enabled) {
        const bool fired = rng.bernoulli(cfg.rotation.rho);
        if (fired) {
            pulse = cfg.dimension == 2 ? apply_rotation(pulse, cfg.rotation.theta)
                                       : depolarize_replace(pulse, bases, rng.next_unit());
        }
    }

    const std::vector<double> probs = born_probabilities(pulse, bases.states(rec.bob_basis));
    rec.bob_index = sample_outcome(probs, rng.next_unit());

    const std::optional<int> decoded =
        cfg.protocol == Protocol::Kmb09
            ? kmb09_decode(rec.alice_index, rec.bob_basis, rec.bob_index, cfg.dimension)
            : bb84_round(rec.alice_bit, alice_basis, rec.bob_basis, rec.bob_index);
    if (!decoded.has_value()) return rec;

    rec.conclusive = true;
    rec.bob_bit = *decoded;

    // Detection layer: turbulence degrades the beat phase and can flip the
    // decoded bit. Conclusiveness is already fixed, so the sifting efficiency
    // is untouched by this stage.
    double turbulence_delta = 0.0;
    if (cfg.turbulence.enabled) {
        const double u_kappa = rng.next_unit();
        const double u_sign = rng.next_unit();
        turbulence_delta = sample_phase(cfg.turbulence, u_kappa, u_sign).delta;
    }
    const DetectionOutcome detection = detect(cfg.homodyne, turbulence_delta, rng.next_unit());
    if (detection.flipped) {
        rec.bob_bit = 1 - *rec.bob_bit;
        rec.flipped_by_detection = true;
    }
    return rec;
}

} // namespace detail

/// Runs every round of the configured protocol and returns the per-round
/// records in round order. Rounds are independent given their derived random
/// streams, so they are fanned out across `workers` threads in contiguous
/// blocks; the result is bit-identical for any worker count.
inline std::vector<PulseRecord> simulate_rounds(const ExperimentConfig& cfg) {
    cfg.validate();
    const BasisSet bases = build_bases(cfg.dimension);
    std::vector<PulseRecord> records(static_cast<std::size_t>(cfg.iterations));

    const auto run_block = [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t r = first; r < last; ++r) {
            records[static_cast<std::size_t>(r)] = detail::simulate_one_round(cfg, bases, r + 1);
        }
    };

    const int workers = static_cast<int>(
        std::min<std::int64_t>(cfg.workers, cfg.iterations));
    if (workers <= 1) {
        run_block(0, cfg.iterations);
        return records;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (cfg.iterations + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t first = w * chunk;
        const std::int64_t last = std::min<std::int64_t>(first + chunk, cfg.iterations);
        if (first >= last) break;
        pool.emplace_back(run_block, first, last);
    }
    for (auto& t : pool) t.join();
    return records;
}

/// Folds per-round records into totals and the running QBER/efficiency series.
inline RunStats accumulate_stats(std::span<const PulseRecord> records) {
    RunStats stats;
    stats.rounds = static_cast<std::int64_t>(records.size());
    stats.qber_series.reserve(records.size());
    stats.efficiency_series.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const PulseRecord& rec = records[k];
        if (rec.conclusive) {
            ++stats.sifted;
            if (*rec.bob_bit != rec.alice_bit) ++stats.errors;
        }
        stats.qber_series.push_back(
            stats.sifted > 0 ? static_cast<double>(stats.errors) / stats.sifted : 0.0);
        stats.efficiency_series.push_back(static_cast<double>(stats.sifted) /
                                          static_cast<double>(k + 1));
    }
    stats.qber = stats.sifted > 0 ? static_cast<double>(stats.errors) / stats.sifted : 0.0;
    stats.efficiency =
        stats.rounds > 0 ? static_cast<double>(stats.sifted) / stats.rounds : 0.0;
    return stats;
}

/// Validates, simulates, and aggregates one full experiment.
inline RunStats run_experiment(const ExperimentConfig& cfg) {
    const std::vector<PulseRecord> records = simulate_rounds(cfg);
    return accumulate_stats(records);
}

} // namespace qkd
