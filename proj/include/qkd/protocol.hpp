#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/states.hpp"

namespace qkd {

/// Everything recorded about one protocol round. Indices are 1-based; bob_bit
/// is present exactly when the round is conclusive.
struct PulseRecord {
    std::int64_t round = 0;
    int alice_bit = 0;
    int alice_index = 1;
    BasisId bob_basis = BasisId::E;
    int bob_index = 1;
    bool conclusive = false;
    std::optional<int> bob_bit;
    bool flipped_by_detection = false;
};

/// The raw keys both parties hold after sifting, aligned by round.
struct SiftedKeyPair {
    std::vector<int> alice_key;
    std::vector<int> bob_key;
};

namespace detail {
inline void check_index(int index, int dimension, const char* what) {
    if (index < 1 || index > dimension) {
        throw std::out_of_range(std::string(what) + " " + std::to_string(index) +
                                " outside 1.." + std::to_string(dimension));
    }
}
inline void check_bit(int bit) {
    if (bit != 0 && bit != 1) {
        throw std::invalid_argument("bit must be 0 or 1 (got " + std::to_string(bit) + ")");
    }
}
} // namespace detail

/// Alice's state preparation: bit 0 encodes as |e_index>, bit 1 as |f_index>.
inline StateVector alice_prepare(int bit, int index, const BasisSet& bases) {
    detail::check_bit(bit);
    detail::check_index(index, bases.dimension(), "alice_prepare: index");
    return bit == 0 ? bases.e_state(index) : bases.f_state(index);
}

/// Bob's interpretation of one round after the index announcement.
///
/// An outcome equal to the announced index is inconclusive and discarded.
/// Otherwise the outcome rules out the announced state of Bob's own basis, so
/// the bit is decided by that basis alone: an e-basis outcome means the state
/// was |f_announced> (bit 1), an f-basis outcome means |e_announced> (bit 0).
inline std::optional<int> kmb09_decode(int announced_index, BasisId bob_basis,
                                       int outcome_index, int dimension) {
    detail::check_index(announced_index, dimension, "kmb09_decode: announced_index");
    detail::check_index(outcome_index, dimension, "kmb09_decode: outcome_index");
    if (outcome_index == announced_index) return std::nullopt;
    return bob_basis == BasisId::E ? 1 : 0;
}

/// Keeps exactly the conclusive rounds, pairing Alice's transmitted bits with
/// Bob's decoded bits in round order.
inline SiftedKeyPair sift(std::span<const PulseRecord> records, std::span<const int> alice_bits) {
    if (records.size() != alice_bits.size()) {
        throw std::invalid_argument("sift: " + std::to_string(records.size()) +
                                    " records but " + std::to_string(alice_bits.size()) +
                                    " alice bits");
    }
    SiftedKeyPair keys;
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (!records[k].conclusive) continue;
        if (!records[k].bob_bit.has_value()) {
            throw std::invalid_argument("sift: conclusive record without a decoded bit");
        }
        keys.alice_key.push_back(alice_bits[k]);
        keys.bob_key.push_back(*records[k].bob_bit);
    }
    return keys;
}

/// BB84 baseline round (dimension 2 only). Rounds with mismatched bases are
/// discarded; otherwise the decoded bit is the measured outcome's bit label
/// (outcome 1 -> 0, outcome 2 -> 1).
inline std::optional<int> bb84_round(int bit, BasisId alice_basis, BasisId bob_basis,
                                     int channel_state_outcome) {
    detail::check_bit(bit);
    detail::check_index(channel_state_outcome, 2, "bb84_round: outcome");
    if (alice_basis != bob_basis) return std::nullopt;
    return channel_state_outcome - 1;
}

} // namespace qkd
