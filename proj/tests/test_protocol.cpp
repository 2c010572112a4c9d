#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <vector>

#include "qkd/protocol.hpp"

using qkd::BasisId;
using qkd::PulseRecord;

TEST_CASE("alice_prepare encodes bit 0 in the e basis and bit 1 in the f basis") {
    for (int n : {2, 3, 8}) {
        const qkd::BasisSet bases = qkd::build_bases(n);
        for (int i = 1; i <= n; ++i) {
            const qkd::StateVector zero = qkd::alice_prepare(0, i, bases);
            const qkd::StateVector one = qkd::alice_prepare(1, i, bases);
            for (int k = 0; k < n; ++k) {
                REQUIRE(zero[k] == bases.e_state(i)[k]);
                REQUIRE(one[k] == bases.f_state(i)[k]);
            }
        }
    }
    const qkd::BasisSet bases = qkd::build_bases(2);
    REQUIRE_THROWS_AS(qkd::alice_prepare(2, 1, bases), std::invalid_argument);
    REQUIRE_THROWS_AS(qkd::alice_prepare(0, 3, bases), std::out_of_range);
}

TEST_CASE("decode table: conclusive iff outcome differs from the announced index") {
    // Exhaustive over both bases, every announced index, and every outcome.
    for (int n = 2; n <= 8; ++n) {
        for (int announced = 1; announced <= n; ++announced) {
            for (BasisId basis : {BasisId::E, BasisId::F}) {
                for (int outcome = 1; outcome <= n; ++outcome) {
                    const std::optional<int> bit =
                        qkd::kmb09_decode(announced, basis, outcome, n);
                    if (outcome == announced) {
                        REQUIRE_FALSE(bit.has_value());
                    } else {
                        REQUIRE(bit.has_value());
                        REQUIRE(*bit == (basis == BasisId::E ? 1 : 0));
                    }
                }
            }
        }
    }
}

TEST_CASE("decode validates 1-based indices") {
    REQUIRE_THROWS_AS(qkd::kmb09_decode(0, BasisId::E, 1, 2), std::out_of_range);
    REQUIRE_THROWS_AS(qkd::kmb09_decode(1, BasisId::E, 3, 2), std::out_of_range);
    REQUIRE_THROWS_AS(qkd::kmb09_decode(5, BasisId::F, 1, 4), std::out_of_range);
}

TEST_CASE("the noiseless decode never mislabels the transmitted bit") {
    // When Bob receives the prepared state untouched, a conclusive outcome in
    // basis b implies the state was not basis-b's announced state, so the
    // decoded bit is correct by construction. Check the full table.
    for (int n : {2, 3, 5}) {
        for (int bit : {0, 1}) {
            for (int announced = 1; announced <= n; ++announced) {
                // A state prepared in basis e (bit 0) makes e-basis outcomes
                // deterministic: outcome == announced, always inconclusive.
                // Cross-basis outcomes are uniform but conclusive ones decode
                // to the complementary basis's bit, which matches.
                const BasisId same = bit == 0 ? BasisId::E : BasisId::F;
                const std::optional<int> same_basis =
                    qkd::kmb09_decode(announced, same, announced, n);
                REQUIRE_FALSE(same_basis.has_value());
                const BasisId cross = bit == 0 ? BasisId::F : BasisId::E;
                for (int outcome = 1; outcome <= n; ++outcome) {
                    if (outcome == announced) continue;
                    const std::optional<int> decoded =
                        qkd::kmb09_decode(announced, cross, outcome, n);
                    REQUIRE(decoded.has_value());
                    REQUIRE(*decoded == bit);
                }
            }
        }
    }
}

TEST_CASE("sift keeps conclusive rounds in order and pairs the keys") {
    std::vector<PulseRecord> records(5);
    std::vector<int> alice_bits = {1, 0, 1, 1, 0};
    for (std::size_t k = 0; k < records.size(); ++k) {
        records[k].round = static_cast<std::int64_t>(k + 1);
        records[k].alice_bit = alice_bits[k];
    }
    records[1].conclusive = true;
    records[1].bob_bit = 0;
    records[3].conclusive = true;
    records[3].bob_bit = 0;
    records[4].conclusive = true;
    records[4].bob_bit = 0;

    const qkd::SiftedKeyPair keys = qkd::sift(records, alice_bits);
    REQUIRE(keys.alice_key == std::vector<int>{0, 1, 0});
    REQUIRE(keys.bob_key == std::vector<int>{0, 0, 0});
}

TEST_CASE("sift rejects inconsistent inputs") {
    std::vector<PulseRecord> records(2);
    std::vector<int> bits = {0, 1, 0};
    REQUIRE_THROWS_AS(qkd::sift(records, bits), std::invalid_argument);

    records[0].conclusive = true;
    std::vector<int> two_bits = {0, 1};
    REQUIRE_THROWS_AS(qkd::sift(records, two_bits), std::invalid_argument);
}

TEST_CASE("bb84 rounds are conclusive exactly on matching bases") {
    REQUIRE_FALSE(qkd::bb84_round(0, BasisId::E, BasisId::F, 1).has_value());
    REQUIRE_FALSE(qkd::bb84_round(1, BasisId::F, BasisId::E, 2).has_value());
    REQUIRE(*qkd::bb84_round(0, BasisId::E, BasisId::E, 1) == 0);
    REQUIRE(*qkd::bb84_round(0, BasisId::E, BasisId::E, 2) == 1);
    REQUIRE(*qkd::bb84_round(1, BasisId::F, BasisId::F, 2) == 1);
    REQUIRE_THROWS_AS(qkd::bb84_round(0, BasisId::E, BasisId::E, 3), std::out_of_range);
    REQUIRE_THROWS_AS(qkd::bb84_round(7, BasisId::E, BasisId::E, 1), std::invalid_argument);
}
