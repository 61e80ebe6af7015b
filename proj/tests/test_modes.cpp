#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rrdps/modes.hpp"

using namespace rrdps;

namespace {

// every canonical pattern at dimension L
std::vector<PhasePattern> all_patterns(int L) {
    std::vector<PhasePattern> out;
    for (std::uint64_t v = 0; v < canonical_state_count(L); ++v)
        out.push_back(pattern_from_ordinal(v, L));
    return out;
}

}  // namespace

TEST_CASE("index set excludes zero for even L") {
    const ModeIndexSet idx(4);
    CHECK(idx.labels() == std::vector<int>{-2, -1, 1, 2});
    CHECK(idx.max_abs_label() == 2);
    CHECK_FALSE(idx.contains(0));
}

TEST_CASE("index set is symmetric around zero for odd L") {
    const ModeIndexSet idx(5);
    CHECK(idx.labels() == std::vector<int>{-2, -1, 0, 1, 2});
    CHECK(idx.contains(0));
}

TEST_CASE("smallest even index set") {
    const ModeIndexSet idx(2);
    CHECK(idx.labels() == std::vector<int>{-1, 1});
}

TEST_CASE("index set slot and label lookups invert each other") {
    for (int L = 2; L <= 9; ++L) {
        const ModeIndexSet idx(L);
        REQUIRE(static_cast<int>(idx.labels().size()) == L);
        for (int slot = 0; slot < L; ++slot) {
            CHECK(idx.slot_of(idx.label_at(slot)) == slot);
            if (slot > 0)
                CHECK(idx.label_at(slot - 1) < idx.label_at(slot));
        }
    }
    CHECK_THROWS_AS(ModeIndexSet(1), std::invalid_argument);
    CHECK_THROWS_AS(ModeIndexSet(4).slot_of(0), std::out_of_range);
}

TEST_CASE("pattern canonicalization flips every bit") {
    const PhasePattern s = pattern_from_string("1010");
    CHECK(s.canonicalized().to_string() == "0101");
    CHECK(pattern_from_string("0011").canonicalized().to_string() == "0011");
    CHECK_THROWS_AS(pattern_from_string("01x1"), std::invalid_argument);
    CHECK_THROWS_AS(pattern_from_string(""), std::invalid_argument);
}

TEST_CASE("pattern ordinals enumerate canonical patterns exactly once") {
    CHECK(canonical_state_count(4) == 8);
    CHECK(canonical_state_count(16) == 32768);
    CHECK(canonical_state_count(64) == (std::uint64_t{1} << 63));
    for (int L : {2, 3, 4, 6}) {
        for (std::uint64_t v = 0; v < canonical_state_count(L); ++v) {
            const PhasePattern s = pattern_from_ordinal(v, L);
            CHECK(s.canonical());
            CHECK(pattern_ordinal(s) == v);
        }
    }
    // non-canonical input maps onto its canonical twin
    CHECK(pattern_ordinal(pattern_from_string("1010")) ==
          pattern_ordinal(pattern_from_string("0101")));
    CHECK_THROWS_AS(pattern_from_ordinal(8, 4), std::invalid_argument);
}

TEST_CASE("state vector merges terms and drops zeros") {
    const StateVector v = StateVector::from_terms(
        {{2, {0.5, 0.0}}, {-1, {0.25, 0.0}}, {2, {-0.5, 0.0}}, {1, {1.0, 0.0}}});
    CHECK(v.amplitude(2) == Complex{0.0, 0.0});
    CHECK(v.amplitude(-1) == Complex{0.25, 0.0});
    CHECK(v.terms().size() == 2);
    CHECK(v.max_abs_label() == 1);
    CHECK(v.norm_sq() == doctest::Approx(0.25 * 0.25 + 1.0).epsilon(1e-15));
}

TEST_CASE("prepared states put (-1)^s / sqrt(L) on each label") {
    const ModeIndexSet idx4(4);
    const StateVector uniform = prepare_state(pattern_from_string("0000"), idx4);
    for (int label : idx4.labels())
        CHECK(uniform.amplitude(label).real() == doctest::Approx(0.5));

    const StateVector alt = prepare_state(pattern_from_string("0101"), idx4);
    CHECK(alt.amplitude(-2).real() == doctest::Approx(0.5));
    CHECK(alt.amplitude(-1).real() == doctest::Approx(-0.5));
    CHECK(alt.amplitude(1).real() == doctest::Approx(0.5));
    CHECK(alt.amplitude(2).real() == doctest::Approx(-0.5));

    const ModeIndexSet idx3(3);
    const StateVector s3 = prepare_state(pattern_from_string("001"), idx3);
    const double a = 1.0 / std::sqrt(3.0);
    CHECK(s3.amplitude(-1).real() == doctest::Approx(a));
    CHECK(s3.amplitude(0).real() == doctest::Approx(a));
    CHECK(s3.amplitude(1).real() == doctest::Approx(-a));

    CHECK_THROWS_AS(prepare_state(pattern_from_string("000"), idx4),
                    std::invalid_argument);
}

TEST_CASE("every prepared state has unit norm") {
    for (int L = 2; L <= 8; ++L) {
        const ModeIndexSet idx(L);
        for (const PhasePattern& s : all_patterns(L))
            CHECK(prepare_state(s, idx).norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("projectors weight both labels by 1/sqrt(2)") {
    const ModeIndexSet idx(4);
    const StateVector plus = make_projector({{2, 1}, Sign::plus}, idx);
    const double a = 1.0 / std::sqrt(2.0);
    CHECK(plus.amplitude(2).real() == doctest::Approx(a));
    CHECK(plus.amplitude(1).real() == doctest::Approx(a));

    const StateVector minus = make_projector({{2, 1}, Sign::minus}, idx);
    CHECK(minus.amplitude(2).real() == doctest::Approx(a));
    CHECK(minus.amplitude(1).real() == doctest::Approx(-a));

    // the pair may span the missing zero label
    const StateVector gap = make_projector({{1, -2}, Sign::plus}, idx);
    CHECK(gap.amplitude(1).real() == doctest::Approx(a));
    CHECK(gap.amplitude(-2).real() == doctest::Approx(a));

    CHECK_THROWS_AS(make_projector({{2, 2}, Sign::plus}, idx),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_projector({{3, 1}, Sign::plus}, idx),
                    std::invalid_argument);
}

TEST_CASE("projector normalization holds across dimensions") {
    for (int L = 2; L <= 8; ++L) {
        const ModeIndexSet idx(L);
        for (const ModePair& pair : all_mode_pairs(idx)) {
            for (Sign sign : {Sign::plus, Sign::minus})
                CHECK(make_projector({pair, sign}, idx).norm_sq() ==
                      doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("pair enumeration counts L(L-1)/2 and orders by slots") {
    CHECK(all_mode_pairs(ModeIndexSet(2)).size() == 1);
    CHECK(all_mode_pairs(ModeIndexSet(3)).size() == 3);
    CHECK(all_mode_pairs(ModeIndexSet(4)).size() == 6);
    CHECK(all_mode_pairs(ModeIndexSet(16)).size() == 120);

    const std::vector<ModePair> pairs = all_mode_pairs(ModeIndexSet(3));
    CHECK(pairs[0] == ModePair{0, -1});
    CHECK(pairs[1] == ModePair{1, -1});
    CHECK(pairs[2] == ModePair{1, 0});
    for (const ModePair& p : all_mode_pairs(ModeIndexSet(8))) {
        CHECK(p.m > p.m_minus_r);
        CHECK(p.shift() >= 1);
    }
}

TEST_CASE("detection probability matches the parity of the pair") {
    const ModeIndexSet idx(4);
    const StateVector even = prepare_state(pattern_from_string("0000"), idx);
    const StateVector proj_plus = make_projector({{2, 1}, Sign::plus}, idx);
    const StateVector proj_minus = make_projector({{2, 1}, Sign::minus}, idx);
    CHECK(detection_probability(even, proj_plus) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(detection_probability(even, proj_minus) == doctest::Approx(0.0).epsilon(1e-12));

    const StateVector odd = prepare_state(pattern_from_string("0101"), idx);
    CHECK(detection_probability(odd, proj_plus) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(detection_probability(odd, proj_minus) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("detection probability rejects unnormalized inputs") {
    const ModeIndexSet idx(4);
    const StateVector proj = make_projector({{2, 1}, Sign::plus}, idx);
    StateVector bad = StateVector::from_terms({{1, {0.5, 0.0}}});
    CHECK_THROWS_AS(detection_probability(bad, proj), std::invalid_argument);
    bad.mark_sub_normalized();
    CHECK(detection_probability(bad, proj) == doctest::Approx(0.125));
}

TEST_CASE("exactly one branch fires and it identifies the parity") {
    for (int L = 2; L <= 8; ++L) {
        const ModeIndexSet idx(L);
        const double expect = 2.0 / L;
        for (const PhasePattern& s : all_patterns(L)) {
            const StateVector psi = prepare_state(s, idx);
            for (const ModePair& pair : all_mode_pairs(idx)) {
                const auto [pp, pm] = branch_probabilities(psi, pair);
                // two-branch completeness
                CHECK(pp + pm == doctest::Approx(expect).epsilon(1e-12));
                const int parity = pair_parity(s, pair, idx);
                if (parity == 0) {
                    CHECK(pp == doctest::Approx(expect).epsilon(1e-12));
                    CHECK(pm == doctest::Approx(0.0).epsilon(1e-12));
                } else {
                    CHECK(pp == doctest::Approx(0.0).epsilon(1e-12));
                    CHECK(pm == doctest::Approx(expect).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("branch probabilities agree with explicit projectors") {
    const ModeIndexSet idx(5);
    for (const PhasePattern& s : all_patterns(5)) {
        const StateVector psi = prepare_state(s, idx);
        for (const ModePair& pair : all_mode_pairs(idx)) {
            const auto [pp, pm] = branch_probabilities(psi, pair);
            CHECK(pp == doctest::Approx(detection_probability(
                            psi, make_projector({pair, Sign::plus}, idx)))
                            .epsilon(1e-12));
            CHECK(pm == doctest::Approx(detection_probability(
                            psi, make_projector({pair, Sign::minus}, idx)))
                            .epsilon(1e-12));
        }
    }
}

TEST_CASE("flipping every bit is an invisible global phase") {
    for (int L = 2; L <= 6; ++L) {
        const ModeIndexSet idx(L);
        for (const PhasePattern& s : all_patterns(L)) {
            PhasePattern flipped;
            for (auto b : s.bits)
                flipped.bits.push_back(static_cast<std::uint8_t>(1 - b));
            const StateVector a = prepare_state(s, idx);
            const StateVector b = prepare_state(flipped, idx);
            for (const ModePair& pair : all_mode_pairs(idx)) {
                for (Sign sign : {Sign::plus, Sign::minus}) {
                    const StateVector proj = make_projector({pair, sign}, idx);
                    CHECK(detection_probability(a, proj) ==
                          doctest::Approx(detection_probability(b, proj))
                              .epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("transmission function at selected angles") {
    const auto t1 = transmission_function({{1, 0}, Sign::plus});
    CHECK(t1(0.0).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(t1(0.0).imag() == doctest::Approx(0.0).epsilon(1e-12));

    const auto t2 = transmission_function({{2, 1}, Sign::minus});
    const Complex at_pi = t2(std::numbers::pi);
    CHECK(at_pi.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(at_pi.imag() == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(transmission_function({{1, 1}, Sign::plus}),
                    std::invalid_argument);
}

TEST_CASE("quadrature overlap reproduces the analytic probability") {
    const ModeIndexSet idx(4);
    const StateVector psi = prepare_state(pattern_from_string("0000"), idx);
    // the coarsest grid the labels allow already integrates exactly
    CHECK(azimuthal_overlap(psi, {{2, 1}, Sign::plus}, {64}) ==
          doctest::Approx(0.5).epsilon(1e-9));

    const ModeIndexSet idx8(8);
    const StateVector u8 = prepare_state(pattern_from_string("00000000"), idx8);
    CHECK(azimuthal_overlap(u8, {{3, 2}, Sign::plus}, {1024}) ==
          doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("overlap vanishes for support disjoint from the pair") {
    const double a = 1.0 / std::sqrt(2.0);
    const StateVector psi =
        StateVector::from_terms({{-2, {a, 0.0}}, {-1, {a, 0.0}}});
    CHECK(azimuthal_overlap(psi, {{2, 1}, Sign::plus}, {1024}) <= 1e-12);
}

TEST_CASE("quadrature equals analytic probability across settings") {
    for (int L = 2; L <= 5; ++L) {
        const ModeIndexSet idx(L);
        for (const PhasePattern& s : all_patterns(L)) {
            const StateVector psi = prepare_state(s, idx);
            for (const ModePair& pair : all_mode_pairs(idx)) {
                for (Sign sign : {Sign::plus, Sign::minus}) {
                    const ProjectorSetting setting{pair, sign};
                    const double analytic = detection_probability(
                        psi, make_projector(setting, idx));
                    const double quad =
                        azimuthal_overlap(psi, setting, AzimuthalGrid{});
                    CHECK(std::abs(quad - analytic) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("undersampled grids are rejected") {
    const ModeIndexSet idx(8);
    const StateVector psi = prepare_state(pattern_from_string("00000000"), idx);
    // max |l| = 4 needs at least 20 samples
    CHECK_THROWS_AS(azimuthal_overlap(psi, {{4, 3}, Sign::plus}, {19}),
                    std::invalid_argument);
    CHECK_NOTHROW(azimuthal_overlap(psi, {{4, 3}, Sign::plus}, {20}));
}

TEST_CASE("phase profile of a two-mode state is binary") {
    const ModeIndexSet idx(2);
    const std::vector<double> profile =
        generation_phase_profile(pattern_from_string("00"), idx, {16});
    REQUIRE(profile.size() == 16);
    for (double v : profile) {
        const bool zero_or_pi = std::abs(v) < 1e-9 ||
                                std::abs(v - std::numbers::pi) < 1e-9 ||
                                std::abs(v + std::numbers::pi) < 1e-9;
        CHECK(zero_or_pi);
    }
}

TEST_CASE("phase profile starts at zero for the all-plus state") {
    const ModeIndexSet idx(3);
    const std::vector<double> profile =
        generation_phase_profile(pattern_from_string("000"), idx, {64});
    CHECK(profile[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pair parity is the XOR of the two slots") {
    const ModeIndexSet idx(4);
    const PhasePattern s = pattern_from_string("0101");
    CHECK(pair_parity(s, {2, 1}, idx) == 1);    // bits 1 and 0 -> labels 2, 1
    CHECK(pair_parity(s, {2, -1}, idx) == 0);   // bits 1 and 1
    CHECK(pair_parity(s, {1, -2}, idx) == 0);   // bits 0 and 0
}
