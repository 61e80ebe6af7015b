#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrdps/channel.hpp"
#include "rrdps/modes.hpp"
#include "rrdps/rng.hpp"

namespace rrdps {

enum class Outcome : std::uint8_t {
    click_plus,
    click_minus,
    no_click,
    background_click,
};

struct RoundRecord {
    std::uint64_t round_id = 0;
    PhasePattern s;
    ModePair pair;
    Outcome outcome = Outcome::no_click;
    std::optional<int> alice_bit;
    std::optional<int> bob_bit;
    bool sifted = false;  // implies both bits present and a click outcome
};

struct SiftedKeyPair {
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;  // always the same length
    std::optional<double> qber;         // nullopt when no bits were sifted
};

struct SessionConfig {
    int L = 4;
    std::uint64_t rounds = 10000;
    ChannelSpec channel;
    double p_bg = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct SessionSummary {
    std::uint64_t clicks = 0;      // signal and background together
    std::uint64_t background = 0;
    std::uint64_t sifted = 0;
};

struct SessionResult {
    std::vector<RoundRecord> transcript;  // in round order
    SiftedKeyPair keys;
    SessionSummary summary;
};

// Uniform over the 2^(L-1) canonical patterns: bits[0] = 0, the rest
// i.i.d. fair. Consumes exactly L-1 draws.
PhasePattern alice_prepare(RoundRng& rng, int L);

// Uniform over the L(L-1)/2 unordered pairs. Consumes one draw.
ModePair bob_choose_setting(RoundRng& rng, const ModeIndexSet& idx);

// Click sampling given explicit port probabilities. Background clicks
// fire with probability p_bg conditional on no signal click, i.e.
// p_bg * (1 - p_plus - p_minus) overall.
Outcome detect_from_probs(double p_plus, double p_minus, double p_bg,
                          RoundRng& rng);

// Same, with P+- read off the survival-adjusted state.
Outcome detect(const StateVector& psi_out, const ModePair& pair,
               double survival, double p_bg, RoundRng& rng);

// Fills alice_bit, bob_bit and the sifted flag; requires a click
// outcome. Background clicks give Bob a fair coin bit; an independent
// fair coin models the 1/2 sifting efficiency.
RoundRecord sift(RoundRecord record, const ModeIndexSet& idx, RoundRng& rng);

// Deterministic given the seed: every round derives its own stream
// from (seed, round_id), so thread count and scheduling cannot change
// any output. QBER counts disagreements over sifted rounds only.
SessionResult run_session(const SessionConfig& cfg);

// "round=<id> s=<bits> m=<m> mr=<m-r> outcome=<plus|minus|background|none>
//  alice=<0|1|-> bob=<0|1|-> sifted=<0|1>"
std::string record_line(const RoundRecord& r);
void write_transcript(const std::vector<RoundRecord>& transcript,
                      std::ostream& out);

}  // namespace rrdps
