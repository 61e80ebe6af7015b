#include "rrdps/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace rrdps {

PhasePattern alice_prepare(RoundRng& rng, int L) {
    if (L < 2)
        throw std::invalid_argument("alice_prepare: L must be at least 2");
    PhasePattern s;
    s.bits.assign(L, 0);
    for (int k = 1; k < L; ++k)
        s.bits[k] = rng.bernoulli(0.5) ? 1 : 0;
    return s;
}

ModePair bob_choose_setting(RoundRng& rng, const ModeIndexSet& idx) {
    const int L = idx.L();
    std::uint64_t k = rng.below(static_cast<std::uint64_t>(L) * (L - 1) / 2);
    // walk the lexicographic (smaller slot, larger slot) enumeration
    for (int i = 0; i < L - 1; ++i) {
        const std::uint64_t in_row = static_cast<std::uint64_t>(L - 1 - i);
        if (k < in_row)
            return {idx.label_at(i + 1 + static_cast<int>(k)), idx.label_at(i)};
        k -= in_row;
    }
    throw std::logic_error("bob_choose_setting: enumeration out of bounds");
}

Outcome detect_from_probs(double p_plus, double p_minus, double p_bg,
                          RoundRng& rng) {
    // tolerate tiny negative round-off from upstream arithmetic
    p_plus = std::max(p_plus, 0.0);
    p_minus = std::max(p_minus, 0.0);
    if (p_plus + p_minus > 1.0 + 1e-9)
        throw std::invalid_argument(
            "detect: click probabilities sum beyond 1");
    if (!(p_bg >= 0.0 && p_bg <= 1.0))
        throw std::invalid_argument("detect: p_bg outside [0, 1]");
    const double u = rng.uniform();
    if (u < p_plus)
        return Outcome::click_plus;
    if (u < p_plus + p_minus)
        return Outcome::click_minus;
    return rng.bernoulli(p_bg) ? Outcome::background_click : Outcome::no_click;
}

Outcome detect(const StateVector& psi_out, const ModePair& pair,
               double survival, double p_bg, RoundRng& rng) {
    if (!(survival >= 0.0 && survival <= 1.0 + 1e-9))
        throw std::invalid_argument("detect: survival outside [0, 1]");
    const auto [pp, pm] = branch_probabilities(psi_out, pair);
    return detect_from_probs(pp * survival, pm * survival, p_bg, rng);
}

RoundRecord sift(RoundRecord record, const ModeIndexSet& idx, RoundRng& rng) {
    if (record.outcome == Outcome::no_click)
        throw std::invalid_argument("sift: round produced no click");
    record.alice_bit = pair_parity(record.s, record.pair, idx);
    if (record.outcome == Outcome::background_click)
        record.bob_bit = rng.bernoulli(0.5) ? 1 : 0;
    else
        record.bob_bit = record.outcome == Outcome::click_minus ? 1 : 0;
    // settings are in-band by construction, so only the efficiency coin
    // decides whether the round enters the key
    record.sifted = rng.bernoulli(0.5);
    return record;
}

SessionResult run_session(const SessionConfig& cfg) {
    if (cfg.rounds < 1)
        throw std::invalid_argument("run_session: need at least one round");
    if (!(cfg.p_bg >= 0.0 && cfg.p_bg <= 1.0))
        throw std::invalid_argument("run_session: p_bg outside [0, 1]");
    if (cfg.threads < 1)
        throw std::invalid_argument("run_session: need at least one thread");

    const ModeIndexSet idx(cfg.L);
    const Channel channel(cfg.channel, idx);
    // the aperture's residual background folds into one effective rate:
    // a round escapes both sources with (1 - p_bg)(1 - floor)
    const double p_eff =
        1.0 - (1.0 - cfg.p_bg) * (1.0 - channel.background_floor());

    SessionResult result;
    result.transcript.resize(cfg.rounds);

    auto run_round = [&](std::uint64_t i) {
        RoundRng rng(cfg.seed, i);
        RoundRecord rec;
        rec.round_id = i;
        rec.s = alice_prepare(rng, cfg.L);
        const StateVector psi = prepare_state(rec.s, idx);
        const ApplyResult sent = channel.apply(psi, rng);
        rec.pair = bob_choose_setting(rng, idx);
        if (channel.is_empirical()) {
            const auto [pp, pm] =
                channel.empirical_probs(rec.s.to_string(), rec.pair);
            rec.outcome = detect_from_probs(pp, pm, p_eff, rng);
        } else {
            rec.outcome = detect(sent.state, rec.pair, sent.survival, p_eff, rng);
        }
        if (rec.outcome != Outcome::no_click)
            rec = sift(std::move(rec), idx, rng);
        result.transcript[i] = std::move(rec);
    };

    const std::uint64_t n_threads = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(cfg.threads), cfg.rounds);
    if (n_threads <= 1) {
        for (std::uint64_t i = 0; i < cfg.rounds; ++i)
            run_round(i);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::uint64_t t = 0; t < n_threads; ++t) {
            workers.emplace_back([&, t] {
                // static contiguous partition; slots are disjoint
                const std::uint64_t lo = cfg.rounds * t / n_threads;
                const std::uint64_t hi = cfg.rounds * (t + 1) / n_threads;
                for (std::uint64_t i = lo; i < hi; ++i)
                    run_round(i);
            });
        }
        for (auto& w : workers)
            w.join();
    }

    std::uint64_t disagreements = 0;
    for (const RoundRecord& rec : result.transcript) {
        if (rec.outcome == Outcome::no_click)
            continue;
        ++result.summary.clicks;
        if (rec.outcome == Outcome::background_click)
            ++result.summary.background;
        if (!rec.sifted)
            continue;
        ++result.summary.sifted;
        result.keys.alice_key.push_back(
            static_cast<std::uint8_t>(*rec.alice_bit));
        result.keys.bob_key.push_back(static_cast<std::uint8_t>(*rec.bob_bit));
        if (*rec.alice_bit != *rec.bob_bit)
            ++disagreements;
    }
    if (!result.keys.alice_key.empty())
        result.keys.qber = static_cast<double>(disagreements) /
                           static_cast<double>(result.keys.alice_key.size());
    return result;
}

std::string record_line(const RoundRecord& r) {
    auto bit = [](const std::optional<int>& b) {
        return b ? std::to_string(*b) : std::string("-");
    };
    const char* outcome = "none";
    switch (r.outcome) {
        case Outcome::click_plus: outcome = "plus"; break;
        case Outcome::click_minus: outcome = "minus"; break;
        case Outcome::background_click: outcome = "background"; break;
        case Outcome::no_click: outcome = "none"; break;
    }
    return "round=" + std::to_string(r.round_id) + " s=" + r.s.to_string() +
           " m=" + std::to_string(r.pair.m) +
           " mr=" + std::to_string(r.pair.m_minus_r) + " outcome=" + outcome +
           " alice=" + bit(r.alice_bit) + " bob=" + bit(r.bob_bit) +
           " sifted=" + (r.sifted ? "1" : "0");
}

void write_transcript(const std::vector<RoundRecord>& transcript,
                      std::ostream& out) {
    for (const RoundRecord& r : transcript)
        out << record_line(r) << '\n';
}

}  // namespace rrdps
