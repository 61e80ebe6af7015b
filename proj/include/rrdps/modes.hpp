#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rrdps {

using Complex = std::complex<double>;

// The L orbital-angular-momentum labels available at dimension L.
// Even L: {-L/2, ..., -1, 1, ..., L/2} (zero excluded).
// Odd L:  {-(L-1)/2, ..., (L-1)/2}.
// Labels are kept ascending; "slot" k means position k in that order.
class ModeIndexSet {
public:
    explicit ModeIndexSet(int L);

    int L() const { return L_; }
    const std::vector<int>& labels() const { return labels_; }
    int label_at(int slot) const;
    int slot_of(int label) const;  // throws std::out_of_range if absent
    bool contains(int label) const;
    int max_abs_label() const { return max_abs_; }

private:
    int L_;
    std::vector<int> labels_;
    int max_abs_;
};

// Alice's L phase bits; bits[k] belongs to the label in slot k.
// Patterns differing by a global flip encode the same physical state,
// so the canonical representative has bits[0] == 0.
struct PhasePattern {
    std::vector<std::uint8_t> bits;

    bool canonical() const { return !bits.empty() && bits[0] == 0; }
    PhasePattern canonicalized() const;
    std::string to_string() const;  // e.g. "0101"
};

PhasePattern pattern_from_string(const std::string& text);

// Canonical pattern number v in [0, 2^(L-1)): bits[0] = 0 and the
// remaining L-1 bits are v, most significant bit first in slot 1.
PhasePattern pattern_from_ordinal(std::uint64_t v, int L);
std::uint64_t pattern_ordinal(const PhasePattern& s);

std::uint64_t canonical_state_count(int L);  // 2^(L-1)

// Sparse state over integer OAM labels, terms sorted by label, zero
// amplitudes dropped. A state may be marked sub-normalized after a
// lossy channel; everything else expects unit norm.
class StateVector {
public:
    StateVector() = default;
    static StateVector from_terms(std::vector<std::pair<int, Complex>> terms);

    const std::vector<std::pair<int, Complex>>& terms() const { return terms_; }
    Complex amplitude(int label) const;  // 0 when the label is absent
    double norm_sq() const;
    int max_abs_label() const;  // 0 for the empty state
    void scale(Complex c);

    // in-place amplitude map a -> f(label, a); labels never change
    template <typename F>
    void map_amplitudes(F f) {
        for (auto& [label, amp] : terms_)
            amp = f(label, amp);
    }

    bool sub_normalized() const { return sub_normalized_; }
    void mark_sub_normalized() { sub_normalized_ = true; }

private:
    std::vector<std::pair<int, Complex>> terms_;
    bool sub_normalized_ = false;
};

// <bra|ket>; the bra side is conjugated
Complex inner(const StateVector& bra, const StateVector& ket);

enum class Sign : std::uint8_t { plus, minus };

// Unordered label pair {m, m_minus_r} with m the larger label. The
// shift r = m - m_minus_r is what Bob's interferometer resolves.
struct ModePair {
    int m = 0;
    int m_minus_r = 0;

    int shift() const { return m - m_minus_r; }
    bool operator==(const ModePair& o) const = default;
};

// Bob's measurement choice: which pair to interfere and which output
// port (relative sign) the projector represents.
struct ProjectorSetting {
    ModePair pair;
    Sign sign = Sign::plus;
};

// throws std::invalid_argument unless both labels are distinct members
// of the index set
void validate_pair(const ModePair& pair, const ModeIndexSet& idx);

// All L(L-1)/2 unordered pairs, ordered lexicographically by slot
// position of (smaller label, larger label).
std::vector<ModePair> all_mode_pairs(const ModeIndexSet& idx);

// |psi(s)> = 2^(-1/2 L) sum_l (-1)^(s_l) |l>
StateVector prepare_state(const PhasePattern& s, const ModeIndexSet& idx);

// (|m> + sigma |m-r>) / sqrt(2), sigma = +1 or -1
StateVector make_projector(const ProjectorSetting& setting, const ModeIndexSet& idx);

// |<proj|psi>|^2; requires unit-norm projector and unit-norm psi
// unless psi is flagged sub-normalized
double detection_probability(const StateVector& psi, const StateVector& proj);

// Click probabilities (P+, P-) for both ports of one pair.
// P+- = |a_m +- a_{m-r}|^2 / 2. Requires psi normalized or flagged.
std::pair<double, double> branch_probabilities(const StateVector& psi,
                                               const ModePair& pair);

// s_m XOR s_{m-r}: the bit Alice keeps for this pair
int pair_parity(const PhasePattern& s, const ModePair& pair,
                const ModeIndexSet& idx);

// The interferometer's combined angular transmission as one element:
// t(phi) = exp(-i m phi)(1 + sigma exp(i r phi)) / sqrt(2), r = m - m_minus_r.
// Labels are taken as given; only m != m_minus_r is required.
std::function<Complex(double)> transmission_function(
    const ProjectorSetting& setting);

// Uniform azimuthal grid phi_j = 2 pi j / n, j = 0..n-1. Trapezoid
// quadrature on it integrates exp(i k phi) exactly for |k| < n, so
// n >= 4 * max|label| + 4 keeps every integrand below the alias limit.
struct AzimuthalGrid {
    int n = 1024;
};

// |1/(2 pi) integral t(phi) psi(phi) dphi|^2 with the interferometer's
// angular transmission t(phi) = exp(-i m phi)(1 + sigma exp(i r phi))/sqrt(2).
// Equals detection_probability for the same setting up to quadrature error.
double azimuthal_overlap(const StateVector& psi, const ProjectorSetting& setting,
                         const AzimuthalGrid& grid);

// arg(psi(phi)) sampled on the grid: the phase profile a plate would
// imprint on a flat reference beam to produce |psi(s)>. Samples where
// |psi(phi)| < 1e-12 report phase 0 by convention.
std::vector<double> generation_phase_profile(const PhasePattern& s,
                                             const ModeIndexSet& idx,
                                             const AzimuthalGrid& grid);

}  // namespace rrdps
