#include "rrdps/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rrdps {

namespace {

constexpr double kNormTol = 1e-9;

void require_usable_norm(const StateVector& psi, const char* where) {
    if (psi.sub_normalized())
        return;
    if (std::abs(psi.norm_sq() - 1.0) > kNormTol)
        throw std::invalid_argument(std::string(where) +
                                    ": state is not normalized");
}

}  // namespace

ModeIndexSet::ModeIndexSet(int L) : L_(L) {
    if (L < 2)
        throw std::invalid_argument("ModeIndexSet: L must be at least 2");
    labels_.reserve(L);
    if (L % 2 == 0) {
        for (int l = -L / 2; l <= L / 2; ++l)
            if (l != 0)
                labels_.push_back(l);
    } else {
        for (int l = -(L - 1) / 2; l <= (L - 1) / 2; ++l)
            labels_.push_back(l);
    }
    max_abs_ = std::max(std::abs(labels_.front()), std::abs(labels_.back()));
}

int ModeIndexSet::label_at(int slot) const {
    if (slot < 0 || slot >= L_)
        throw std::out_of_range("ModeIndexSet: slot out of range");
    return labels_[slot];
}

int ModeIndexSet::slot_of(int label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label)
        throw std::out_of_range("ModeIndexSet: label not in set");
    return static_cast<int>(it - labels_.begin());
}

bool ModeIndexSet::contains(int label) const {
    return std::binary_search(labels_.begin(), labels_.end(), label);
}

PhasePattern PhasePattern::canonicalized() const {
    if (bits.empty() || bits[0] == 0)
        return *this;
    PhasePattern flipped;
    flipped.bits.reserve(bits.size());
    for (auto b : bits)
        flipped.bits.push_back(static_cast<std::uint8_t>(1 - b));
    return flipped;
}

std::string PhasePattern::to_string() const {
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits)
        out.push_back(b ? '1' : '0');
    return out;
}

PhasePattern pattern_from_string(const std::string& text) {
    if (text.empty())
        throw std::invalid_argument("pattern_from_string: empty pattern");
    PhasePattern s;
    s.bits.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1')
            throw std::invalid_argument(
                "pattern_from_string: pattern must be over {0, 1}");
        s.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return s;
}

PhasePattern pattern_from_ordinal(std::uint64_t v, int L) {
    if (L < 2 || L > 64)
        throw std::invalid_argument("pattern_from_ordinal: L outside [2, 64]");
    if (L < 64 && v >= (std::uint64_t{1} << (L - 1)))
        throw std::invalid_argument("pattern_from_ordinal: ordinal too large");
    PhasePattern s;
    s.bits.assign(L, 0);
    for (int k = 1; k < L; ++k)
        s.bits[k] = static_cast<std::uint8_t>((v >> (L - 1 - k)) & 1u);
    return s;
}

std::uint64_t pattern_ordinal(const PhasePattern& s) {
    const PhasePattern c = s.canonicalized();
    const int L = static_cast<int>(c.bits.size());
    if (L < 2 || L > 64)
        throw std::invalid_argument("pattern_ordinal: length outside [2, 64]");
    std::uint64_t v = 0;
    for (int k = 1; k < L; ++k)
        v = (v << 1) | c.bits[k];
    return v;
}

std::uint64_t canonical_state_count(int L) {
    if (L < 2 || L > 64)
        throw std::invalid_argument("canonical_state_count: L outside [2, 64]");
    return std::uint64_t{1} << (L - 1);
}

StateVector StateVector::from_terms(std::vector<std::pair<int, Complex>> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    StateVector v;
    v.terms_.reserve(terms.size());
    for (const auto& [label, amp] : terms) {
        if (!v.terms_.empty() && v.terms_.back().first == label)
            v.terms_.back().second += amp;
        else
            v.terms_.emplace_back(label, amp);
    }
    std::erase_if(v.terms_, [](const auto& t) { return t.second == Complex{}; });
    return v;
}

Complex StateVector::amplitude(int label) const {
    auto it = std::lower_bound(
        terms_.begin(), terms_.end(), label,
        [](const auto& t, int l) { return t.first < l; });
    if (it == terms_.end() || it->first != label)
        return {};
    return it->second;
}

double StateVector::norm_sq() const {
    double n = 0.0;
    for (const auto& [label, amp] : terms_)
        n += std::norm(amp);
    return n;
}

int StateVector::max_abs_label() const {
    if (terms_.empty())
        return 0;
    return std::max(std::abs(terms_.front().first),
                    std::abs(terms_.back().first));
}

void StateVector::scale(Complex c) {
    for (auto& [label, amp] : terms_)
        amp *= c;
}

Complex inner(const StateVector& bra, const StateVector& ket) {
    // both term lists are sorted by label; walk them together
    Complex acc{};
    auto b = bra.terms().begin();
    auto k = ket.terms().begin();
    while (b != bra.terms().end() && k != ket.terms().end()) {
        if (b->first < k->first) {
            ++b;
        } else if (k->first < b->first) {
            ++k;
        } else {
            acc += std::conj(b->second) * k->second;
            ++b;
            ++k;
        }
    }
    return acc;
}

void validate_pair(const ModePair& pair, const ModeIndexSet& idx) {
    if (pair.m == pair.m_minus_r)
        throw std::invalid_argument("validate_pair: labels must be distinct");
    if (pair.m < pair.m_minus_r)
        throw std::invalid_argument(
            "validate_pair: m must be the larger label of the pair");
    if (!idx.contains(pair.m) || !idx.contains(pair.m_minus_r))
        throw std::invalid_argument("validate_pair: label not in the index set");
}

std::vector<ModePair> all_mode_pairs(const ModeIndexSet& idx) {
    const int L = idx.L();
    std::vector<ModePair> pairs;
    pairs.reserve(static_cast<std::size_t>(L) * (L - 1) / 2);
    for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j)
            pairs.push_back({idx.label_at(j), idx.label_at(i)});
    return pairs;
}

StateVector prepare_state(const PhasePattern& s, const ModeIndexSet& idx) {
    if (static_cast<int>(s.bits.size()) != idx.L())
        throw std::invalid_argument(
            "prepare_state: pattern length must equal L");
    const double a = 1.0 / std::sqrt(static_cast<double>(idx.L()));
    std::vector<std::pair<int, Complex>> terms;
    terms.reserve(idx.L());
    for (int k = 0; k < idx.L(); ++k)
        terms.emplace_back(idx.label_at(k), s.bits[k] ? -a : a);
    return StateVector::from_terms(std::move(terms));
}

StateVector make_projector(const ProjectorSetting& setting,
                           const ModeIndexSet& idx) {
    validate_pair(setting.pair, idx);
    const double a = 1.0 / std::sqrt(2.0);
    const double sigma = setting.sign == Sign::plus ? 1.0 : -1.0;
    return StateVector::from_terms(
        {{setting.pair.m, a}, {setting.pair.m_minus_r, sigma * a}});
}

double detection_probability(const StateVector& psi, const StateVector& proj) {
    require_usable_norm(psi, "detection_probability");
    if (std::abs(proj.norm_sq() - 1.0) > kNormTol)
        throw std::invalid_argument(
            "detection_probability: projector is not normalized");
    return std::norm(inner(proj, psi));
}

std::pair<double, double> branch_probabilities(const StateVector& psi,
                                               const ModePair& pair) {
    require_usable_norm(psi, "branch_probabilities");
    if (pair.m == pair.m_minus_r)
        throw std::invalid_argument(
            "branch_probabilities: labels must be distinct");
    const Complex am = psi.amplitude(pair.m);
    const Complex ar = psi.amplitude(pair.m_minus_r);
    return {0.5 * std::norm(am + ar), 0.5 * std::norm(am - ar)};
}

int pair_parity(const PhasePattern& s, const ModePair& pair,
                const ModeIndexSet& idx) {
    validate_pair(pair, idx);
    if (static_cast<int>(s.bits.size()) != idx.L())
        throw std::invalid_argument("pair_parity: pattern length must equal L");
    return s.bits[idx.slot_of(pair.m)] ^ s.bits[idx.slot_of(pair.m_minus_r)];
}

namespace {

void require_grid(const AzimuthalGrid& grid, int max_abs, const char* where) {
    if (grid.n < 4 * max_abs + 4)
        throw std::invalid_argument(
            std::string(where) +
            ": azimuthal grid too coarse for the labels involved");
}

// psi(phi) = sum_l a_l exp(i l phi)
Complex angular_wavefunction(const StateVector& psi, double phi) {
    Complex acc{};
    for (const auto& [label, amp] : psi.terms())
        acc += amp * std::polar(1.0, label * phi);
    return acc;
}

}  // namespace

std::function<Complex(double)> transmission_function(
    const ProjectorSetting& setting) {
    if (setting.pair.m == setting.pair.m_minus_r)
        throw std::invalid_argument(
            "transmission_function: labels must be distinct");
    const int m = setting.pair.m;
    const int r = setting.pair.shift();
    const double sigma = setting.sign == Sign::plus ? 1.0 : -1.0;
    return [m, r, sigma](double phi) {
        return std::polar(1.0, -m * phi) *
               (1.0 + sigma * std::polar(1.0, r * phi)) / std::sqrt(2.0);
    };
}

double azimuthal_overlap(const StateVector& psi, const ProjectorSetting& setting,
                         const AzimuthalGrid& grid) {
    require_usable_norm(psi, "azimuthal_overlap");
    if (setting.pair.m == setting.pair.m_minus_r)
        throw std::invalid_argument("azimuthal_overlap: labels must be distinct");
    const int max_abs =
        std::max({psi.max_abs_label(), std::abs(setting.pair.m),
                  std::abs(setting.pair.m_minus_r)});
    require_grid(grid, max_abs, "azimuthal_overlap");
    const double sigma = setting.sign == Sign::plus ? 1.0 : -1.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // periodic trapezoid rule: (1/2pi) integral -> (1/n) sum over the grid,
    // exact because every Fourier component stays below the alias limit
    Complex acc{};
    for (int j = 0; j < grid.n; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / grid.n;
        const Complex t = std::polar(1.0, -setting.pair.m * phi) *
                          (1.0 + sigma * std::polar(1.0, setting.pair.shift() * phi)) *
                          inv_sqrt2;
        acc += t * angular_wavefunction(psi, phi);
    }
    acc /= static_cast<double>(grid.n);
    return std::norm(acc);
}

std::vector<double> generation_phase_profile(const PhasePattern& s,
                                             const ModeIndexSet& idx,
                                             const AzimuthalGrid& grid) {
    const StateVector psi = prepare_state(s, idx);
    require_grid(grid, psi.max_abs_label(), "generation_phase_profile");
    std::vector<double> profile;
    profile.reserve(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / grid.n;
        const Complex v = angular_wavefunction(psi, phi);
        // near-zeros of the superposition carry no meaningful phase
        profile.push_back(std::abs(v) < 1e-12 ? 0.0 : std::arg(v));
    }
    return profile;
}

}  // namespace rrdps
