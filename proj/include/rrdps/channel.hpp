#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rrdps/modes.hpp"
#include "rrdps/rng.hpp"

namespace rrdps {

struct DetectionMatrix;

enum class ChannelKind {
    identity,
    dephasing,
    crosstalk,
    mode_phase,
    aperture,
    white_noise,
    empirical,
};

// Plain description of a channel; validated when a Channel is built
// from it. Only the fields for the selected kind are meaningful.
struct ChannelSpec {
    ChannelKind kind = ChannelKind::identity;

    double sigma = 0.0;    // dephasing: std-dev of the per-mode phase (rad)
    double epsilon = 0.0;  // crosstalk: coupling strength in [0, 1]

    // mode_phase: theta(l) = quad * l^2 + lin * l + offsets[l]
    std::map<int, double> offsets;
    double quad = 0.0;
    double lin = 0.0;

    int l_max = 0;        // aperture: largest |l| that survives
    double floor = 0.0;   // aperture: residual background click probability

    double p = 0.0;       // white_noise: replacement probability

    // empirical: lookup table of per-(state, pair) click probabilities
    std::shared_ptr<const DetectionMatrix> table;
    std::string table_path;  // where the table came from, for descriptors
};

// Canonical one-line text form, e.g. "dephasing:sigma=0.3". Parsing a
// descriptor and printing it back is the identity on canonical text.
std::string channel_descriptor(const ChannelSpec& spec);
ChannelSpec parse_channel_spec(const std::string& text);

// mode_phase channel that exactly cancels the given accumulated phases
ChannelSpec gouy_compensation(const std::map<int, double>& theta);

struct ApplyResult {
    StateVector state;
    double survival = 1.0;  // probability the photon is still present
};

// A channel bound to one index set. Construction does all validation
// and any one-time precomputation (the crosstalk unitary in particular),
// so apply() stays cheap inside simulation loops.
class Channel {
public:
    Channel(ChannelSpec spec, ModeIndexSet idx);

    const ChannelSpec& spec() const { return spec_; }
    const ModeIndexSet& index_set() const { return idx_; }

    // true when apply() never consumes randomness
    bool deterministic() const;

    // aperture floor folded into detection as an extra background source
    double background_floor() const;

    bool is_empirical() const { return spec_.kind == ChannelKind::empirical; }

    // Empirical channels do not transform states; detection reads the
    // stored (P+, P-) for this state pattern and pair instead.
    std::pair<double, double> empirical_probs(const std::string& state_bits,
                                              const ModePair& pair) const;

    // Input must be unit norm unless flagged sub-normalized. The result
    // state is unit norm again except for the total-loss case, where it
    // is empty and flagged.
    ApplyResult apply(const StateVector& psi, RoundRng& rng) const;

private:
    ChannelSpec spec_;
    ModeIndexSet idx_;

    // crosstalk: dense unitary over the coupled chain, row-major
    std::vector<int> chain_labels_;
    std::vector<Complex> unitary_;

    // empirical: row index by canonical pattern, column index by pair
    std::unordered_map<std::string, std::size_t> row_of_;
    std::map<std::pair<int, int>, std::size_t> col_of_;

    void build_crosstalk_unitary();
    void index_table();
};

}  // namespace rrdps
