#include "rrdps/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "rrdps/format.hpp"
#include "rrdps/matrix.hpp"

namespace rrdps {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

// "key=value"; the value may itself contain '=' (file paths)
std::pair<std::string, std::string> split_kv(const std::string& part) {
    const std::size_t pos = part.find('=');
    if (pos == std::string::npos)
        throw std::invalid_argument("channel parameter '" + part +
                                    "' is not key=value");
    return {part.substr(0, pos), part.substr(pos + 1)};
}

std::map<int, double> parse_theta(const std::string& text) {
    std::map<int, double> theta;
    for (const std::string& entry : split(text, ';')) {
        const std::size_t pos = entry.find(':');
        if (pos == std::string::npos)
            throw std::invalid_argument("theta entry '" + entry +
                                        "' is not label:phase");
        const int label = static_cast<int>(parse_int(entry.substr(0, pos)));
        if (!theta.emplace(label, parse_double(entry.substr(pos + 1))).second)
            throw std::invalid_argument("theta lists label " +
                                        std::to_string(label) + " twice");
    }
    return theta;
}

std::string theta_text(const std::map<int, double>& theta) {
    std::string out;
    for (const auto& [label, value] : theta) {
        if (!out.empty())
            out.push_back(';');
        out += std::to_string(label) + ":" + format_g12(value);
    }
    return out;
}

}  // namespace

std::string channel_descriptor(const ChannelSpec& spec) {
    switch (spec.kind) {
        case ChannelKind::identity:
            return "identity";
        case ChannelKind::dephasing:
            return "dephasing:sigma=" + format_g12(spec.sigma);
        case ChannelKind::crosstalk:
            return "crosstalk:epsilon=" + format_g12(spec.epsilon);
        case ChannelKind::mode_phase: {
            std::vector<std::string> parts;
            if (spec.quad != 0.0)
                parts.push_back("quad=" + format_g12(spec.quad));
            if (spec.lin != 0.0)
                parts.push_back("lin=" + format_g12(spec.lin));
            if (!spec.offsets.empty())
                parts.push_back("theta=" + theta_text(spec.offsets));
            if (parts.empty())
                parts.push_back("quad=0");
            std::string out = "mode_phase:";
            for (std::size_t i = 0; i < parts.size(); ++i)
                out += (i ? "," : "") + parts[i];
            return out;
        }
        case ChannelKind::aperture:
            return "aperture:lmax=" + std::to_string(spec.l_max) +
                   ",floor=" + format_g12(spec.floor);
        case ChannelKind::white_noise:
            return "white_noise:p=" + format_g12(spec.p);
        case ChannelKind::empirical:
            return "empirical:path=" + spec.table_path;
    }
    throw std::logic_error("channel_descriptor: unhandled kind");
}

ChannelSpec parse_channel_spec(const std::string& text) {
    const std::size_t colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string params =
        colon == std::string::npos ? std::string{} : text.substr(colon + 1);

    ChannelSpec spec;
    if (kind == "identity") {
        if (!params.empty())
            throw std::invalid_argument("identity takes no parameters");
        return spec;
    }

    if (kind == "empirical") {
        spec.kind = ChannelKind::empirical;
        // the path may contain commas, so take the parameter verbatim
        const auto [key, value] = split_kv(params);
        if (key != "path")
            throw std::invalid_argument("unknown empirical parameter '" + key +
                                        "'");
        if (value.empty())
            throw std::invalid_argument("empirical needs a non-empty path");
        spec.table_path = value;
        return spec;
    }

    std::map<std::string, std::string> kv;
    if (!params.empty()) {
        for (const std::string& part : split(params, ',')) {
            const auto [key, value] = split_kv(part);
            if (!kv.emplace(key, value).second)
                throw std::invalid_argument("channel parameter '" + key +
                                            "' given twice");
        }
    }
    auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        std::string value = it->second;
        kv.erase(it);
        return value;
    };
    auto finish = [&kv, &kind]() {
        if (!kv.empty())
            throw std::invalid_argument("unknown " + kind + " parameter '" +
                                        kv.begin()->first + "'");
    };

    if (kind == "dephasing") {
        spec.kind = ChannelKind::dephasing;
        const auto sigma = take("sigma");
        if (!sigma)
            throw std::invalid_argument("dephasing needs sigma=");
        spec.sigma = parse_double(*sigma);
    } else if (kind == "crosstalk") {
        spec.kind = ChannelKind::crosstalk;
        const auto epsilon = take("epsilon");
        if (!epsilon)
            throw std::invalid_argument("crosstalk needs epsilon=");
        spec.epsilon = parse_double(*epsilon);
    } else if (kind == "mode_phase") {
        spec.kind = ChannelKind::mode_phase;
        if (const auto quad = take("quad"))
            spec.quad = parse_double(*quad);
        if (const auto lin = take("lin"))
            spec.lin = parse_double(*lin);
        if (const auto theta = take("theta"))
            spec.offsets = parse_theta(*theta);
    } else if (kind == "aperture") {
        spec.kind = ChannelKind::aperture;
        const auto lmax = take("lmax");
        if (!lmax)
            throw std::invalid_argument("aperture needs lmax=");
        spec.l_max = static_cast<int>(parse_int(*lmax));
        if (const auto floor = take("floor"))
            spec.floor = parse_double(*floor);
    } else if (kind == "white_noise") {
        spec.kind = ChannelKind::white_noise;
        const auto p = take("p");
        if (!p)
            throw std::invalid_argument("white_noise needs p=");
        spec.p = parse_double(*p);
    } else {
        throw std::invalid_argument("unknown channel model '" + kind + "'");
    }
    finish();
    return spec;
}

ChannelSpec gouy_compensation(const std::map<int, double>& theta) {
    ChannelSpec spec;
    spec.kind = ChannelKind::mode_phase;
    for (const auto& [label, value] : theta)
        spec.offsets[label] = -value;
    return spec;
}

Channel::Channel(ChannelSpec spec, ModeIndexSet idx)
    : spec_(std::move(spec)), idx_(std::move(idx)) {
    auto require_unit_interval = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string("Channel: ") + name +
                                        " outside [0, 1]");
    };
    switch (spec_.kind) {
        case ChannelKind::identity:
            break;
        case ChannelKind::dephasing:
            if (!(spec_.sigma >= 0.0) || !std::isfinite(spec_.sigma))
                throw std::invalid_argument(
                    "Channel: sigma must be finite and non-negative");
            break;
        case ChannelKind::crosstalk:
            require_unit_interval(spec_.epsilon, "epsilon");
            build_crosstalk_unitary();
            break;
        case ChannelKind::mode_phase:
            for (const auto& [label, value] : spec_.offsets) {
                if (!idx_.contains(label))
                    throw std::invalid_argument(
                        "Channel: phase offset for label " +
                        std::to_string(label) + " outside the index set");
                if (!std::isfinite(value))
                    throw std::invalid_argument(
                        "Channel: phase offset must be finite");
            }
            break;
        case ChannelKind::aperture:
            if (spec_.l_max < 0)
                throw std::invalid_argument("Channel: lmax must be >= 0");
            require_unit_interval(spec_.floor, "floor");
            break;
        case ChannelKind::white_noise:
            require_unit_interval(spec_.p, "p");
            break;
        case ChannelKind::empirical:
            if (!spec_.table)
                throw std::invalid_argument(
                    "Channel: empirical spec carries no table");
            index_table();
            break;
    }
}

bool Channel::deterministic() const {
    // parameter-zero variants still consume draws, so the split is by kind
    return spec_.kind != ChannelKind::dephasing &&
           spec_.kind != ChannelKind::white_noise;
}

double Channel::background_floor() const {
    return spec_.kind == ChannelKind::aperture ? spec_.floor : 0.0;
}

void Channel::build_crosstalk_unitary() {
    // Nearest-neighbor hopping along the slot ladder (adjacent slots
    // couple even across the missing l=0 for even L), extended by two
    // guard slots on each side so leakage has somewhere to go. H is the
    // path-graph adjacency; its eigensystem is the discrete sine basis,
    // which gives U = exp(i epsilon H) in closed form.
    const int lo = idx_.labels().front();
    const int hi = idx_.labels().back();
    chain_labels_.clear();
    chain_labels_.reserve(idx_.L() + 4);
    chain_labels_.push_back(lo - 2);
    chain_labels_.push_back(lo - 1);
    chain_labels_.insert(chain_labels_.end(), idx_.labels().begin(),
                         idx_.labels().end());
    chain_labels_.push_back(hi + 1);
    chain_labels_.push_back(hi + 2);
    const int n = static_cast<int>(chain_labels_.size());

    std::vector<double> basis(static_cast<std::size_t>(n) * n);
    const double norm = std::sqrt(2.0 / (n + 1));
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j)
            basis[static_cast<std::size_t>(k - 1) * n + (j - 1)] =
                norm * std::sin(j * k * std::numbers::pi / (n + 1));

    unitary_.assign(static_cast<std::size_t>(n) * n, Complex{});
    for (int k = 1; k <= n; ++k) {
        const double lambda = 2.0 * std::cos(k * std::numbers::pi / (n + 1));
        const Complex phase = std::polar(1.0, spec_.epsilon * lambda);
        const double* v = &basis[static_cast<std::size_t>(k - 1) * n];
        for (int a = 0; a < n; ++a) {
            const Complex va = phase * v[a];
            for (int b = 0; b < n; ++b)
                unitary_[static_cast<std::size_t>(a) * n + b] += va * v[b];
        }
    }
}

void Channel::index_table() {
    const DetectionMatrix& m = *spec_.table;
    if (m.L != idx_.L())
        throw std::invalid_argument(
            "Channel: table dimension does not match L");
    if (m.sampled)
        throw std::invalid_argument(
            "Channel: empirical lookup needs a full table, not a sample");
    for (std::size_t r = 0; r < m.states.size(); ++r)
        row_of_[m.states[r]] = r;
    for (std::size_t c = 0; c < m.pairs.size(); ++c)
        col_of_[{m.pairs[c].m, m.pairs[c].m_minus_r}] = c;
    if (row_of_.size() != canonical_state_count(idx_.L()) ||
        col_of_.size() != all_mode_pairs(idx_).size())
        throw std::invalid_argument(
            "Channel: empirical table does not cover every state and pair");
}

std::pair<double, double> Channel::empirical_probs(
    const std::string& state_bits, const ModePair& pair) const {
    if (!is_empirical())
        throw std::logic_error(
            "empirical_probs: channel carries no lookup table");
    // a pattern and its global flip are the same physical state
    const std::string key =
        pattern_from_string(state_bits).canonicalized().to_string();
    const auto row = row_of_.find(key);
    const auto col = col_of_.find({pair.m, pair.m_minus_r});
    if (row == row_of_.end() || col == col_of_.end())
        throw std::out_of_range("empirical_probs: cell not in table");
    const DetectionMatrix& m = *spec_.table;
    const std::size_t at = row->second * m.pairs.size() + col->second;
    return {m.p_plus[at], m.p_minus[at]};
}

ApplyResult Channel::apply(const StateVector& psi, RoundRng& rng) const {
    if (!psi.sub_normalized() && std::abs(psi.norm_sq() - 1.0) > 1e-9)
        throw std::invalid_argument("Channel::apply: state is not normalized");

    switch (spec_.kind) {
        case ChannelKind::identity:
        case ChannelKind::empirical:
            return {psi, 1.0};

        case ChannelKind::dephasing: {
            // one draw per occupied label, in ascending label order
            StateVector out = psi;
            out.map_amplitudes([&](int, Complex a) {
                return a * std::polar(1.0, rng.normal(spec_.sigma));
            });
            return {std::move(out), 1.0};
        }

        case ChannelKind::crosstalk: {
            if (spec_.epsilon == 0.0)
                return {psi, 1.0};
            const int n = static_cast<int>(chain_labels_.size());
            std::vector<Complex> x(n);
            std::vector<std::pair<int, Complex>> passthrough;
            for (const auto& [label, amp] : psi.terms()) {
                // chain_labels_ is sorted; labels off the ladder (l=0 for
                // even L, or far out of band) pass through untouched
                const auto it = std::lower_bound(chain_labels_.begin(),
                                                 chain_labels_.end(), label);
                if (it != chain_labels_.end() && *it == label)
                    x[it - chain_labels_.begin()] = amp;
                else
                    passthrough.emplace_back(label, amp);
            }
            std::vector<std::pair<int, Complex>> terms = std::move(passthrough);
            terms.reserve(terms.size() + n);
            for (int a = 0; a < n; ++a) {
                Complex acc{};
                const Complex* row = &unitary_[static_cast<std::size_t>(a) * n];
                for (int b = 0; b < n; ++b)
                    acc += row[b] * x[b];
                if (acc != Complex{})
                    terms.emplace_back(chain_labels_[a], acc);
            }
            StateVector out = StateVector::from_terms(std::move(terms));
            if (psi.sub_normalized())
                out.mark_sub_normalized();
            return {std::move(out), 1.0};
        }

        case ChannelKind::mode_phase: {
            StateVector out = psi;
            out.map_amplitudes([this](int label, Complex a) {
                double theta = spec_.quad * label * label + spec_.lin * label;
                if (auto it = spec_.offsets.find(label);
                    it != spec_.offsets.end())
                    theta += it->second;
                return a * std::polar(1.0, theta);
            });
            return {std::move(out), 1.0};
        }

        case ChannelKind::aperture: {
            std::vector<std::pair<int, Complex>> kept;
            double survival = 0.0;
            for (const auto& [label, amp] : psi.terms()) {
                if (std::abs(label) <= spec_.l_max) {
                    kept.emplace_back(label, amp);
                    survival += std::norm(amp);
                }
            }
            if (survival <= 0.0) {
                StateVector lost;
                lost.mark_sub_normalized();
                return {std::move(lost), 0.0};
            }
            StateVector out = StateVector::from_terms(std::move(kept));
            out.scale(1.0 / std::sqrt(survival));
            return {std::move(out), survival};
        }

        case ChannelKind::white_noise: {
            // the replacement label is only drawn when the replacement
            // fires, so draw counts are 1 or 2 per round
            if (!rng.bernoulli(spec_.p))
                return {psi, 1.0};
            const int slot = static_cast<int>(rng.below(idx_.L()));
            StateVector out =
                StateVector::from_terms({{idx_.label_at(slot), 1.0}});
            return {std::move(out), 1.0};
        }
    }
    throw std::logic_error("Channel::apply: unhandled kind");
}

}  // namespace rrdps
