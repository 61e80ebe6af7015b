#include "rrdps/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rrdps/format.hpp"

namespace rrdps {

namespace {

using u128 = unsigned __int128;

u128 total_cells_128(int L) {
    const u128 states = canonical_state_count(L);
    const u128 pairs =
        static_cast<std::uint64_t>(L) * static_cast<std::uint64_t>(L - 1) / 2;
    return states * pairs;
}

// Sampled cells draw their own stream so the result is independent of
// which other cells were chosen; full rows share one stream across all
// columns (every draw is reused for every column, which changes nothing
// about expectations but saves channel applications).
RoundRng cell_rng(std::uint64_t seed, std::uint64_t row, std::uint64_t col) {
    RoundRng base(seed, row);
    return {base.next_u64(), col};
}

// Average click probabilities of one prepared state, accumulated into
// plus/minus (one slot per pair). The channel's residual background
// floor is folded in per draw, split evenly between the ports.
void accumulate_state(const Channel& ch, const PhasePattern& s,
                      const std::vector<ModePair>& pairs, RoundRng& rng,
                      std::uint32_t draws, double* plus, double* minus) {
    const ModeIndexSet& idx = ch.index_set();
    if (ch.is_empirical()) {
        const std::string key = s.to_string();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto [pp, pm] = ch.empirical_probs(key, pairs[i]);
            plus[i] = pp;
            minus[i] = pm;
        }
        return;
    }
    const StateVector psi = prepare_state(s, idx);
    const std::uint32_t n = ch.deterministic() ? 1 : draws;
    const double floor = ch.background_floor();
    for (std::uint32_t d = 0; d < n; ++d) {
        const ApplyResult sent = ch.apply(psi, rng);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            auto [pp, pm] = branch_probabilities(sent.state, pairs[i]);
            pp *= sent.survival;
            pm *= sent.survival;
            const double bg =
                0.5 * floor * std::max(0.0, 1.0 - pp - pm);
            plus[i] += pp + bg;
            minus[i] += pm + bg;
        }
    }
    if (n > 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            plus[i] /= n;
            minus[i] /= n;
        }
    }
}

}  // namespace

std::size_t DetectionMatrix::cell_count() const {
    return sampled ? cells.size() : states.size() * pairs.size();
}

MatrixCell DetectionMatrix::cell(std::size_t k) const {
    if (k >= cell_count())
        throw std::out_of_range("DetectionMatrix: cell index out of range");
    if (sampled)
        return cells[k];
    const std::size_t nc = pairs.size();
    return {states[k / nc], pairs[k % nc], p_plus[k], p_minus[k]};
}

std::uint64_t total_cell_count(int L) {
    const u128 total = total_cells_128(L);
    if (total > std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error(
            "total_cell_count: count exceeds 64-bit range at L = " +
            std::to_string(L));
    return static_cast<std::uint64_t>(total);
}

bool sample_count_feasible(int L, std::uint64_t n) {
    return static_cast<u128>(n) <= total_cells_128(L);
}

DetectionMatrix build_matrix(int L, const ChannelSpec& spec, std::uint64_t seed,
                             std::uint32_t draws) {
    if (L > 12)
        throw std::invalid_argument(
            "build_matrix: full enumeration is limited to L <= 12; "
            "use sample_matrix for larger L");
    if (draws == 0)
        throw std::invalid_argument("build_matrix: draws must be >= 1");
    const ModeIndexSet idx(L);
    const Channel ch(spec, idx);

    DetectionMatrix m;
    m.L = L;
    m.channel = channel_descriptor(spec);
    m.seed = seed;
    m.draws = ch.deterministic() || ch.is_empirical() ? 1 : draws;
    m.sampled = false;
    m.pairs = all_mode_pairs(idx);

    const std::uint64_t n_states = canonical_state_count(L);
    const std::size_t n_pairs = m.pairs.size();
    m.states.reserve(n_states);
    m.p_plus.assign(n_states * n_pairs, 0.0);
    m.p_minus.assign(n_states * n_pairs, 0.0);
    for (std::uint64_t row = 0; row < n_states; ++row) {
        const PhasePattern s = pattern_from_ordinal(row, L);
        m.states.push_back(s.to_string());
        RoundRng rng(seed, row);
        accumulate_state(ch, s, m.pairs, rng, draws, &m.p_plus[row * n_pairs],
                         &m.p_minus[row * n_pairs]);
    }
    return m;
}

DetectionMatrix sample_matrix(int L, std::uint64_t n, const ChannelSpec& spec,
                              std::uint64_t seed, std::uint32_t draws) {
    if (n < 1)
        throw std::invalid_argument("sample_matrix: need n >= 1");
    if (draws == 0)
        throw std::invalid_argument("sample_matrix: draws must be >= 1");
    if (!sample_count_feasible(L, n))
        throw std::invalid_argument(
            "sample_matrix: n exceeds the number of (state, pair) cells");
    const ModeIndexSet idx(L);
    const Channel ch(spec, idx);
    const std::vector<ModePair> pairs = all_mode_pairs(idx);

    DetectionMatrix m;
    m.L = L;
    m.channel = channel_descriptor(spec);
    m.seed = seed;
    m.draws = ch.deterministic() || ch.is_empirical() ? 1 : draws;
    m.sampled = true;

    // rejection keeps the choice uniform without replacement; the set
    // also fixes the output order to row-major. The chooser counter sits
    // above every possible row counter so streams never coincide.
    RoundRng chooser(seed, ~std::uint64_t{0});
    std::set<std::pair<std::uint64_t, std::uint32_t>> chosen;
    while (chosen.size() < n)
        chosen.insert({chooser.below(canonical_state_count(L)),
                       static_cast<std::uint32_t>(chooser.below(pairs.size()))});

    m.cells.reserve(n);
    for (const auto& [row, col] : chosen) {
        const PhasePattern s = pattern_from_ordinal(row, L);
        MatrixCell cell{s.to_string(), pairs[col], 0.0, 0.0};
        RoundRng rng = cell_rng(seed, row, col);
        accumulate_state(ch, s, {pairs[col]}, rng, draws, &cell.p_plus,
                         &cell.p_minus);
        m.cells.push_back(std::move(cell));
    }
    return m;
}

std::optional<double> qber_from_matrix(const DetectionMatrix& m) {
    if (m.cell_count() == 0)
        throw std::invalid_argument("qber_from_matrix: matrix is empty");
    const ModeIndexSet idx(m.L);
    double wrong = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < m.cell_count(); ++k) {
        const MatrixCell c = m.cell(k);
        const PhasePattern s = pattern_from_string(c.state);
        const int parity = pair_parity(s, c.pair, idx);
        wrong += parity ? c.p_plus : c.p_minus;
        total += c.p_plus + c.p_minus;
    }
    if (total == 0.0)
        return std::nullopt;
    return wrong / total;
}

namespace {

constexpr const char* kMagic = "rrdps-matrix v1";

void check_probability(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string("matrix file: ") + what +
                                    " outside [0, 1]");
}

// next content line; comments and blank lines are skipped
bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        return true;
    }
    return false;
}

std::string expect_field(std::istream& in, const std::string& key) {
    std::string line;
    if (!next_line(in, line))
        throw std::invalid_argument("matrix file: truncated before '" + key +
                                    "'");
    if (line.rfind(key + " ", 0) != 0)
        throw std::invalid_argument("matrix file: expected '" + key +
                                    "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream stream(line);
    std::string token;
    while (stream >> token)
        tokens.push_back(token);
    return tokens;
}

}  // namespace

void write_matrix(const DetectionMatrix& m, std::ostream& out) {
    out << kMagic << '\n';
    out << "L " << m.L << '\n';
    out << "channel " << m.channel << '\n';
    out << "seed " << m.seed << '\n';
    out << "draws " << m.draws << '\n';
    out << "sampled " << (m.sampled ? 1 : 0) << '\n';
    if (m.sampled) {
        out << "n_samples " << m.cells.size() << '\n';
        for (const MatrixCell& c : m.cells)
            out << "cell " << c.state << ' ' << c.pair.m << ' '
                << c.pair.m_minus_r << ' ' << format_g12(c.p_plus) << ' '
                << format_g12(c.p_minus) << '\n';
        return;
    }
    out << "pairs " << m.pairs.size() << '\n';
    for (const ModePair& p : m.pairs)
        out << "pair " << p.m << ' ' << p.m_minus_r << '\n';
    out << "states " << m.states.size() << '\n';
    for (std::size_t r = 0; r < m.states.size(); ++r) {
        out << "row " << m.states[r];
        for (std::size_t c = 0; c < m.pairs.size(); ++c) {
            const std::size_t at = r * m.pairs.size() + c;
            out << ' ' << format_g12(m.p_plus[at]) << ' '
                << format_g12(m.p_minus[at]);
        }
        out << '\n';
    }
}

void write_matrix_file(const DetectionMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix(m, out);
    if (!out.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

DetectionMatrix read_matrix(std::istream& in) {
    std::string line;
    if (!next_line(in, line) || line != kMagic)
        throw std::invalid_argument(
            "matrix file: missing 'rrdps-matrix v1' header");
    DetectionMatrix m;
    m.L = static_cast<int>(parse_int(expect_field(in, "L")));
    const ModeIndexSet idx(m.L);
    m.channel = expect_field(in, "channel");
    m.seed = parse_uint(expect_field(in, "seed"));
    const long long draws = parse_int(expect_field(in, "draws"));
    if (draws < 1)
        throw std::invalid_argument("matrix file: draws must be >= 1");
    m.draws = static_cast<std::uint32_t>(draws);
    m.sampled = parse_int(expect_field(in, "sampled")) != 0;

    auto read_pair = [&idx](const std::string& m_text,
                            const std::string& r_text) {
        ModePair pair{static_cast<int>(parse_int(m_text)),
                      static_cast<int>(parse_int(r_text))};
        validate_pair(pair, idx);
        return pair;
    };
    auto read_state = [&m](const std::string& text) {
        const PhasePattern s = pattern_from_string(text);
        if (static_cast<int>(s.bits.size()) != m.L)
            throw std::invalid_argument("matrix file: state '" + text +
                                        "' does not have L bits");
        if (!s.canonical())
            throw std::invalid_argument("matrix file: state '" + text +
                                        "' is not canonical");
        return text;
    };

    if (m.sampled) {
        const long long n = parse_int(expect_field(in, "n_samples"));
        if (n < 1)
            throw std::invalid_argument("matrix file: n_samples must be >= 1");
        m.cells.reserve(static_cast<std::size_t>(n));
        for (long long k = 0; k < n; ++k) {
            const std::vector<std::string> tok =
                tokenize(expect_field(in, "cell"));
            if (tok.size() != 5)
                throw std::invalid_argument(
                    "matrix file: cell line needs 5 fields");
            MatrixCell cell{read_state(tok[0]), read_pair(tok[1], tok[2]),
                            parse_double(tok[3]), parse_double(tok[4])};
            check_probability(cell.p_plus, "cell probability");
            check_probability(cell.p_minus, "cell probability");
            if (cell.p_plus + cell.p_minus > 1.0 + 1e-9)
                throw std::invalid_argument(
                    "matrix file: cell probabilities sum beyond 1");
            m.cells.push_back(std::move(cell));
        }
        return m;
    }

    const long long n_pairs = parse_int(expect_field(in, "pairs"));
    if (n_pairs < 1)
        throw std::invalid_argument("matrix file: pairs must be >= 1");
    m.pairs.reserve(static_cast<std::size_t>(n_pairs));
    for (long long k = 0; k < n_pairs; ++k) {
        const std::vector<std::string> tok = tokenize(expect_field(in, "pair"));
        if (tok.size() != 2)
            throw std::invalid_argument("matrix file: pair line needs 2 fields");
        m.pairs.push_back(read_pair(tok[0], tok[1]));
    }
    const long long n_states = parse_int(expect_field(in, "states"));
    if (n_states < 1)
        throw std::invalid_argument("matrix file: states must be >= 1");
    m.states.reserve(static_cast<std::size_t>(n_states));
    m.p_plus.reserve(static_cast<std::size_t>(n_states * n_pairs));
    m.p_minus.reserve(static_cast<std::size_t>(n_states * n_pairs));
    for (long long r = 0; r < n_states; ++r) {
        const std::vector<std::string> tok = tokenize(expect_field(in, "row"));
        if (tok.size() != 1 + 2 * static_cast<std::size_t>(n_pairs))
            throw std::invalid_argument(
                "matrix file: row line has the wrong number of fields");
        m.states.push_back(read_state(tok[0]));
        for (long long c = 0; c < n_pairs; ++c) {
            const double pp = parse_double(tok[1 + 2 * c]);
            const double pm = parse_double(tok[2 + 2 * c]);
            check_probability(pp, "row probability");
            check_probability(pm, "row probability");
            if (pp + pm > 1.0 + 1e-9)
                throw std::invalid_argument(
                    "matrix file: row probabilities sum beyond 1");
            m.p_plus.push_back(pp);
            m.p_minus.push_back(pm);
        }
    }
    return m;
}

DetectionMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_matrix(in);
}

}  // namespace rrdps
