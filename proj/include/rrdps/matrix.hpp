#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrdps/channel.hpp"
#include "rrdps/modes.hpp"

namespace rrdps {

// One (state, measurement pair) entry with both port probabilities.
struct MatrixCell {
    std::string state;  // canonical pattern, e.g. "0101"
    ModePair pair;
    double p_plus = 0.0;
    double p_minus = 0.0;
};

// Detection probabilities over canonical states (rows) and measurement
// pairs (columns). Full tables store dense row-major vectors; sampled
// tables keep an explicit cell list instead. Either way cell(k) gives a
// uniform view.
struct DetectionMatrix {
    int L = 0;
    std::string channel;       // canonical descriptor of the source channel
    std::uint64_t seed = 0;
    std::uint32_t draws = 0;   // averaging draws per cell (1 = exact)
    bool sampled = false;

    // full layout: rows x columns, both probs row-major
    std::vector<std::string> states;
    std::vector<ModePair> pairs;
    std::vector<double> p_plus;
    std::vector<double> p_minus;

    // sampled layout
    std::vector<MatrixCell> cells;

    std::size_t cell_count() const;
    MatrixCell cell(std::size_t k) const;
};

// Number of (state, pair) cells 2^(L-1) * L (L-1) / 2. Throws
// std::overflow_error once the count no longer fits in 64 bits.
std::uint64_t total_cell_count(int L);

// true when n randomly chosen distinct cells exist, i.e. n does not
// exceed the (possibly > 2^64) total cell count
bool sample_count_feasible(int L, std::uint64_t n);

// Full table over every canonical state and pair. Random channels are
// averaged over `draws` applications; deterministic ones use a single
// exact application. Guarded to L <= 12; beyond that use sample_matrix.
DetectionMatrix build_matrix(int L, const ChannelSpec& spec,
                             std::uint64_t seed = 0, std::uint32_t draws = 1000);

// n distinct (state, pair) cells chosen uniformly without replacement.
DetectionMatrix sample_matrix(int L, std::uint64_t n, const ChannelSpec& spec,
                              std::uint64_t seed = 0,
                              std::uint32_t draws = 1000);

// Predicted sifted-bit error rate: sum over cells of the wrong-port
// probability divided by the summed click probability, where the wrong
// port is the branch disagreeing with the state's pair parity.
// nullopt when the total click probability is zero.
std::optional<double> qber_from_matrix(const DetectionMatrix& m);

// Line-oriented text format, 12 significant digits, byte-deterministic.
void write_matrix(const DetectionMatrix& m, std::ostream& out);
void write_matrix_file(const DetectionMatrix& m, const std::string& path);
DetectionMatrix read_matrix(std::istream& in);
DetectionMatrix read_matrix_file(const std::string& path);

}  // namespace rrdps
