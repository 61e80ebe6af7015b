#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rrdps/channel.hpp"
#include "rrdps/format.hpp"
#include "rrdps/keyrate.hpp"
#include "rrdps/matrix.hpp"
#include "rrdps/modes.hpp"
#include "rrdps/protocol.hpp"

using namespace rrdps;

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

// stdout and the optional --out copy carry identical bytes
void emit(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty())
        write_text_file(out_path, text);
}

ChannelSpec resolve_channel(const std::string& descriptor) {
    ChannelSpec spec = parse_channel_spec(descriptor);
    if (spec.kind == ChannelKind::empirical)
        spec.table = std::make_shared<const DetectionMatrix>(
            read_matrix_file(spec.table_path));
    return spec;
}

void require_L(int L) {
    if (L < 2)
        throw std::invalid_argument("--L must be at least 2");
}

int cmd_simulate(int L, std::uint64_t rounds, const std::string& channel,
                 double p_bg, std::uint64_t seed, int threads,
                 const std::string& out_path,
                 const std::string& transcript_path) {
    require_L(L);
    if (threads < 1)
        throw std::invalid_argument("--threads must be at least 1");
    SessionConfig cfg;
    cfg.L = L;
    cfg.rounds = rounds;
    cfg.channel = resolve_channel(channel);
    cfg.p_bg = p_bg;
    cfg.seed = seed;
    cfg.threads = threads;
    const SessionResult result = run_session(cfg);

    std::ostringstream text;
    text << "L " << L << '\n'
         << "rounds " << rounds << '\n'
         << "channel " << channel_descriptor(cfg.channel) << '\n'
         << "p_bg " << format_g12(p_bg) << '\n'
         << "seed " << seed << '\n'
         << "clicks " << result.summary.clicks << '\n'
         << "background " << result.summary.background << '\n'
         << "sifted " << result.summary.sifted << '\n';
    if (result.keys.qber) {
        const double q = *result.keys.qber;
        text << "qber " << format_g12(q) << '\n'
             << "r_original " << format_g12(rate_original(L, q)) << '\n'
             << "r_improved " << format_g12(rate_improved(L, q)) << '\n';
    } else {
        text << "qber -\nr_original -\nr_improved -\n";
    }
    emit(text.str(), out_path);

    if (!transcript_path.empty()) {
        std::ostringstream lines;
        write_transcript(result.transcript, lines);
        write_text_file(transcript_path, lines.str());
    }
    return 0;
}

int cmd_matrix(int L, const std::string& channel, std::uint64_t seed,
               std::uint32_t draws, std::int64_t samples,
               const std::string& out_path) {
    require_L(L);
    const ChannelSpec spec = resolve_channel(channel);
    DetectionMatrix m;
    if (samples < 0 && L <= 12) {
        m = build_matrix(L, spec, seed, draws);
    } else {
        // beyond twelve slots the full table is unmanageable; fall back
        // to a fixed-size random subset of cells
        const std::uint64_t n = samples < 0
                                    ? 1500
                                    : static_cast<std::uint64_t>(samples);
        m = sample_matrix(L, n, spec, seed, draws);
    }
    write_matrix_file(m, out_path);
    return 0;
}

struct RatePoint {
    int L = 0;
    double e_b = 0.0;
};

RatePoint parse_rate_point(const std::string& token) {
    const std::size_t at = token.find(':');
    if (at == std::string::npos)
        throw std::invalid_argument("rate point '" + token +
                                    "' is not of the form L:e_b");
    RatePoint p;
    try {
        p.L = static_cast<int>(parse_int(token.substr(0, at)));
        p.e_b = parse_double(token.substr(at + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("rate point '" + token +
                                    "' is not of the form L:e_b");
    }
    require_L(p.L);
    if (!(p.e_b >= 0.0 && p.e_b <= 0.5))
        throw std::invalid_argument("rate point '" + token +
                                    "': e_b outside [0, 0.5]");
    return p;
}

int cmd_rates(const std::vector<std::string>& tokens,
              const std::string& format, const std::string& out_path) {
    std::ostringstream text;
    const bool csv = format == "csv";
    if (csv)
        text << "L,e_b,R_original_raw,R_improved,threshold_original,"
                "threshold_improved\n";
    for (const std::string& token : tokens) {
        const RatePoint p = parse_rate_point(token);
        const KeyRateReport r = make_report(p.L, p.e_b);
        if (csv) {
            text << r.L << ',' << format_g12(r.e_b) << ','
                 << format_g12(r.r_original_raw) << ','
                 << format_g12(r.r_improved_raw) << ','
                 << format_g12(r.threshold_original) << ','
                 << format_g12(r.threshold_improved) << '\n';
        } else {
            text << "L " << r.L << '\n'
                 << "e_b " << format_g12(r.e_b) << '\n'
                 << "R_original_raw " << format_g12(r.r_original_raw) << '\n'
                 << "R_improved " << format_g12(r.r_improved_raw) << '\n'
                 << "threshold_original " << format_g12(r.threshold_original)
                 << '\n'
                 << "threshold_improved " << format_g12(r.threshold_improved)
                 << "\n\n";
        }
    }
    emit(text.str(), out_path);
    return 0;
}

int cmd_thresholds(std::vector<int> Ls, const std::string& format,
                   const std::string& out_path) {
    if (Ls.empty())
        Ls = {3, 4, 5, 6, 7, 8};
    std::ostringstream text;
    const bool csv = format == "csv";
    if (csv)
        text << "L,threshold_original,threshold_improved\n";
    for (int L : Ls) {
        require_L(L);
        const double orig = threshold(L, Bound::original);
        const double impr = threshold(L, Bound::improved);
        if (csv)
            text << L << ',' << format_g12(orig) << ',' << format_g12(impr)
                 << '\n';
        else
            text << "L " << L << '\n'
                 << "threshold_original " << format_g12(orig) << '\n'
                 << "threshold_improved " << format_g12(impr) << "\n\n";
    }
    emit(text.str(), out_path);
    return 0;
}

struct ReferencePoint {
    int L;
    double e_b;
    double rate;  // improved-bound key rate, quoted to three decimals
};

// error rates and key rates measured in a proof-of-principle L-mode
// experiment, used as the fixed comparison targets of `reproduce`
constexpr ReferencePoint kReference[] = {
    {3, 0.016, 0.188}, {4, 0.019, 0.310}, {5, 0.034, 0.322},
    {6, 0.039, 0.358}, {7, 0.053, 0.339}, {8, 0.056, 0.359},
    {16, 0.069, 0.440}, {32, 0.139, 0.301}, {64, 0.315, 0.032},
};
constexpr double kRateTolerance = 0.002;

int cmd_reproduce(const std::string& out_path) {
    std::ostringstream text;
    bool all_pass = true;

    text << "section rates\n";
    for (const ReferencePoint& ref : kReference) {
        const double computed = rate_improved(ref.L, ref.e_b);
        const double diff = computed - ref.rate;
        const bool pass = std::abs(diff) <= kRateTolerance;
        all_pass = all_pass && pass;
        text << "rate L=" << ref.L << " e_b=" << format_g12(ref.e_b)
             << " ref=" << format_g12(ref.rate)
             << " computed=" << format_g12(computed)
             << " diff=" << format_g12(diff)
             << " tol=" << format_g12(kRateTolerance)
             << " status=" << (pass ? "pass" : "fail") << '\n';
    }

    text << "section thresholds\n";
    for (int L = 3; L <= 8; ++L)
        text << "threshold L=" << L
             << " original=" << format_g12(threshold(L, Bound::original))
             << " improved=" << format_g12(threshold(L, Bound::improved))
             << '\n';

    // claimed ordering: e_b exceeds the original threshold for L = 3..5
    // and stays below it for L = 6..8; the improved threshold clears
    // every measured dimension
    for (const ReferencePoint& ref : kReference) {
        const bool below_improved =
            ref.e_b < threshold(ref.L, Bound::improved);
        bool pass = below_improved;
        std::string above_text = "-";
        std::string expected_text = "-";
        if (ref.L <= 8) {
            const bool above_original =
                ref.e_b > threshold(ref.L, Bound::original);
            const bool expect_above = ref.L <= 5;
            above_text = above_original ? "yes" : "no";
            expected_text = expect_above ? "yes" : "no";
            pass = pass && (above_original == expect_above);
        }
        all_pass = all_pass && pass;
        text << "claim L=" << ref.L << " e_b=" << format_g12(ref.e_b)
             << " above_original=" << above_text
             << " expected=" << expected_text
             << " below_improved=" << (below_improved ? "yes" : "no")
             << " status=" << (pass ? "pass" : "fail") << '\n';
    }

    text << "result " << (all_pass ? "pass" : "fail") << '\n';
    emit(text.str(), out_path);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "simulator and analysis engine for round-robin differential "
        "phase-shift key distribution over L azimuthal modes"};
    app.require_subcommand(1);

    int L = 4;
    std::uint64_t rounds = 10000;
    std::uint64_t seed = 0;
    std::string channel = "identity";
    double p_bg = 0.0;
    int threads = 1;
    std::uint32_t draws = 1000;
    std::int64_t samples = -1;
    std::string out_path;
    std::string transcript_path;
    std::string format = "csv";
    std::vector<std::string> rate_points;
    std::vector<int> threshold_Ls;

    CLI::App* sim = app.add_subcommand(
        "simulate", "run a seeded key-exchange session and report its summary");
    sim->add_option("--L", L, "number of modes per state");
    sim->add_option("--rounds", rounds, "number of protocol rounds");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--channel", channel, "channel descriptor, kind[:k=v,...]");
    sim->add_option("--pbg", p_bg, "background click probability")
        ->check(CLI::Range(0.0, 1.0));
    sim->add_option("--threads", threads, "worker threads (output-invariant)");
    sim->add_option("--out", out_path, "also write the summary to this file");
    sim->add_option("--transcript", transcript_path,
                    "write per-round records to this file");

    CLI::App* mat = app.add_subcommand(
        "matrix", "tabulate detection probabilities over states and settings");
    mat->add_option("--L", L, "number of modes per state");
    mat->add_option("--channel", channel, "channel descriptor, kind[:k=v,...]");
    mat->add_option("--seed", seed, "RNG seed");
    mat->add_option("--draws", draws, "averaging draws per cell")
        ->check(CLI::PositiveNumber);
    mat->add_option("--samples", samples,
                    "sample this many random cells instead of the full table "
                    "(default 1500 once L exceeds 12)")
        ->check(CLI::PositiveNumber);
    mat->add_option("--out", out_path, "output table path")->required();

    CLI::App* rates = app.add_subcommand(
        "rates", "key rates and thresholds for explicit (L, e_b) points");
    rates->add_option("points", rate_points, "rate points, each L:e_b")
        ->required();
    rates->add_option("--format", format, "csv or structured-text")
        ->check(CLI::IsMember({"csv", "structured-text"}));
    rates->add_option("--out", out_path, "also write the table to this file");

    CLI::App* thr = app.add_subcommand(
        "thresholds", "error thresholds of both key-rate bounds");
    thr->add_option("--L", threshold_Ls, "mode count (repeatable; default 3-8)");
    thr->add_option("--format", format, "csv or structured-text")
        ->check(CLI::IsMember({"csv", "structured-text"}));
    thr->add_option("--out", out_path, "also write the table to this file");

    CLI::App* rep = app.add_subcommand(
        "reproduce", "check computed rates and thresholds against bundled "
                     "reference measurements");
    rep->add_option("--out", out_path, "also write the report to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(L, rounds, channel, p_bg, seed, threads,
                                out_path, transcript_path);
        if (mat->parsed())
            return cmd_matrix(L, channel, seed, draws, samples, out_path);
        if (rates->parsed())
            return cmd_rates(rate_points, format, out_path);
        if (thr->parsed())
            return cmd_thresholds(threshold_Ls, format, out_path);
        if (rep->parsed())
            return cmd_reproduce(out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
