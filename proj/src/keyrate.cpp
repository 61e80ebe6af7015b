#include "rrdps/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrdps {

namespace {

double lg(double x) { return std::log2(x); }

void require_error_rate(double e) {
    if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument("error rate outside [0, 1]");
}

void require_dimension(int L) {
    if (L < 2)
        throw std::invalid_argument("dimension must be at least 2");
}

// golden-section search for the maximum of f on [lo, hi]
template <typename F>
double golden_max(F f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

}  // namespace

double h2(double x) {
    require_error_rate(x);
    if (x == 0.0 || x == 1.0)
        return 0.0;
    return -x * lg(x) - (1.0 - x) * lg(1.0 - x);
}

double hd(double x, int d) {
    require_dimension(d);
    require_error_rate(x);
    if (x == 0.0)
        return 0.0;
    return h2(x) + x * lg(static_cast<double>(d - 1));
}

double phi(double x, double y) {
    if (x < 0.0 || y < 0.0)
        throw std::invalid_argument("phi: arguments must be non-negative");
    double acc = 0.0;
    if (x > 0.0)
        acc -= x * lg(x);
    if (y > 0.0)
        acc -= y * lg(y);
    if (x + y > 0.0)
        acc += (x + y) * lg(x + y);
    return acc;
}

double improved_penalty(int L) {
    require_dimension(L);
    const double Lm1 = static_cast<double>(L - 1);
    auto objective = [Lm1](double x) { return phi(Lm1 * x, 1.0 - x); };
    // coarse grid pins down the basin, golden-section sharpens it
    constexpr int kGrid = 1000;
    int best = 0;
    double best_val = objective(0.0);
    for (int i = 1; i <= kGrid; ++i) {
        const double v = objective(static_cast<double>(i) / kGrid);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = std::max(0.0, (best - 1.0) / kGrid);
    const double hi = std::min(1.0, (best + 1.0) / kGrid);
    return golden_max(objective, lo, hi, 1e-10) / Lm1;
}

double rate_original(int L, double e_b) {
    require_dimension(L);
    require_error_rate(e_b);
    return 1.0 - h2(e_b) - h2(1.0 / (L - 1.0));
}

double rate_improved(int L, double e_b) {
    require_dimension(L);
    require_error_rate(e_b);
    return 1.0 - h2(e_b) - improved_penalty(L);
}

double rate_bb84(int d, double e_b) {
    require_dimension(d);
    require_error_rate(e_b);
    return lg(static_cast<double>(d)) - 2.0 * hd(e_b, d);
}

double threshold(int L, Bound bound) {
    require_dimension(L);
    auto rate = [L, bound](double e) {
        return bound == Bound::original ? rate_original(L, e)
                                        : rate_improved(L, e);
    };
    if (rate(0.0) <= 0.0)
        return 0.0;
    double lo = 0.0, hi = 0.5;
    if (rate(hi) > 0.0)
        return hi;  // rate never crosses zero on [0, 1/2]
    // rate is strictly decreasing in e on [0, 1/2], so bisection is safe
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (rate(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

KeyRateReport make_report(int L, double e_b) {
    KeyRateReport r;
    r.L = L;
    r.e_b = e_b;
    r.r_original_raw = rate_original(L, e_b);
    r.r_improved_raw = rate_improved(L, e_b);
    r.r_original = std::max(r.r_original_raw, 0.0);
    r.r_improved = std::max(r.r_improved_raw, 0.0);
    r.threshold_original = threshold(L, Bound::original);
    r.threshold_improved = threshold(L, Bound::improved);
    return r;
}

}  // namespace rrdps
