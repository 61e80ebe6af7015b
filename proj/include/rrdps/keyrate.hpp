#pragma once

namespace rrdps {

// binary entropy, h2(0) = h2(1) = 0
double h2(double x);

// d-ary entropy bound h2(x) + x log2(d - 1), used by the reference
// d-dimensional BB84 rate
double hd(double x, int d);

// phi(x, y) = -x lg x - y lg y + (x + y) lg(x + y); terms with a zero
// argument drop out
double phi(double x, double y);

// Leakage term max over x in [0, 1] of phi((L-1) x, 1 - x) / (L - 1).
// Evaluated on a 1000-point grid, then sharpened around the best grid
// point by golden-section search to an interval below 1e-10.
double improved_penalty(int L);

// Asymptotic secret fractions per sifted bit. Values may be negative;
// callers decide whether to clamp.
double rate_original(int L, double e_b);   // 1 - h2(e) - h2(1 / (L - 1))
double rate_improved(int L, double e_b);   // 1 - h2(e) - improved_penalty(L)
double rate_bb84(int d, double e_b);       // log2(d) - 2 hd(e, d)

enum class Bound { original, improved };

// Smallest e_b in [0, 1/2] where the rate reaches zero, found by
// bisection to 1e-9; returns 0 when even e_b = 0 gives no key.
double threshold(int L, Bound bound);

struct KeyRateReport {
    int L = 0;
    double e_b = 0.0;
    double r_original_raw = 0.0;  // before clamping at zero
    double r_improved_raw = 0.0;
    double r_original = 0.0;      // max(raw, 0)
    double r_improved = 0.0;
    double threshold_original = 0.0;
    double threshold_improved = 0.0;
};

KeyRateReport make_report(int L, double e_b);

}  // namespace rrdps
