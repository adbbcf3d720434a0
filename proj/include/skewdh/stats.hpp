#pragma once

#include <cmath>
#include <cstdint>

namespace skewdh {

struct Interval {
    double lo = 0.0, hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
};

inline bool overlaps(const Interval& a, const Interval& b) {
    return a.lo <= b.hi && b.lo <= a.hi;
}

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace detail

// Inverse standard normal CDF by bisection; plenty accurate for z-scores.
inline double normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (detail::normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double z_for_confidence(double confidence) {
    return normal_quantile(0.5 + confidence / 2.0);
}

// Wilson score interval; robust for small counts and rates at 0 or 1.
inline Interval wilson(uint64_t wins, uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    double n = double(trials);
    double phat = double(wins) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    double lo = center - half, hi = center + half;
    return {lo < 0 ? 0 : lo, hi > 1 ? 1 : hi};
}

// Interval for |p0 - p1| from per-arm intervals.
inline Interval abs_difference(const Interval& a, const Interval& b) {
    double lo = a.lo - b.hi, hi = a.hi - b.lo;
    if (lo <= 0.0 && 0.0 <= hi) return {0.0, std::max(std::fabs(lo), std::fabs(hi))};
    double alo = std::fabs(lo), ahi = std::fabs(hi);
    return {std::min(alo, ahi), std::max(alo, ahi)};
}

// Interval for |p - center| from an interval for p.
inline Interval abs_offset(const Interval& a, double center) {
    double lo = a.lo - center, hi = a.hi - center;
    if (lo <= 0.0 && 0.0 <= hi) return {0.0, std::max(std::fabs(lo), std::fabs(hi))};
    double alo = std::fabs(lo), ahi = std::fabs(hi);
    return {std::min(alo, ahi), std::max(alo, ahi)};
}

// Scales an interval by 1/l (for comparing epsilon/l against a win rate).
inline Interval scaled(const Interval& a, double factor) {
    return {a.lo * factor, a.hi * factor};
}

}  // namespace skewdh
