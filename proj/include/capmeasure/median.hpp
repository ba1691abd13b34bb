#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "capmeasure/space.hpp"

namespace capmeasure {

/// One finite real per point of a space.
using ScalarField = std::vector<double>;

inline void check_field(const MetricMeasureSpace& space, std::span<const double> u) {
    if (u.size() != space.size()) throw Error(ErrorKind::invalid, "scalar field length does not match point count");
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i])) throw Error(ErrorKind::invalid, "scalar field value at " + std::to_string(i) + " is not finite");
    }
}

namespace detail {

// Weight comparisons treat relative differences below this as ties, so that
// thresholds such as gamma=1/3 on three unit masses behave as exact rationals.
inline constexpr long double kTieTolerance = 1e-12L;

struct WeightedValue {
    double value;
    double weight;
    std::size_t index;
};

inline void sort_values(std::vector<WeightedValue>& items) {
    std::sort(items.begin(), items.end(), [](const WeightedValue& a, const WeightedValue& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
    });
}

/// sup{M : mu({v < M}) <= gamma * mu}, items already sorted.
inline double lower_quantile_sorted(const std::vector<WeightedValue>& items, double gamma) {
    long double total = 0.0L;
    for (const auto& it : items) total += it.weight;
    const long double threshold = static_cast<long double>(gamma) * total * (1.0L + kTieTolerance);
    long double below = 0.0L;
    double chosen = items.front().value;
    std::size_t i = 0;
    while (i < items.size()) {
        const double v = items[i].value;
        if (below > threshold) break;
        chosen = v;
        while (i < items.size() && items[i].value == v) below += items[i++].weight;
    }
    return chosen;
}

/// inf{a : mu({v > a}) < gamma * mu}, items already sorted.
inline double upper_quantile_sorted(const std::vector<WeightedValue>& items, double gamma) {
    long double total = 0.0L;
    for (const auto& it : items) total += it.weight;
    const long double threshold = static_cast<long double>(gamma) * total * (1.0L - kTieTolerance);
    long double above = 0.0L;
    double chosen = items.back().value;
    std::size_t i = items.size();
    while (i > 0) {
        const double v = items[i - 1].value;
        if (!(above < threshold)) break;
        chosen = v;
        while (i > 0 && items[i - 1].value == v) above += items[--i].weight;
    }
    return chosen;
}

template <class Transform>
std::vector<WeightedValue> gather(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                  Transform&& f) {
    if (set.empty()) throw Error(ErrorKind::invalid, "median over an empty set");
    std::vector<WeightedValue> items;
    items.reserve(set.size());
    for (std::size_t i : set) items.push_back({f(u[i]), space.weight(i), i});
    sort_values(items);
    return items;
}

inline void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 0.5)) throw Error(ErrorKind::config, "gamma must lie in (0,1/2]");
}

}  // namespace detail

/**
 * gamma-median m_u^gamma(A) = sup{M : mu({x in A : u(x) < M}) <= gamma mu(A)}.
 *
 * The supremum is attained at a data value: with the distinct values of u on A
 * sorted ascending, it is the largest one whose strictly-below mass is at most
 * gamma mu(A). Ties in value are broken by point index for determinism.
 */
inline double gamma_median(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set, double gamma) {
    detail::check_gamma(gamma);
    const auto items = detail::gather(space, u, set, [](double v) { return v; });
    return detail::lower_quantile_sorted(items, gamma);
}

/**
 * Upper gamma-median inf{a : mu({x in A : u(x) > a}) < gamma mu(A)}.
 *
 * This is the form for which the monotonicity, set-enlargement and
 * absolute-value comparisons of the median lemma hold for every gamma; it
 * coincides with gamma_median at gamma = 1/2 up to ties.
 */
inline double upper_gamma_median(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                 double gamma) {
    detail::check_gamma(gamma);
    const auto items = detail::gather(space, u, set, [](double v) { return v; });
    return detail::upper_quantile_sorted(items, gamma);
}

/// gamma-median of |u - c| over the set.
inline double gamma_median_abs_dev(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                   double gamma, double c) {
    detail::check_gamma(gamma);
    const auto items = detail::gather(space, u, set, [c](double v) { return std::abs(v - c); });
    return detail::lower_quantile_sorted(items, gamma);
}

/// Weighted average of |u|^p over the set.
inline double mean_abs_power(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set, double p) {
    long double acc = 0.0L, mass = 0.0L;
    for (std::size_t i : set) {
        acc += static_cast<long double>(space.weight(i)) * std::pow(std::abs(u[i]), p);
        mass += space.weight(i);
    }
    return static_cast<double>(acc / mass);
}

struct MedianShiftCheck {
    bool holds = false;
    double lhs = 0.0;  // m_{u+c}
    double rhs = 0.0;  // m_u + c
};

/// m_{u+c} == m_u + c, compared bit-exactly after rounding the shifted field.
inline MedianShiftCheck median_shift_check(const MetricMeasureSpace& space, std::span<const double> u,
                                           const PointSet& set, double gamma, double c) {
    std::vector<double> shifted(u.begin(), u.end());
    for (double& v : shifted) v += c;
    MedianShiftCheck out;
    out.lhs = gamma_median(space, shifted, set, gamma);
    out.rhs = gamma_median(space, u, set, gamma) + c;
    out.holds = out.lhs == out.rhs;
    return out;
}

struct MedianSlack {
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
};

/// |m_u| <= m_{|u|}.
inline MedianSlack median_abs_check(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                    double gamma) {
    std::vector<double> abs_u(u.begin(), u.end());
    for (double& v : abs_u) v = std::abs(v);
    MedianSlack out;
    out.lhs = std::abs(gamma_median(space, u, set, gamma));
    out.rhs = gamma_median(space, abs_u, set, gamma);
    out.slack = out.rhs - out.lhs;
    out.holds = out.slack >= 0.0;
    return out;
}

/// m_{|u|} <= (gamma^{-1} avg_A |u|^p)^{1/p}.
inline MedianSlack median_pnorm_check(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                      double gamma, double p) {
    if (!(p > 0.0)) throw Error(ErrorKind::config, "p must be positive");
    std::vector<double> abs_u(u.begin(), u.end());
    for (double& v : abs_u) v = std::abs(v);
    MedianSlack out;
    out.lhs = gamma_median(space, abs_u, set, gamma);
    out.rhs = std::pow(mean_abs_power(space, u, set, p) / gamma, 1.0 / p);
    out.slack = out.rhs - out.lhs;
    out.holds = out.slack >= -1e-12 * std::max(1.0, std::abs(out.rhs));
    return out;
}

}  // namespace capmeasure
