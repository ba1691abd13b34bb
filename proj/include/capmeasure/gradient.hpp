#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "capmeasure/median.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/space.hpp"

namespace capmeasure {

/**
 * Nonnegative value per (dyadic scale k, point), zero outside the window.
 *
 * Scale k pairs with distances in [2^{k-1}, 2^k). Windows may extend past the
 * space's own window (the Poincare transform reaches two scales finer).
 */
class GradientSequence {
public:
    GradientSequence() = default;
    GradientSequence(ScaleWindow window, std::size_t points)
        : window_(window), points_(points), values_(static_cast<std::size_t>(window.count()) * points, 0.0) {}

    const ScaleWindow& window() const { return window_; }
    std::size_t points() const { return points_; }

    double at(int k, std::size_t x) const {
        return window_.contains(k) ? values_[static_cast<std::size_t>(k - window_.k_min) * points_ + x] : 0.0;
    }
    double& ref(int k, std::size_t x) { return values_[static_cast<std::size_t>(k - window_.k_min) * points_ + x]; }

    std::span<const double> row(int k) const {
        return {values_.data() + static_cast<std::size_t>(k - window_.k_min) * points_, points_};
    }
    std::span<double> row(int k) { return {values_.data() + static_cast<std::size_t>(k - window_.k_min) * points_, points_}; }

    std::span<const double> values() const { return values_; }

    GradientSequence scaled(double factor) const {
        GradientSequence out = *this;
        for (double& v : out.values_) v *= factor;
        return out;
    }

    /// Same values on a wider window.
    GradientSequence widened(ScaleWindow wider) const {
        GradientSequence out({std::min(wider.k_min, window_.k_min), std::max(wider.k_max, window_.k_max)}, points_);
        for (int k = window_.k_min; k <= window_.k_max; ++k)
            for (std::size_t x = 0; x < points_; ++x) out.ref(k, x) = at(k, x);
        return out;
    }

    friend GradientSequence pointwise_max(const GradientSequence& a, const GradientSequence& b) {
        const ScaleWindow w{std::min(a.window_.k_min, b.window_.k_min), std::max(a.window_.k_max, b.window_.k_max)};
        GradientSequence out(w, a.points_);
        for (int k = w.k_min; k <= w.k_max; ++k)
            for (std::size_t x = 0; x < a.points_; ++x) out.ref(k, x) = std::max(a.at(k, x), b.at(k, x));
        return out;
    }

private:
    ScaleWindow window_;
    std::size_t points_ = 0;
    std::vector<double> values_;
};

/// g_k(x) = 1/2 max{|u(x)-u(y)| / d(x,y)^s : y in annulus(x,k)}.
inline GradientSequence canonical_gradient(const MetricMeasureSpace& space, std::span<const double> u, double s) {
    const std::size_t n = space.size();
    GradientSequence g(space.window(), n);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = space.distance(x, y);
            const double quotient = std::abs(u[x] - u[y]) / std::pow(d, s);
            double& cell = g.ref(dyadic_shell(d), x);
            cell = std::max(cell, quotient);
        }
    }
    for (int k = space.window().k_min; k <= space.window().k_max; ++k)
        for (double& v : g.row(k)) v *= 0.5;
    return g;
}

struct GradientCheck {
    bool valid = true;
    std::size_t x = 0, y = 0;
    int k = 0;
    double violation = -std::numeric_limits<double>::infinity();  // |du| - d^s (g(x)+g(y)) at the worst pair
};

inline constexpr double kGradientTolerance = 1e-12;

/// Exhaustive pairwise check of |u(x)-u(y)| <= d^s (g_k(x)+g_k(y)) on every shell.
inline GradientCheck is_valid_gradient(const MetricMeasureSpace& space, std::span<const double> u, double s,
                                       const GradientSequence& g) {
    GradientCheck out;
    const std::size_t n = space.size();
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = x + 1; y < n; ++y) {
            const double d = space.distance(x, y);
            const int k = dyadic_shell(d);
            const double v = std::abs(u[x] - u[y]) - std::pow(d, s) * (g.at(k, x) + g.at(k, y));
            if (v > out.violation) {
                out.violation = v;
                out.x = x;
                out.y = y;
                out.k = k;
            }
        }
    }
    out.valid = out.violation <= kGradientTolerance;
    return out;
}

/// max |phi(x)-phi(y)| / d(x,y).
inline double lipschitz_constant(const MetricMeasureSpace& space, std::span<const double> phi) {
    double best = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x)
        for (std::size_t y = x + 1; y < space.size(); ++y)
            best = std::max(best, std::abs(phi[x] - phi[y]) / space.distance(x, y));
    return best;
}

namespace detail {

inline void require_lipschitz(const MetricMeasureSpace& space, std::span<const double> phi, double bound) {
    const double empirical = lipschitz_constant(space, phi);
    if (empirical > bound * (1.0 + 1e-12) + 1e-15) {
        throw Error(ErrorKind::domain, "Lipschitz bound " + std::to_string(bound) + " is below the empirical constant " +
                                           std::to_string(empirical));
    }
}

inline double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

struct ProductGradients {
    GradientSequence h;    // (g_k + 2^{2-sk}|u|) ||phi|| chi
    GradientSequence rho;  // (g_k ||phi|| + 2^{k(1-s)} L |u|) chi
};

/**
 * Fractional s-gradients of the product u*phi from a gradient G of u and a
 * bounded L-Lipschitz phi. Scale factors are written for shells
 * 2^{k-1} <= d < 2^k: the Lipschitz term uses d^{1-s} < 2^{k(1-s)} and the
 * sup term uses d^{-s} <= 2^{(1-k)s}.
 */
inline ProductGradients product_gradient(const MetricMeasureSpace& space, std::span<const double> u,
                                         const GradientSequence& g, std::span<const double> phi, double lipschitz,
                                         double s) {
    check_field(space, u);
    check_field(space, phi);
    detail::require_lipschitz(space, phi, lipschitz);
    const double phi_sup = detail::sup_norm(phi);
    const ScaleWindow w{std::min(g.window().k_min, space.window().k_min),
                        std::max(g.window().k_max, space.window().k_max)};
    ProductGradients out{GradientSequence(w, space.size()), GradientSequence(w, space.size())};
    for (int k = w.k_min; k <= w.k_max; ++k) {
        const double lip_factor = std::exp2(k * (1.0 - s)) * lipschitz;
        const double sup_factor = std::exp2(2.0 - s * k);
        for (std::size_t x = 0; x < space.size(); ++x) {
            if (phi[x] == 0.0) continue;
            const double gk = g.at(k, x);
            const double au = std::abs(u[x]);
            out.rho.ref(k, x) = gk * phi_sup + lip_factor * au;
            out.h.ref(k, x) = (gk + sup_factor * au) * phi_sup;
        }
    }
    return out;
}

/**
 * Explicit gradient of an L-Lipschitz phi supported in F:
 * g_k(x) = 1/2 min{L 2^{k(1-s)}, 2 ||phi|| 2^{(1-k)s}} when dist(x,F) < 2^k, else 0.
 */
inline GradientSequence lipschitz_gradient(const MetricMeasureSpace& space, std::span<const double> phi,
                                           double lipschitz, double s, const PointSet& support) {
    check_field(space, phi);
    {
        std::size_t j = 0;
        for (std::size_t x = 0; x < space.size(); ++x) {
            const bool in_f = j < support.size() && support[j] == x;
            if (in_f) ++j;
            if (!in_f && phi[x] != 0.0) {
                throw Error(ErrorKind::domain, "phi is nonzero at " + std::to_string(x) + " outside the support set");
            }
        }
    }
    detail::require_lipschitz(space, phi, lipschitz);
    const double phi_sup = detail::sup_norm(phi);
    GradientSequence g(space.window(), space.size());
    if (phi_sup == 0.0 || support.empty()) return g;
    for (std::size_t x = 0; x < space.size(); ++x) {
        const double to_f = space.distance_to_set(x, support);
        for (int k = space.window().k_min; k <= space.window().k_max; ++k) {
            if (!(to_f < std::ldexp(1.0, k))) continue;
            const double a = lipschitz * std::exp2(k * (1.0 - s));
            const double b = 2.0 * phi_sup * std::exp2((1.0 - k) * s);
            g.ref(k, x) = 0.5 * std::min(a, b);
        }
    }
    return g;
}

/**
 * g_k = (sum_{j <= k+2} 2^{(j-k) s' p'} h_j^p)^{1/p} with p' = min{1,p}.
 *
 * The sum runs over the finer scales and two coarser ones; the output window
 * extends the input two scales finer so nothing is dropped.
 */
inline GradientSequence poincare_transform(const GradientSequence& h, double s_prime, double p) {
    const double p_prime = std::min(1.0, p);
    const ScaleWindow in = h.window();
    const ScaleWindow out_w{in.k_min - 2, in.k_max};
    GradientSequence g(out_w, h.points());
    for (int k = out_w.k_min; k <= out_w.k_max; ++k) {
        const int j_hi = std::min(k + 2, in.k_max);
        for (std::size_t x = 0; x < h.points(); ++x) {
            long double acc = 0.0L;
            for (int j = in.k_min; j <= j_hi; ++j) {
                const double hj = h.at(j, x);
                if (hj == 0.0) continue;
                acc += std::exp2((j - k) * s_prime * p_prime) * std::pow(hj, p);
            }
            g.ref(k, x) = acc > 0.0L ? std::pow(static_cast<double>(acc), 1.0 / p) : 0.0;
        }
    }
    return g;
}

/// l^q norm of the column (g_k(x))_k; sup when q is infinite.
inline double column_norm(const GradientSequence& g, std::size_t x, double q) {
    const ScaleWindow w = g.window();
    if (std::isinf(q)) {
        double m = 0.0;
        for (int k = w.k_min; k <= w.k_max; ++k) m = std::max(m, g.at(k, x));
        return m;
    }
    long double acc = 0.0L;
    for (int k = w.k_min; k <= w.k_max; ++k) {
        const double v = g.at(k, x);
        if (v != 0.0) acc += std::pow(v, q);
    }
    return acc > 0.0L ? std::pow(static_cast<double>(acc), 1.0 / q) : 0.0;
}

/// ||(g_k)||_{L^p(S, l^q)}.
inline double mixed_norm(const MetricMeasureSpace& space, const GradientSequence& g, double p, double q,
                         const PointSet& set) {
    if (!(p > 0.0)) throw Error(ErrorKind::config, "p must be positive");
    long double acc = 0.0L;
    for (std::size_t x : set) {
        const double c = column_norm(g, x, q);
        if (c != 0.0) acc += static_cast<long double>(space.weight(x)) * std::pow(c, p);
    }
    return acc > 0.0L ? std::pow(static_cast<double>(acc), 1.0 / p) : 0.0;
}

inline PointSet all_points(const MetricMeasureSpace& space) {
    PointSet all(space.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

inline double mixed_norm(const MetricMeasureSpace& space, const GradientSequence& g, double p, double q) {
    return mixed_norm(space, g, p, q, all_points(space));
}

inline double lp_norm(const MetricMeasureSpace& space, std::span<const double> u, double p) {
    long double acc = 0.0L;
    for (std::size_t x = 0; x < space.size(); ++x) {
        if (u[x] != 0.0) acc += static_cast<long double>(space.weight(x)) * std::pow(std::abs(u[x]), p);
    }
    return acc > 0.0L ? std::pow(static_cast<double>(acc), 1.0 / p) : 0.0;
}

/// ||u||_{L^p} + ||G||_{L^p(X, l^q)}.
inline double tl_norm(const MetricMeasureSpace& space, std::span<const double> u, const GradientSequence& g, double p,
                      double q) {
    return lp_norm(space, u, p) + mixed_norm(space, g, p, q);
}

struct PoincareRow {
    std::size_t x = 0;
    int k = 0;
    double lhs = 0.0;  // inf_c m^gamma_{|u-c|}(B(x, 2^k))
    double rhs = 0.0;  // 2^{ks} (avg_{B(x, 2^{k+1})} g_k^p)^{1/p}
    double ratio = 0.0;
};

struct PoincareTable {
    std::vector<PoincareRow> rows;
    double max_ratio = 0.0;  // empirical constant; +inf if some lhs > 0 meets rhs = 0
};

/**
 * inf over c of the gamma-median of |u - c| on a set.
 *
 * m^gamma_{|u-c|} is piecewise linear in c with breakpoints at data values and
 * at midpoints of pairs of data values, so scanning those candidates is exact.
 * Above kExactMidpointLimit distinct values only consecutive midpoints and
 * third-points are scanned.
 */
inline double min_median_deviation(const MetricMeasureSpace& space, std::span<const double> u, const PointSet& set,
                                   double gamma) {
    constexpr std::size_t kExactMidpointLimit = 96;
    std::vector<double> vals;
    vals.reserve(set.size());
    for (std::size_t i : set) vals.push_back(u[i]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() == 1) return 0.0;
    std::vector<double> candidates = vals;
    if (vals.size() <= kExactMidpointLimit) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = i + 1; j < vals.size(); ++j) candidates.push_back(0.5 * (vals[i] + vals[j]));
    } else {
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            candidates.push_back(vals[i] + (vals[i + 1] - vals[i]) / 3.0);
            candidates.push_back(0.5 * (vals[i] + vals[i + 1]));
            candidates.push_back(vals[i] + 2.0 * (vals[i + 1] - vals[i]) / 3.0);
        }
    }
    std::vector<detail::WeightedValue> items(set.size());
    double best = std::numeric_limits<double>::infinity();
    for (double c : candidates) {
        for (std::size_t t = 0; t < set.size(); ++t) items[t] = {std::abs(u[set[t]] - c), space.weight(set[t]), set[t]};
        detail::sort_values(items);
        best = std::min(best, detail::lower_quantile_sorted(items, gamma));
        if (best == 0.0) break;
    }
    return best;
}

/**
 * Per-ball ratio table for the median Poincare inequality
 *   inf_c m^gamma_{|u-c|}(B(x,2^k)) <= C 2^{ks} (avg_{B(x,2^{k+1})} g_k^p)^{1/p}
 * over every point and every scale of G's window.
 */
inline PoincareTable poincare_check(const MetricMeasureSpace& space, std::span<const double> u,
                                    const GradientSequence& g, double gamma, double s, double p) {
    check_field(space, u);
    PoincareTable table;
    for (std::size_t x = 0; x < space.size(); ++x) {
        for (int k = g.window().k_min; k <= g.window().k_max; ++k) {
            const PointSet inner = space.ball(x, std::ldexp(1.0, k));
            const PointSet outer = space.ball(x, std::ldexp(1.0, k + 1));
            long double acc = 0.0L, mass = 0.0L;
            for (std::size_t y : outer) {
                const double v = g.at(k, y);
                if (v != 0.0) acc += static_cast<long double>(space.weight(y)) * std::pow(v, p);
                mass += space.weight(y);
            }
            const double rhs = std::exp2(k * s) * std::pow(static_cast<double>(acc / mass), 1.0 / p);
            const double lhs = inner.size() > 1 ? min_median_deviation(space, u, inner, gamma) : 0.0;
            if (rhs > 0.0) {
                table.rows.push_back({x, k, lhs, rhs, lhs / rhs});
                table.max_ratio = std::max(table.max_ratio, lhs / rhs);
            } else if (lhs > 0.0) {
                table.rows.push_back({x, k, lhs, rhs, std::numeric_limits<double>::infinity()});
                table.max_ratio = std::numeric_limits<double>::infinity();
            }
        }
    }
    return table;
}

}  // namespace capmeasure
