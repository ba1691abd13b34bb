#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "capmeasure/capacity.hpp"
#include "capmeasure/gradient.hpp"
#include "capmeasure/hausdorff.hpp"
#include "capmeasure/median.hpp"
#include "capmeasure/parallel.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/space.hpp"

namespace capmeasure {

// ---------------------------------------------------------------------------
// Capacity versus theta-gauge content over a family of sets.

enum class Family { cantor, interval, square };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::cantor: return "cantor";
        case Family::interval: return "interval";
        case Family::square: return "square";
    }
    return "unknown";
}

inline Family parse_family(const std::string& name) {
    if (name == "cantor") return Family::cantor;
    if (name == "interval") return Family::interval;
    if (name == "square") return Family::square;
    throw Error(ErrorKind::config, "family must be one of cantor, interval, square");
}

struct FamilySpec {
    Family family = Family::cantor;
    int level_min = 1;
    int level_max = 3;
    int ambient = 0;       // cantor: ambient ternary level (0 = level_max); grids: points per side (0 = default)
};

struct Instance {
    std::string id;
    int level = 0;
    MetricMeasureSpace space;
    PointSet target;
};

/**
 * cantor:   level L on the 3^ambient grid.
 * interval: centered interval of length 2^-L on grid1d(ambient, default 33).
 * square:   centered square of side 2^-L on grid2d(ambient, default 9).
 */
inline std::vector<Instance> family_instances(const FamilySpec& spec) {
    if (spec.level_min < 0 || spec.level_max < spec.level_min) throw Error(ErrorKind::config, "levels must form a range lo..hi");
    std::vector<Instance> out;
    for (int level = spec.level_min; level <= spec.level_max; ++level) {
        const std::string id = std::string(family_name(spec.family)) + "-" + std::to_string(level);
        switch (spec.family) {
            case Family::cantor: {
                GeneratedSpace g = cantor(level, std::max(spec.ambient, spec.level_max));
                out.push_back({id, level, std::move(g.space), std::move(*g.distinguished)});
                break;
            }
            case Family::interval: {
                auto space = grid1d(spec.ambient > 0 ? static_cast<std::size_t>(spec.ambient) : 33);
                const double half = std::ldexp(1.0, -level - 1);
                PointSet e;
                for (std::size_t i = 0; i < space.size(); ++i)
                    if (std::abs(space.coords()[i][0] - 0.5) <= half + 1e-12) e.push_back(i);
                out.push_back({id, level, std::move(space), std::move(e)});
                break;
            }
            case Family::square: {
                auto space = grid2d(spec.ambient > 0 ? static_cast<std::size_t>(spec.ambient) : 9);
                const double half = std::ldexp(1.0, -level - 1);
                PointSet e;
                for (std::size_t i = 0; i < space.size(); ++i) {
                    const auto& c = space.coords()[i];
                    if (std::abs(c[0] - 0.5) <= half + 1e-12 && std::abs(c[1] - 0.5) <= half + 1e-12) e.push_back(i);
                }
                out.push_back({id, level, std::move(space), std::move(e)});
                break;
            }
        }
    }
    return out;
}

struct TheoremRow {
    std::string id;
    std::size_t set_size = 0;
    double capacity = 0.0;
    double cap_theta = 0.0;
    double content = 0.0;
    double ratio = 0.0;
    bool degenerate = false;  // empty target or zero content: no ratio
    std::string strategy;
    std::string content_method;
    double runtime_seconds = 0.0;
};

struct TheoremReport {
    std::string family;
    std::vector<TheoremRow> rows;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    double spread = 0.0;  // max_ratio / min_ratio over non-degenerate rows
    bool verdict = false;
    std::string note;
};

struct Thm1Options {
    double delta = 1.0;          // largest admissible covering radius
    double stability_band = 10.0;
    SolverOptions solver;
};

inline TheoremReport verify_thm1(const std::string& family, const std::vector<Instance>& instances, const Params& params,
                                 const Thm1Options& options = {}) {
    params.validate();
    const bool convex = params.p >= 1.0 && params.q >= 1.0 && std::isfinite(params.q);
    const Gauge gauge = theta_gauge(params.s, params.p, params.theta());
    TheoremReport report;
    report.family = family;
    if (!convex) report.note = "p or q below 1: capacity from multistart";
    report.rows.resize(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) {
        const Instance& inst = instances[i];
        const auto start = std::chrono::steady_clock::now();
        TheoremRow row;
        row.id = inst.id;
        row.set_size = inst.target.size();
        const Strategy strategy = convex ? Strategy::convex : Strategy::multistart;
        row.strategy = strategy_name(strategy);
        const ContentMethod method = inst.target.size() <= kMaxExactTarget ? ContentMethod::exact : ContentMethod::greedy;
        row.content_method = content_method_name(method);
        if (inst.target.empty()) {
            row.degenerate = true;
        } else {
            row.capacity = capacity_upper(inst.space, inst.target, params, strategy, options.solver).value;
            row.cap_theta = std::pow(row.capacity, params.theta());
            const CoveringSolution cover = content(inst.space, inst.target, gauge, options.delta, method);
            if (!cover.covers) throw Error(ErrorKind::infeasible, "no admissible cover for instance " + inst.id);
            row.content = cover.gauge_sum;
            if (row.content > 0.0) {
                row.ratio = row.cap_theta / row.content;
            } else {
                row.degenerate = true;
            }
        }
        row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows[i] = std::move(row);
    });
    bool any = false;
    report.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& row : report.rows) {
        if (row.degenerate) continue;
        any = true;
        report.max_ratio = std::max(report.max_ratio, row.ratio);
        report.min_ratio = std::min(report.min_ratio, row.ratio);
    }
    if (!any) {
        report.min_ratio = 0.0;
        report.note += report.note.empty() ? "all rows degenerate" : "; all rows degenerate";
        return report;
    }
    report.spread = report.min_ratio > 0.0 ? report.max_ratio / report.min_ratio : std::numeric_limits<double>::infinity();
    report.verdict = std::isfinite(report.max_ratio) && report.spread <= options.stability_band;
    return report;
}

// ---------------------------------------------------------------------------
// Covering construction from a gradient of an admissible function.

struct SelectedBall {
    std::size_t x = 0;
    int scale = 0;  // selected index: radius 2^{-scale+1}
    double radius = 0.0;
    double lhs = 0.0;  // M * integral of ||g||_{l^q}^p over the ball
    double rhs = 0.0;  // log-gauge value of the ball
};

struct ProofCoveringResult {
    std::size_t x0 = 0;
    int m = 0;
    int k_top = 0;
    double c_poincare = 0.0;
    double M = 0.0;
    std::vector<SelectedBall> selected;
    std::vector<std::size_t> failures;  // points of E with no admissible scale inside the window
    std::vector<Ball> disjoint;         // 5B-selected family before dilation
    CoveringSolution cover;             // 5-dilates of the disjoint family
    double disjoint_gauge_sum = 0.0;
    double bound = 0.0;  // M * ||G||^p
    bool bound_holds = false;
};

/**
 * Scale selection and 5B thinning for a set E in B(x0, 2^{-m}).
 *
 * Scales here count downward: index j means radius 2^{-j+1}, so the gradient
 * row k of G (distances near 2^k) corresponds to j = -k, and the finest
 * window row gives the top index k_top = -G.window().k_min.
 */
inline ProofCoveringResult proof_covering(const MetricMeasureSpace& space, const PointSet& target,
                                          std::span<const double> u, const GradientSequence& g, const Params& params,
                                          int m, std::optional<double> c_poincare = std::nullopt,
                                          std::optional<std::size_t> x0 = std::nullopt) {
    params.validate();
    check_field(space, u);
    if (m - 4 < 2) throw Error(ErrorKind::config, "m must be at least 6");
    if (target.empty()) throw Error(ErrorKind::invalid, "proof covering needs a nonempty set");
    for (std::size_t e : target) {
        if (!(u[e] >= 1.0 - 1e-9)) throw Error(ErrorKind::invalid, "u is below 1 at point " + std::to_string(e) + " of E");
    }
    const double radius_m = std::ldexp(1.0, -m);
    auto hypothesis = [&](std::size_t c) {
        for (std::size_t e : target)
            if (!(space.distance(c, e) < radius_m)) return false;
        const double lo = std::ldexp(1.0, -m + 2), hi = std::ldexp(1.0, -m + 3);
        for (double d : space.distance_row(c))
            if (d >= lo && d < hi) return true;
        return false;
    };
    ProofCoveringResult out;
    out.m = m;
    if (x0) {
        if (!hypothesis(*x0)) {
            throw Error(ErrorKind::domain, "center " + std::to_string(*x0) +
                                               " fails E in B(x0,2^-m) or the nonempty-shell condition");
        }
        out.x0 = *x0;
    } else {
        bool found = false;
        for (std::size_t c = 0; c < space.size() && !found; ++c) {
            if (hypothesis(c)) {
                out.x0 = c;
                found = true;
            }
        }
        if (!found) throw Error(ErrorKind::domain, "no center satisfies E in B(x0,2^-m) with a nonempty shell");
    }

    out.c_poincare = c_poincare ? *c_poincare : poincare_check(space, u, g, params.gamma, params.s, params.p).max_ratio;
    if (!std::isfinite(out.c_poincare) || !(out.c_poincare > 0.0)) {
        throw Error(ErrorKind::domain, "Poincare constant must be positive and finite");
    }
    out.k_top = -g.window().k_min;
    const int j_lo = m - 4;
    if (out.k_top < j_lo) throw Error(ErrorKind::domain, "gradient window is too coarse for the base scale m");
    const double p = params.p, eps = params.eps;
    double series = 0.0;
    for (int j = j_lo; j <= out.k_top; ++j) series += std::pow(static_cast<double>(j - 1), -1.0 - eps / p);
    out.M = std::pow(out.c_poincare, p) * std::pow(std::log(2.0), -p - eps) * std::pow(series, p);

    std::vector<double> column_p(space.size());
    for (std::size_t y = 0; y < space.size(); ++y) column_p[y] = std::pow(column_norm(g, y, params.q), p);
    const Gauge gauge = log_gauge(params.s, p, eps);
    std::vector<Ball> balls;
    for (std::size_t x : target) {
        bool chosen = false;
        for (int j = j_lo; j <= out.k_top && !chosen; ++j) {
            const double rho = std::ldexp(1.0, -j + 1);
            long double integral = 0.0L;
            for (std::size_t y : space.ball(x, rho)) integral += static_cast<long double>(space.weight(y)) * column_p[y];
            const double lhs = out.M * static_cast<double>(integral);
            const double rhs = gauge(space, x, rho);
            if (lhs >= rhs) {
                out.selected.push_back({x, j, rho, lhs, rhs});
                balls.push_back({x, rho, rhs});
                chosen = true;
            }
        }
        if (!chosen) out.failures.push_back(x);
    }
    const auto keep = five_b_cover(space, balls);
    for (std::size_t i : keep) {
        out.disjoint.push_back(balls[i]);
        out.disjoint_gauge_sum += balls[i].gauge;
    }
    out.cover.method = ContentMethod::greedy;
    for (const Ball& b : out.disjoint) {
        const double r5 = 5.0 * b.radius;
        out.cover.balls.push_back({b.center, r5, r5 < 1.0 ? gauge(space, b.center, r5) : kInfinity});
        out.cover.gauge_sum += out.cover.balls.back().gauge;
    }
    out.cover.covers = out.failures.empty() && covers_target(space, target, out.cover.balls);
    const double norm = mixed_norm(space, g, p, params.q);
    out.bound = out.M * std::pow(norm, p);
    out.bound_holds = out.disjoint_gauge_sum <= out.bound * (1.0 + 1e-12);
    return out;
}

// ---------------------------------------------------------------------------
// Euclidean-grid Lebesgue-point experiment.

namespace detail {

inline void require_grid(const MetricMeasureSpace& space) {
    if (!space.has_coords()) throw Error(ErrorKind::invalid, "operation needs a grid space with coordinates");
}

}  // namespace detail

/// Discrete W^{s,p} norm (sum w|u|^p + sum_{x != y} |u(x)-u(y)|^p / |x-y|^{n+sp} w_x w_y)^{1/p}.
inline double wsp_norm(const MetricMeasureSpace& space, std::span<const double> u, double s, double p) {
    detail::require_grid(space);
    check_field(space, u);
    const double n = static_cast<double>(space.dim());
    long double acc = 0.0L;
    for (std::size_t x = 0; x < space.size(); ++x) {
        acc += static_cast<long double>(space.weight(x)) * std::pow(std::abs(u[x]), p);
        for (std::size_t y = 0; y < space.size(); ++y) {
            if (y == x || u[x] == u[y]) continue;
            acc += static_cast<long double>(std::pow(std::abs(u[x] - u[y]), p) / std::pow(space.distance(x, y), n + s * p) *
                                            space.weight(x) * space.weight(y));
        }
    }
    return std::pow(static_cast<double>(acc), 1.0 / p);
}

struct CauchyRow {
    std::size_t x = 0;
    int fine = 0;    // l
    int coarse = 0;  // m < l
    double lhs = 0.0;
    double rhs = 0.0;
};

struct LebesgueOptions {
    double c_thresh = 1.0;
    int j0 = 3;
};

struct LebesgueResult {
    ScalarField g;
    int scales = 0;  // J: balls B(x, 2^-j) for j = 1..J
    double g_norm = 0.0;
    double wsp = 0.0;
    double K = 0.0;  // g_norm / wsp
    PointSet bad_set;
    std::vector<double> bad_radius;  // smallest qualifying radius per bad point
    double bad_content_greedy = 0.0;
    double bad_content_5b = 0.0;
    double bad_content = 0.0;  // min of the two covers
    std::vector<CauchyRow> cauchy;
    double K_prime = 0.0;  // max lhs / rhs over good points
};

/**
 * Maximal function g(x) = max_j 2^{js} (avg_{B(x,2^-j)} |u - m^gamma_u(B)|^p)^{1/p},
 * the set of points where the integral of g^p over some B(x, 2^-j), j >= j0,
 * reaches c_thresh * h1(2^-j), and the median Cauchy table at the other points.
 */
inline LebesgueResult lebesgue_experiment(const MetricMeasureSpace& space, std::span<const double> u,
                                          const Params& params, const LebesgueOptions& options = {}) {
    params.validate();
    detail::require_grid(space);
    check_field(space, u);
    const double s = params.s, p = params.p;
    const double n = static_cast<double>(space.dim());
    const int j0 = options.j0;
    if (j0 < 3) throw Error(ErrorKind::config, "j0 must be at least 3 so that radii stay below 1/5");
    LebesgueResult out;
    int J = 0;
    while (std::ldexp(1.0, -(J + 1)) > space.min_separation()) ++J;
    out.scales = J;
    if (J < j0) throw Error(ErrorKind::domain, "grid resolves only " + std::to_string(J) + " dyadic scales; need at least " + std::to_string(j0));

    const std::size_t N = space.size();
    const std::size_t rows = static_cast<std::size_t>(J);
    std::vector<double> med(N * rows);
    out.g.assign(N, 0.0);
    parallel_for(N, [&](std::size_t x) {
        double best = 0.0;
        for (int j = 1; j <= J; ++j) {
            const PointSet b = space.ball(x, std::ldexp(1.0, -j));
            const double mj = gamma_median(space, u, b, params.gamma);
            med[x * rows + static_cast<std::size_t>(j - 1)] = mj;
            long double acc = 0.0L, mass = 0.0L;
            for (std::size_t y : b) {
                acc += static_cast<long double>(space.weight(y)) * std::pow(std::abs(u[y] - mj), p);
                mass += space.weight(y);
            }
            best = std::max(best, std::exp2(j * s) * std::pow(static_cast<double>(acc / mass), 1.0 / p));
        }
        out.g[x] = best;
    });
    out.g_norm = lp_norm(space, out.g, p);
    out.wsp = wsp_norm(space, u, s, p);
    out.K = out.wsp > 0.0 ? out.g_norm / out.wsp : 0.0;

    std::vector<double> integral(N * rows, 0.0);
    for (std::size_t x = 0; x < N; ++x) {
        for (int j = 1; j <= J; ++j) {
            long double acc = 0.0L;
            for (std::size_t y : space.ball(x, std::ldexp(1.0, -j))) acc += static_cast<long double>(space.weight(y)) * std::pow(out.g[y], p);
            integral[x * rows + static_cast<std::size_t>(j - 1)] = static_cast<double>(acc);
        }
    }
    const Gauge h1 = euclid_log_half(n, s, p, params.eps);
    const Gauge h = euclid_log(n, s, p, params.eps);
    std::vector<char> bad(N, 0);
    for (std::size_t x = 0; x < N; ++x) {
        for (int j = J; j >= j0; --j) {
            const double r = std::ldexp(1.0, -j);
            if (integral[x * rows + static_cast<std::size_t>(j - 1)] >= options.c_thresh * h1.radial_value(r)) {
                bad[x] = 1;
                out.bad_set.push_back(x);
                out.bad_radius.push_back(r);
                break;
            }
        }
    }
    if (!out.bad_set.empty()) {
        out.bad_content_greedy = content(space, out.bad_set, h, std::ldexp(1.0, -j0), ContentMethod::greedy).gauge_sum;
        std::vector<Ball> balls;
        for (std::size_t i = 0; i < out.bad_set.size(); ++i) balls.push_back({out.bad_set[i], out.bad_radius[i], 0.0});
        for (std::size_t i : five_b_cover(space, balls)) out.bad_content_5b += h.radial_value(5.0 * balls[i].radius);
        out.bad_content = std::min(out.bad_content_greedy, out.bad_content_5b);
    }

    for (std::size_t x = 0; x < N; ++x) {
        if (bad[x]) continue;
        for (int coarse = j0; coarse <= J; ++coarse) {
            for (int fine = coarse + 1; fine <= J; ++fine) {
                CauchyRow row{x, fine, coarse, 0.0, 0.0};
                row.lhs = std::abs(med[x * rows + static_cast<std::size_t>(fine - 1)] -
                                   med[x * rows + static_cast<std::size_t>(coarse - 1)]);
                for (int j = coarse; j < fine; ++j) {
                    row.rhs += std::exp2(-j * (s - n / p)) *
                               std::pow(integral[x * rows + static_cast<std::size_t>(j - 1)], 1.0 / p);
                }
                if (row.lhs > 0.0) {
                    out.K_prime = std::max(out.K_prime, row.rhs > 0.0 ? row.lhs / row.rhs : kInfinity);
                }
                out.cauchy.push_back(row);
            }
        }
    }
    return out;
}

}  // namespace capmeasure
