#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "capmeasure/gradient.hpp"
#include "capmeasure/parallel.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/space.hpp"

namespace capmeasure {

enum class Strategy { convex, multistart, lipschitz_test };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::convex: return "convex";
        case Strategy::multistart: return "multistart";
        case Strategy::lipschitz_test: return "lipschitz_test";
    }
    return "unknown";
}

inline Strategy parse_strategy(const std::string& name) {
    if (name == "convex") return Strategy::convex;
    if (name == "multistart") return Strategy::multistart;
    if (name == "lipschitz_test" || name == "lipschitz-test") return Strategy::lipschitz_test;
    throw Error(ErrorKind::config, "strategy must be one of convex, multistart, lipschitz_test");
}

struct SolverOptions {
    std::size_t max_iterations = 5000;  // Newton steps (convex) or pattern sweeps per start (multistart)
    double gap_tolerance = 1e-9;        // relative duality-gap bound for the barrier method
    std::uint64_t seed = 1;
    std::size_t starts = 16;
    std::optional<ScalarField> initial_u;  // warm start for the convex solver
};

/// Certified upper bound on the capacity (p-th power), with its witness.
struct CapacityResult {
    double value = 0.0;
    ScalarField witness_u;
    GradientSequence witness_G;
    std::size_t iterations = 0;
    double final_step = 0.0;
    Strategy strategy = Strategy::convex;
};

/// Objective (||u||_p + ||G||_{L^p(l^q)})^p of a witness pair.
inline double capacity_objective(const MetricMeasureSpace& space, std::span<const double> u, const GradientSequence& g,
                                 const Params& params) {
    return std::pow(tl_norm(space, u, g, params.p, params.q), params.p);
}

namespace detail {

inline void check_target(const MetricMeasureSpace& space, const PointSet& target) {
    for (std::size_t i = 0; i + 1 < target.size(); ++i) {
        if (target[i] >= target[i + 1]) throw Error(ErrorKind::invalid, "target set must be sorted and duplicate-free");
    }
    if (!target.empty() && target.back() >= space.size()) {
        throw Error(ErrorKind::invalid, "target set index " + std::to_string(target.back()) + " out of range");
    }
}

inline std::vector<char> membership(std::size_t n, const PointSet& set) {
    std::vector<char> in(n, 0);
    for (std::size_t i : set) in[i] = 1;
    return in;
}

inline CapacityResult trivial_result(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                                     Strategy strategy) {
    CapacityResult out;
    out.strategy = strategy;
    out.witness_u.assign(space.size(), target.empty() ? 0.0 : 1.0);
    out.witness_G = GradientSequence(space.window(), space.size());
    out.value = capacity_objective(space, out.witness_u, out.witness_G, params);
    return out;
}

/**
 * Log-barrier interior-point method for
 *   min ||u||_p + ||G||_{L^p(l^q)}
 *   s.t. |u(x)-u(y)| < d^s (g_k(x)+g_k(y)) on shell k,  u = 1 on E,  0 < u < 1,  g > 0.
 * The objective is convex for p, q >= 1 and the constraints are linear, so the
 * central path converges to the joint minimizer. Newton systems are dense and
 * solved by Cholesky.
 */
class BarrierSolver {
public:
    BarrierSolver(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                  const SolverOptions& options)
        : space_(space), params_(params), options_(options), window_(space.window()) {
        const std::size_t n = space.size();
        const auto in_e = membership(n, target);
        free_index_.assign(n, -1);
        for (std::size_t x = 0; x < n; ++x) {
            if (!in_e[x]) {
                free_index_[x] = static_cast<int>(free_points_.size());
                free_points_.push_back(x);
            }
        }
        for (std::size_t x : target) fixed_mass_ += space.weight(x);
        cell_index_.assign(static_cast<std::size_t>(window_.count()) * n, -1);
        auto cell = [&](int k, std::size_t x) -> int& {
            return cell_index_[static_cast<std::size_t>(k - window_.k_min) * n + x];
        };
        const std::size_t nf = free_points_.size();
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = 0; y < n; ++y) {
                if (x == y) continue;
                int& c = cell(dyadic_shell(space.distance(x, y)), x);
                if (c < 0) {
                    c = static_cast<int>(nf + cells_.size());
                    cells_.push_back({x, dyadic_shell(space.distance(x, y))});
                }
            }
        }
        // Group cells by point for the l^q column structure.
        point_cells_.assign(n, {});
        for (std::size_t c = 0; c < cells_.size(); ++c) point_cells_[cells_[c].x].push_back(static_cast<int>(nf + c));
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = x + 1; y < n; ++y) {
                if (in_e[x] && in_e[y]) continue;
                const double d = space.distance(x, y);
                const int k = dyadic_shell(d);
                pairs_.push_back({free_index_[x], free_index_[y], cell(k, x), cell(k, y), std::pow(d, params.s)});
            }
        }
        dim_ = nf + cells_.size();
        rows_ = 2 * pairs_.size() + 2 * nf + cells_.size();
    }

    CapacityResult solve() {
        const std::size_t n = space_.size();
        const std::size_t nf = free_points_.size();
        Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));

        ScalarField u0(n, 1.0);
        for (std::size_t i = 0; i < nf; ++i) {
            double v = options_.initial_u ? (*options_.initial_u)[free_points_[i]] : 0.5;
            u0[free_points_[i]] = std::clamp(v, 0.05, 0.95);
            z[static_cast<Eigen::Index>(i)] = u0[free_points_[i]];
        }
        const GradientSequence g0 = canonical_gradient(space_, u0, params_.s);
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            z[static_cast<Eigen::Index>(nf + c)] = 1.5 * g0.at(cells_[c].k, cells_[c].x) + 0.1;
        }

        double t = static_cast<double>(rows_) / std::max(objective(z), 1e-12);
        std::size_t iterations = 0;
        double final_step = 0.0;
        Eigen::VectorXd grad(static_cast<Eigen::Index>(dim_));
        Eigen::MatrixXd hess(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        constexpr double kGrowth = 50.0;
        for (;;) {
            for (int inner = 0; inner < 60 && iterations < options_.max_iterations; ++inner) {
                assemble(z, t, grad, hess);
                const Eigen::VectorXd step = newton_direction(hess, grad);
                const double decrement = -grad.dot(step);
                const double f0 = barrier_value(z, t);
                // Below this the Armijo test is dominated by rounding in f0.
                if (!(decrement > 2e-10 && decrement > 1e-13 * std::abs(f0))) break;
                double alpha = std::min(1.0, 0.99 * max_feasible_step(z, step));
                const double slope = grad.dot(step);
                int halvings = 0;
                while (halvings < 60) {
                    const Eigen::VectorXd trial = z + alpha * step;
                    const double f1 = barrier_value(trial, t);
                    if (std::isfinite(f1) && f1 <= f0 + 0.25 * alpha * slope) break;
                    alpha *= 0.5;
                    ++halvings;
                }
                if (halvings == 60) break;
                z += alpha * step;
                final_step = alpha;
                ++iterations;
            }
            const double f = objective(z);
            if (static_cast<double>(rows_) / t < options_.gap_tolerance * std::max(f, 1e-300)) break;
            if (iterations >= options_.max_iterations) break;
            t *= kGrowth;
        }

        CapacityResult out;
        out.strategy = Strategy::convex;
        out.iterations = iterations;
        out.final_step = final_step;
        out.witness_u.assign(n, 1.0);
        for (std::size_t i = 0; i < nf; ++i) out.witness_u[free_points_[i]] = z[static_cast<Eigen::Index>(i)];
        out.witness_G = GradientSequence(window_, n);
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            out.witness_G.ref(cells_[c].k, cells_[c].x) = z[static_cast<Eigen::Index>(nf + c)];
        }
        out.value = capacity_objective(space_, out.witness_u, out.witness_G, params_);
        return out;
    }

private:
    struct Cell {
        std::size_t x;
        int k;
    };
    struct Pair {
        int ux, uy;  // free-variable index or -1 for u = 1
        int gx, gy;  // gradient cell indices
        double ds;   // d(x,y)^s
    };

    double u_value(const Eigen::VectorXd& z, int idx) const { return idx < 0 ? 1.0 : z[idx]; }

    /// ||u||_p + ||G||_{L^p(l^q)} on the current variables.
    double objective(const Eigen::VectorXd& z) const {
        const double p = params_.p, q = params_.q;
        long double su = fixed_mass_;
        for (std::size_t i = 0; i < free_points_.size(); ++i) {
            su += space_.weight(free_points_[i]) * std::pow(z[static_cast<Eigen::Index>(i)], p);
        }
        long double sg = 0.0L;
        for (std::size_t x = 0; x < point_cells_.size(); ++x) {
            long double col = 0.0L;
            for (int c : point_cells_[x]) col += std::pow(z[c], q);
            sg += space_.weight(x) * std::pow(static_cast<double>(col), p / q);
        }
        return std::pow(static_cast<double>(su), 1.0 / p) + std::pow(static_cast<double>(sg), 1.0 / p);
    }

    /// t * objective - sum log(slack); +inf outside the open feasible region.
    double barrier_value(const Eigen::VectorXd& z, double t) const {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        long double logs = 0.0L;
        const std::size_t nf = free_points_.size();
        for (std::size_t i = 0; i < nf; ++i) {
            const double v = z[static_cast<Eigen::Index>(i)];
            if (!(v > 0.0 && v < 1.0)) return kInf;
            logs += std::log(v) + std::log1p(-v);
        }
        for (std::size_t c = nf; c < dim_; ++c) {
            const double v = z[static_cast<Eigen::Index>(c)];
            if (!(v > 0.0)) return kInf;
            logs += std::log(v);
        }
        for (const Pair& pr : pairs_) {
            const double a = pr.ds * (z[pr.gx] + z[pr.gy]);
            const double delta = u_value(z, pr.ux) - u_value(z, pr.uy);
            const double s1 = a - delta, s2 = a + delta;
            if (!(s1 > 0.0 && s2 > 0.0)) return kInf;
            logs += std::log(s1) + std::log(s2);
        }
        return t * objective(z) - static_cast<double>(logs);
    }

    double max_feasible_step(const Eigen::VectorXd& z, const Eigen::VectorXd& dz) const {
        double alpha = std::numeric_limits<double>::infinity();
        auto limit = [&](double slack, double rate) {
            if (rate < 0.0) alpha = std::min(alpha, -slack / rate);
        };
        const std::size_t nf = free_points_.size();
        for (std::size_t i = 0; i < nf; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            limit(z[e], dz[e]);
            limit(1.0 - z[e], -dz[e]);
        }
        for (std::size_t c = nf; c < dim_; ++c) limit(z[static_cast<Eigen::Index>(c)], dz[static_cast<Eigen::Index>(c)]);
        for (const Pair& pr : pairs_) {
            const double a = pr.ds * (z[pr.gx] + z[pr.gy]);
            const double da = pr.ds * (dz[pr.gx] + dz[pr.gy]);
            const double delta = u_value(z, pr.ux) - u_value(z, pr.uy);
            const double ddelta = (pr.ux < 0 ? 0.0 : dz[pr.ux]) - (pr.uy < 0 ? 0.0 : dz[pr.uy]);
            limit(a - delta, da - ddelta);
            limit(a + delta, da + ddelta);
        }
        return alpha;
    }

    void assemble(const Eigen::VectorXd& z, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
        const double p = params_.p, q = params_.q;
        const std::size_t nf = free_points_.size();
        grad.setZero();
        hess.setZero();

        // Function-value part: a = ||u||_p.
        if (nf > 0) {
            long double su = fixed_mass_;
            for (std::size_t i = 0; i < nf; ++i) su += space_.weight(free_points_[i]) * std::pow(z[static_cast<Eigen::Index>(i)], p);
            const double a = std::pow(static_cast<double>(su), 1.0 / p);
            Eigen::VectorXd v(static_cast<Eigen::Index>(nf));
            for (std::size_t i = 0; i < nf; ++i) {
                const auto e = static_cast<Eigen::Index>(i);
                const double w = space_.weight(free_points_[i]);
                v[e] = w * std::pow(z[e], p - 1.0);
                grad[e] += t * std::pow(a, 1.0 - p) * v[e];
                hess(e, e) += t * std::pow(a, 1.0 - p) * (p - 1.0) * w * std::pow(z[e], p - 2.0);
            }
            const auto m = static_cast<Eigen::Index>(nf);
            hess.topLeftCorner(m, m).noalias() += (t * (1.0 - p) * std::pow(a, 1.0 - 2.0 * p)) * v * v.transpose();
        }

        // Gradient part: b = ||G||_{L^p(l^q)}.
        {
            const std::size_t ng = cells_.size();
            long double sg = 0.0L;
            std::vector<double> column(point_cells_.size());
            for (std::size_t x = 0; x < point_cells_.size(); ++x) {
                long double col = 0.0L;
                for (int c : point_cells_[x]) col += std::pow(z[c], q);
                column[x] = std::pow(static_cast<double>(col), 1.0 / q);
                sg += space_.weight(x) * std::pow(column[x], p);
            }
            const double b = std::pow(static_cast<double>(sg), 1.0 / p);
            const double scale = t * std::pow(b, 1.0 - p);
            Eigen::VectorXd beta(static_cast<Eigen::Index>(ng));
            for (std::size_t x = 0; x < point_cells_.size(); ++x) {
                const double w = space_.weight(x);
                const double cx = column[x];
                for (int c : point_cells_[x]) {
                    const double gc = z[c];
                    beta[c - static_cast<Eigen::Index>(nf)] = w * std::pow(cx, p - q) * std::pow(gc, q - 1.0);
                    grad[c] += scale * beta[c - static_cast<Eigen::Index>(nf)];
                    hess(c, c) += scale * w * (q - 1.0) * std::pow(cx, p - q) * std::pow(gc, q - 2.0);
                    if (p != q) {
                        for (int c2 : point_cells_[x]) {
                            hess(c, c2) += scale * w * (p - q) * std::pow(cx, p - 2.0 * q) * std::pow(gc, q - 1.0) *
                                           std::pow(z[c2], q - 1.0);
                        }
                    }
                }
            }
            const auto off = static_cast<Eigen::Index>(nf);
            const auto m = static_cast<Eigen::Index>(ng);
            hess.block(off, off, m, m).noalias() += (t * (1.0 - p) * std::pow(b, 1.0 - 2.0 * p)) * beta * beta.transpose();
        }

        // Barrier part.
        for (std::size_t i = 0; i < nf; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            const double lo = z[e], hi = 1.0 - z[e];
            grad[e] += -1.0 / lo + 1.0 / hi;
            hess(e, e) += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        for (std::size_t c = nf; c < dim_; ++c) {
            const auto e = static_cast<Eigen::Index>(c);
            grad[e] += -1.0 / z[e];
            hess(e, e) += 1.0 / (z[e] * z[e]);
        }
        for (const Pair& pr : pairs_) {
            const double a = pr.ds * (z[pr.gx] + z[pr.gy]);
            const double delta = u_value(z, pr.ux) - u_value(z, pr.uy);
            const double s1 = a - delta, s2 = a + delta;  // grad s1 = ds e_g - (e_ux - e_uy), grad s2 = ds e_g + (...)
            const double i1 = 1.0 / s1, i2 = 1.0 / s2;
            const double sq_sum = i1 * i1 + i2 * i2;
            const double sq_diff = i2 * i2 - i1 * i1;
            // Gradient: -(1/s1) grad s1 - (1/s2) grad s2.
            const double g_coef = -pr.ds * (i1 + i2);
            grad[pr.gx] += g_coef;
            grad[pr.gy] += g_coef;
            const double u_coef = i1 - i2;
            if (pr.ux >= 0) grad[pr.ux] += u_coef;
            if (pr.uy >= 0) grad[pr.uy] -= u_coef;
            // Hessian: sum (1/s^2) grad s grad s^T.
            const double gg = pr.ds * pr.ds * sq_sum;
            hess(pr.gx, pr.gx) += gg;
            hess(pr.gy, pr.gy) += gg;
            hess(pr.gx, pr.gy) += gg;
            hess(pr.gy, pr.gx) += gg;
            const double gu = pr.ds * sq_diff;
            for (int gidx : {pr.gx, pr.gy}) {
                if (pr.ux >= 0) {
                    hess(gidx, pr.ux) += gu;
                    hess(pr.ux, gidx) += gu;
                }
                if (pr.uy >= 0) {
                    hess(gidx, pr.uy) -= gu;
                    hess(pr.uy, gidx) -= gu;
                }
            }
            if (pr.ux >= 0) hess(pr.ux, pr.ux) += sq_sum;
            if (pr.uy >= 0) hess(pr.uy, pr.uy) += sq_sum;
            if (pr.ux >= 0 && pr.uy >= 0) {
                hess(pr.ux, pr.uy) -= sq_sum;
                hess(pr.uy, pr.ux) -= sq_sum;
            }
        }
    }

    static Eigen::VectorXd newton_direction(Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        double shift = 0.0;
        const double base = std::max(1e-300, hess.diagonal().cwiseAbs().maxCoeff());
        while (llt.info() != Eigen::Success) {
            shift = shift == 0.0 ? 1e-14 * base : shift * 10.0;
            hess.diagonal().array() += shift;
            llt.compute(hess);
            if (shift > base) break;
        }
        return llt.solve(-grad);
    }

    const MetricMeasureSpace& space_;
    Params params_;
    SolverOptions options_;
    ScaleWindow window_;
    std::vector<int> free_index_;
    std::vector<std::size_t> free_points_;
    std::vector<int> cell_index_;
    std::vector<Cell> cells_;
    std::vector<std::vector<int>> point_cells_;
    std::vector<Pair> pairs_;
    double fixed_mass_ = 0.0;
    std::size_t dim_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace detail

/// u(y) = min{1, dist(y, X \ B(x, 2r)) / r}; identically 1 when B(x, 2r) = X.
inline ScalarField ball_test_function(const MetricMeasureSpace& space, std::size_t x, double r) {
    const std::size_t n = space.size();
    PointSet outside;
    for (std::size_t y = 0; y < n; ++y) {
        if (!(space.distance(x, y) < 2.0 * r)) outside.push_back(y);
    }
    ScalarField u(n);
    for (std::size_t y = 0; y < n; ++y) u[y] = std::min(1.0, space.distance_to_set(y, outside) / r);
    return u;
}

/// Best explicit ball test function over centers in E and radii enclosing E.
inline CapacityResult lipschitz_test_capacity(const MetricMeasureSpace& space, const PointSet& target,
                                              const Params& params) {
    detail::check_target(space, target);
    if (target.empty()) return detail::trivial_result(space, target, params, Strategy::lipschitz_test);
    CapacityResult best;
    best.strategy = Strategy::lipschitz_test;
    best.value = std::numeric_limits<double>::infinity();
    std::size_t scanned = 0;
    for (std::size_t x : target) {
        double reach = 0.0;
        for (std::size_t e : target) reach = std::max(reach, space.distance(x, e));
        std::vector<double> radii{reach > 0.0 ? reach * (1.0 + 1e-9) : space.min_separation() > 0.0 ? space.min_separation() : 1.0};
        for (double d : space.distance_row(x)) {
            if (d > reach) radii.push_back(d);
        }
        radii.push_back(space.diameter() > 0.0 ? 2.0 * space.diameter() : 1.0);
        std::sort(radii.begin(), radii.end());
        radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
        for (double r : radii) {
            ScalarField u = ball_test_function(space, x, r);
            bool admissible = true;
            for (std::size_t e : target) admissible = admissible && u[e] >= 1.0;
            if (!admissible) continue;
            ++scanned;
            GradientSequence g = canonical_gradient(space, u, params.s);
            const double value = capacity_objective(space, u, g, params);
            if (value < best.value) {
                best.value = value;
                best.witness_u = std::move(u);
                best.witness_G = std::move(g);
            }
        }
    }
    best.iterations = scanned;
    return best;
}

/// Minimize over u in [0,1] with u = 1 on E and G = canonical_gradient(u).
inline CapacityResult multistart_capacity(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                                          const SolverOptions& options = {}) {
    detail::check_target(space, target);
    const std::size_t n = space.size();
    if (target.empty() || target.size() == n) return detail::trivial_result(space, target, params, Strategy::multistart);
    const auto in_e = detail::membership(n, target);
    std::vector<std::size_t> free_points;
    for (std::size_t x = 0; x < n; ++x)
        if (!in_e[x]) free_points.push_back(x);

    auto evaluate = [&](const ScalarField& u) {
        return capacity_objective(space, u, canonical_gradient(space, u, params.s), params);
    };

    std::vector<ScalarField> starts;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < options.starts; ++i) {
        ScalarField u(n, 1.0);
        for (std::size_t x : free_points) u[x] = unit(rng);
        starts.push_back(std::move(u));
    }
    starts.push_back(lipschitz_test_capacity(space, target, params).witness_u);

    struct Local {
        ScalarField u;
        double value;
        std::size_t sweeps;
        double step;
    };
    std::vector<Local> locals(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
        ScalarField u = starts[s];
        for (double& v : u) v = std::clamp(v, 0.0, 1.0);
        double value = evaluate(u);
        double h = 0.25;
        std::size_t sweeps = 0;
        while (h >= 1e-7 && sweeps < options.max_iterations) {
            ++sweeps;
            bool improved = false;
            for (std::size_t x : free_points) {
                for (double dir : {1.0, -1.0}) {
                    const double old = u[x];
                    const double moved = std::clamp(old + dir * h, 0.0, 1.0);
                    if (moved == old) continue;
                    u[x] = moved;
                    const double trial = evaluate(u);
                    if (trial < value) {
                        value = trial;
                        improved = true;
                        break;
                    }
                    u[x] = old;
                }
            }
            if (!improved) h *= 0.5;
        }
        locals[s] = {std::move(u), value, sweeps, h};
    });

    std::size_t pick = 0;
    std::size_t total_sweeps = 0;
    for (std::size_t s = 0; s < locals.size(); ++s) {
        total_sweeps += locals[s].sweeps;
        if (locals[s].value < locals[pick].value) pick = s;
    }
    CapacityResult out;
    out.strategy = Strategy::multistart;
    out.witness_u = std::move(locals[pick].u);
    out.witness_G = canonical_gradient(space, out.witness_u, params.s);
    out.value = capacity_objective(space, out.witness_u, out.witness_G, params);
    out.iterations = total_sweeps;
    out.final_step = locals[pick].step;
    return out;
}

/// Joint convex solve over (u, G); requires p, q >= 1 and finite q.
inline CapacityResult convex_capacity(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                                      const SolverOptions& options = {}) {
    detail::check_target(space, target);
    if (params.p < 1.0 || params.q < 1.0) throw Error(ErrorKind::config, "convex strategy requires p >= 1 and q >= 1");
    if (std::isinf(params.q)) throw Error(ErrorKind::config, "convex strategy requires finite q; use multistart");
    if (target.empty() || target.size() == space.size()) {
        return detail::trivial_result(space, target, params, Strategy::convex);
    }
    return detail::BarrierSolver(space, target, params, options).solve();
}

inline CapacityResult capacity_upper(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                                     Strategy strategy, const SolverOptions& options = {}) {
    params.validate();
    switch (strategy) {
        case Strategy::convex: return convex_capacity(space, target, params, options);
        case Strategy::multistart: return multistart_capacity(space, target, params, options);
        case Strategy::lipschitz_test: return lipschitz_test_capacity(space, target, params);
    }
    throw Error(ErrorKind::invalid, "unknown strategy");
}

struct WitnessCheck {
    bool ok = true;
    std::string reason;
};

/// Independent re-validation of a capacity witness.
inline WitnessCheck check_witness(const MetricMeasureSpace& space, const PointSet& target, const Params& params,
                                  const CapacityResult& r) {
    for (std::size_t e : target) {
        if (!(r.witness_u[e] >= 1.0 - 1e-9)) return {false, "witness below 1 at " + std::to_string(e)};
    }
    const GradientCheck gc = is_valid_gradient(space, r.witness_u, params.s, r.witness_G);
    if (!gc.valid) return {false, "witness gradient invalid at pair (" + std::to_string(gc.x) + "," + std::to_string(gc.y) + ")"};
    const double v = capacity_objective(space, r.witness_u, r.witness_G, params);
    if (std::abs(v - r.value) > 1e-9 * std::max(1.0, std::abs(v))) return {false, "value does not match witness"};
    return {};
}

struct BallBound {
    double value = 0.0;      // ||u_test||^p with the canonical gradient
    double reference = 0.0;  // mu(B(x,r)) / r^{sp}
    double ratio = 0.0;      // value / reference
    ScalarField test_function;
};

inline BallBound ball_capacity_bound(const MetricMeasureSpace& space, std::size_t x, double r, const Params& params) {
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "ball radius must be positive");
    BallBound out;
    out.test_function = ball_test_function(space, x, r);
    const GradientSequence g = canonical_gradient(space, out.test_function, params.s);
    out.value = capacity_objective(space, out.test_function, g, params);
    out.reference = space.ball_measure(x, r) / std::pow(r, params.s * params.p);
    out.ratio = out.value / out.reference;
    return out;
}

struct SubadditivityTrial {
    double ratio = 0.0;  // cap(union)^r / sum cap(E_i)^r
    double union_value = 0.0;
    std::vector<double> piece_values;
    bool monotone = true;  // cap(E_i) <= cap(union) within tolerance
};

struct SubadditivityReport {
    double constant = 0.0;  // max ratio over trials
    bool monotone = true;
    std::vector<SubadditivityTrial> trials;
};

inline constexpr double kSolverTolerance = 1e-6;

inline SubadditivityTrial subadditivity_trial(const MetricMeasureSpace& space, const std::vector<PointSet>& sets,
                                              const Params& params, Strategy strategy,
                                              const SolverOptions& options = {}) {
    if (sets.size() < 2) throw Error(ErrorKind::invalid, "subadditivity needs at least two sets");
    const double r = params.r_sub();
    PointSet all;
    for (const auto& s : sets) all = set_union(all, s);
    SubadditivityTrial out;
    out.union_value = capacity_upper(space, all, params, strategy, options).value;
    double denom = 0.0;
    for (const auto& s : sets) {
        const double v = capacity_upper(space, s, params, strategy, options).value;
        out.piece_values.push_back(v);
        denom += std::pow(v, r);
        if (v > out.union_value + 2.0 * kSolverTolerance * std::max(1.0, out.union_value)) out.monotone = false;
    }
    out.ratio = denom > 0.0 ? std::pow(out.union_value, r) / denom : (out.union_value > 0.0 ? kInfinity : 0.0);
    return out;
}

inline SubadditivityReport subadditivity_check(const MetricMeasureSpace& space,
                                               const std::vector<std::vector<PointSet>>& trials, const Params& params,
                                               Strategy strategy, const SolverOptions& options = {}) {
    SubadditivityReport report;
    report.trials.resize(trials.size());
    parallel_for(trials.size(), [&](std::size_t i) {
        report.trials[i] = subadditivity_trial(space, trials[i], params, strategy, options);
    });
    for (const auto& t : report.trials) {
        report.constant = std::max(report.constant, t.ratio);
        report.monotone = report.monotone && t.monotone;
    }
    return report;
}

}  // namespace capmeasure
