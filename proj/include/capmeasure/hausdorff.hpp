#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "capmeasure/space.hpp"

namespace capmeasure {

enum class GaugeKind { theta, log, euclid_log, euclid_log_half };

inline const char* gauge_kind_name(GaugeKind k) {
    switch (k) {
        case GaugeKind::theta: return "theta_gauge";
        case GaugeKind::log: return "log_gauge";
        case GaugeKind::euclid_log: return "euclid_log";
        case GaugeKind::euclid_log_half: return "euclid_log_half";
    }
    return "unknown";
}

/**
 * Ball gauge h(B(x, rho)).
 *
 *   theta:           (mu(B)/rho^{sp})^theta
 *   log:             mu(B)/rho^{sp} * ln(1/rho)^{-p-eps}
 *   euclid_log:      rho^{n-sp} ln(1/rho)^{-p-eps}
 *   euclid_log_half: rho^{n-sp} ln(1/rho)^{-p-eps/2}
 *
 * The log kinds are only defined for rho < 1.
 */
struct Gauge {
    GaugeKind kind = GaugeKind::theta;
    double s = 0.5;
    double p = 2.0;
    double theta = 1.0;
    double eps = 1.0;
    double dim = 1.0;

    bool needs_small_radius() const { return kind != GaugeKind::theta; }
    bool radial() const { return kind == GaugeKind::euclid_log || kind == GaugeKind::euclid_log_half; }

    /// Value for a radial kind at radius t (0 at t = 0).
    double radial_value(double t) const {
        if (!radial()) throw Error(ErrorKind::invalid, std::string(gauge_kind_name(kind)) + " depends on the ball");
        if (t == 0.0) return 0.0;
        check_radius(t);
        const double exponent = kind == GaugeKind::euclid_log ? p + eps : p + 0.5 * eps;
        return std::pow(t, dim - s * p) * std::pow(std::log(1.0 / t), -exponent);
    }

    double operator()(const MetricMeasureSpace& space, std::size_t center, double rho) const {
        if (radial()) return radial_value(rho);
        check_radius(rho);
        const double ratio = space.ball_measure(center, rho) / std::pow(rho, s * p);
        if (kind == GaugeKind::theta) return std::pow(ratio, theta);
        return ratio * std::pow(std::log(1.0 / rho), -(p + eps));
    }

    void check_radius(double rho) const {
        if (!(rho > 0.0)) throw Error(ErrorKind::domain, "gauge radius must be positive");
        if (needs_small_radius() && !(rho < 1.0)) {
            throw Error(ErrorKind::domain, std::string(gauge_kind_name(kind)) + " is only defined for radius < 1");
        }
    }
};

inline Gauge theta_gauge(double s, double p, double theta) { return {GaugeKind::theta, s, p, theta, 1.0, 1.0}; }
inline Gauge log_gauge(double s, double p, double eps) { return {GaugeKind::log, s, p, 1.0, eps, 1.0}; }
inline Gauge euclid_log(double dim, double s, double p, double eps) {
    return {GaugeKind::euclid_log, s, p, 1.0, eps, dim};
}
inline Gauge euclid_log_half(double dim, double s, double p, double eps) {
    return {GaugeKind::euclid_log_half, s, p, 1.0, eps, dim};
}

inline double gauge_eval(const Gauge& gauge, const MetricMeasureSpace& space, std::size_t center, double rho) {
    return gauge(space, center, rho);
}

struct Ball {
    std::size_t center = 0;
    double radius = 0.0;
    double gauge = 0.0;
};

enum class ContentMethod { exact, greedy };

inline const char* content_method_name(ContentMethod m) { return m == ContentMethod::exact ? "exact" : "greedy"; }

inline ContentMethod parse_content_method(const std::string& name) {
    if (name == "exact") return ContentMethod::exact;
    if (name == "greedy") return ContentMethod::greedy;
    throw Error(ErrorKind::config, "method must be exact or greedy");
}

struct CoveringSolution {
    std::vector<Ball> balls;
    double gauge_sum = 0.0;
    bool covers = true;
    ContentMethod method = ContentMethod::exact;
};

/// Largest target set the exact search accepts.
inline constexpr std::size_t kMaxExactTarget = 128;

namespace detail {

using Mask = std::array<std::uint64_t, 2>;

inline bool mask_test(const Mask& m, std::size_t i) { return (m[i >> 6] >> (i & 63)) & 1u; }
inline void mask_set(Mask& m, std::size_t i) { m[i >> 6] |= std::uint64_t{1} << (i & 63); }
inline Mask mask_or(const Mask& a, const Mask& b) { return {a[0] | b[0], a[1] | b[1]}; }
inline bool mask_subset(const Mask& a, const Mask& b) { return (a[0] & ~b[0]) == 0 && (a[1] & ~b[1]) == 0; }
inline bool mask_empty(const Mask& m) { return m[0] == 0 && m[1] == 0; }

struct MaskHash {
    std::size_t operator()(const Mask& m) const noexcept {
        return std::hash<std::uint64_t>{}(m[0] * 0x9E3779B97F4A7C15ull ^ m[1]);
    }
};

struct CandidateBall {
    Ball ball;
    std::vector<std::size_t> hits;  // positions in the target list
    Mask mask{};
};

/**
 * Candidate radii up to delta; log kinds keep only radii below 1.
 *
 * delta itself is not added: the family must grow with delta for the content
 * to decrease in delta.
 */
inline std::vector<double> admissible_radii(const MetricMeasureSpace& space, const Gauge& gauge, double delta) {
    std::vector<double> radii;
    for (double r : space.candidate_radii()) {
        if (r <= delta) radii.push_back(r);
    }
    if (gauge.needs_small_radius()) {
        radii.erase(std::remove_if(radii.begin(), radii.end(), [](double r) { return !(r < 1.0); }), radii.end());
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    return radii;
}

/**
 * Candidate balls restricted to the target, one per distinct covered subset
 * (cheapest kept), with balls dominated by a cheaper superset removed.
 */
inline std::vector<CandidateBall> candidate_balls(const MetricMeasureSpace& space, const PointSet& target,
                                                  const Gauge& gauge, double delta) {
    const auto radii = admissible_radii(space, gauge, delta);
    std::vector<CandidateBall> all;
    const bool use_mask = target.size() <= kMaxExactTarget;
    for (std::size_t c = 0; c < space.size(); ++c) {
        for (double r : radii) {
            CandidateBall cb;
            for (std::size_t t = 0; t < target.size(); ++t) {
                if (space.distance(c, target[t]) < r) cb.hits.push_back(t);
            }
            if (cb.hits.empty()) continue;
            cb.ball = {c, r, gauge(space, c, r)};
            if (use_mask) {
                for (std::size_t t : cb.hits) mask_set(cb.mask, t);
            }
            all.push_back(std::move(cb));
        }
    }
    // Cheapest ball per covered subset; stable order keeps the result deterministic.
    std::stable_sort(all.begin(), all.end(), [](const CandidateBall& a, const CandidateBall& b) {
        if (a.hits != b.hits) return a.hits < b.hits;
        return a.ball.gauge < b.ball.gauge;
    });
    std::vector<CandidateBall> unique;
    for (auto& cb : all) {
        if (!unique.empty() && unique.back().hits == cb.hits) continue;
        unique.push_back(std::move(cb));
    }
    if (!use_mask) return unique;
    std::vector<CandidateBall> kept;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < unique.size() && !dominated; ++j) {
            if (i == j) continue;
            // Masks are distinct here, so a superset is strict and domination cannot be mutual.
            dominated = unique[j].ball.gauge <= unique[i].ball.gauge && mask_subset(unique[i].mask, unique[j].mask);
        }
        if (!dominated) kept.push_back(unique[i]);
    }
    return kept;
}

class ExactCover {
public:
    ExactCover(const std::vector<CandidateBall>& balls, std::size_t size) : balls_(balls), size_(size) {
        by_element_.assign(size, {});
        for (std::size_t b = 0; b < balls.size(); ++b)
            for (std::size_t t : balls[b].hits) by_element_[t].push_back(b);
        for (std::size_t t = 0; t < size; ++t) mask_set(full_, t);
    }

    /// Minimum gauge sum covering the complement of `covered`.
    double solve(const Mask& covered) {
        if (covered == full_) return 0.0;
        if (auto it = memo_.find(covered); it != memo_.end()) return it->second.first;
        std::size_t first = 0;
        while (mask_test(covered, first)) ++first;
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = balls_.size();
        for (std::size_t b : by_element_[first]) {
            const double v = balls_[b].ball.gauge + solve(mask_or(covered, balls_[b].mask));
            if (v < best) {
                best = v;
                pick = b;
            }
        }
        memo_.emplace(covered, std::make_pair(best, pick));
        return best;
    }

    std::vector<std::size_t> reconstruct() const {
        std::vector<std::size_t> chosen;
        Mask covered{};
        while (covered != full_) {
            const auto& entry = memo_.at(covered);
            chosen.push_back(entry.second);
            covered = mask_or(covered, balls_[entry.second].mask);
        }
        return chosen;
    }

private:
    const std::vector<CandidateBall>& balls_;
    std::size_t size_;
    Mask full_{};
    std::vector<std::vector<std::size_t>> by_element_;
    std::unordered_map<Mask, std::pair<double, std::size_t>, MaskHash> memo_;
};

}  // namespace detail

/**
 * Discrete h-content inf{sum h(B_i) : E in union B_i, radius_i <= delta} over
 * candidate balls centered at points of the space.
 */
inline CoveringSolution content(const MetricMeasureSpace& space, const PointSet& target, const Gauge& gauge,
                                double delta, ContentMethod method) {
    CoveringSolution out;
    out.method = method;
    if (target.empty()) return out;
    auto candidates = detail::candidate_balls(space, target, gauge, delta);
    std::vector<char> reachable(target.size(), 0);
    for (const auto& cb : candidates)
        for (std::size_t t : cb.hits) reachable[t] = 1;
    if (std::find(reachable.begin(), reachable.end(), 0) != reachable.end()) {
        out.covers = false;
        out.gauge_sum = std::numeric_limits<double>::infinity();
        return out;
    }
    if (method == ContentMethod::exact) {
        if (target.size() > kMaxExactTarget) {
            throw Error(ErrorKind::invalid, "exact content supports at most " + std::to_string(kMaxExactTarget) +
                                                " target points; use greedy");
        }
        detail::ExactCover solver(candidates, target.size());
        solver.solve(detail::Mask{});
        for (std::size_t b : solver.reconstruct()) out.balls.push_back(candidates[b].ball);
    } else {
        std::vector<double> weight(target.size());
        for (std::size_t t = 0; t < target.size(); ++t) weight[t] = space.weight(target[t]);
        std::vector<char> covered(target.size(), 0);
        std::size_t remaining = target.size();
        while (remaining > 0) {
            std::size_t pick = candidates.size();
            double best = -1.0;
            for (std::size_t b = 0; b < candidates.size(); ++b) {
                double gain = 0.0;
                for (std::size_t t : candidates[b].hits)
                    if (!covered[t]) gain += weight[t];
                if (gain == 0.0) continue;
                const double g = candidates[b].ball.gauge;
                const double score = g > 0.0 ? gain / g : std::numeric_limits<double>::infinity();
                if (score > best) {
                    best = score;
                    pick = b;
                }
            }
            for (std::size_t t : candidates[pick].hits) {
                if (!covered[t]) {
                    covered[t] = 1;
                    --remaining;
                }
            }
            out.balls.push_back(candidates[pick].ball);
        }
    }
    for (const Ball& b : out.balls) out.gauge_sum += b.gauge;
    return out;
}

/// True when every target point lies in some ball of the solution.
inline bool covers_target(const MetricMeasureSpace& space, const PointSet& target, const std::vector<Ball>& balls) {
    for (std::size_t e : target) {
        bool hit = false;
        for (const Ball& b : balls) hit = hit || space.distance(b.center, e) < b.radius;
        if (!hit) return false;
    }
    return true;
}

struct FiveBCheck {
    bool disjoint = true;
    bool dilates_cover = true;
    bool diameter_witness = true;  // each input ball meets a chosen ball of radius more than half its own
    std::size_t offending = 0;     // input index of the first failure
};

/**
 * Vitali-type selection: scan balls by decreasing radius (input order breaks
 * ties) and keep each ball whose point set misses every ball kept so far.
 * Returns indices into `balls`.
 */
inline std::vector<std::size_t> five_b_cover(const MetricMeasureSpace& space, const std::vector<Ball>& balls) {
    for (const Ball& b : balls) {
        if (!(b.radius > 0.0)) throw Error(ErrorKind::domain, "5B covering needs positive radii");
    }
    std::vector<std::size_t> order(balls.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return balls[a].radius > balls[b].radius; });
    std::vector<char> taken(space.size(), 0);
    std::vector<std::size_t> chosen;
    for (std::size_t i : order) {
        const PointSet pts = space.ball(balls[i].center, balls[i].radius);
        bool free = true;
        for (std::size_t y : pts) free = free && !taken[y];
        if (!free) continue;
        for (std::size_t y : pts) taken[y] = 1;
        chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

/// Exhaustive re-check of the three covering-lemma properties; diameters are nominal (2 * radius).
inline FiveBCheck check_five_b(const MetricMeasureSpace& space, const std::vector<Ball>& balls,
                               const std::vector<std::size_t>& chosen) {
    FiveBCheck out;
    std::vector<PointSet> sets(balls.size());
    for (std::size_t i = 0; i < balls.size(); ++i) sets[i] = space.ball(balls[i].center, balls[i].radius);
    auto meets = [](const PointSet& a, const PointSet& b) {
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] == b[j]) return true;
            if (a[i] < b[j]) ++i; else ++j;
        }
        return false;
    };
    for (std::size_t a = 0; a < chosen.size() && out.disjoint; ++a) {
        for (std::size_t b = a + 1; b < chosen.size(); ++b) {
            if (meets(sets[chosen[a]], sets[chosen[b]])) {
                out.disjoint = false;
                out.offending = chosen[b];
                break;
            }
        }
    }
    for (std::size_t i = 0; i < balls.size(); ++i) {
        bool witness = false;
        for (std::size_t c : chosen) {
            witness = witness || (meets(sets[i], sets[c]) && 2.0 * balls[i].radius < 2.0 * (2.0 * balls[c].radius));
        }
        if (!witness && out.diameter_witness) {
            out.diameter_witness = false;
            if (out.disjoint) out.offending = i;
        }
        for (std::size_t y : sets[i]) {
            bool inside = false;
            for (std::size_t c : chosen) inside = inside || space.distance(balls[c].center, y) < 5.0 * balls[c].radius;
            if (!inside && out.dilates_cover) {
                out.dilates_cover = false;
                if (out.disjoint && out.diameter_witness) out.offending = i;
            }
        }
    }
    return out;
}

}  // namespace capmeasure
