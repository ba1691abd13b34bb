#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "capmeasure/error.hpp"

namespace capmeasure {

/// Sorted, duplicate-free list of point indices.
using PointSet = std::vector<std::size_t>;

inline PointSet normalized(PointSet set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

inline bool is_subset(const PointSet& a, const PointSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline PointSet set_union(const PointSet& a, const PointSet& b) {
    PointSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// The unique k with 2^{k-1} <= d < 2^k, for d > 0.
inline int dyadic_shell(double d) {
    int e = 0;
    std::frexp(d, &e);
    return e;
}

/// Inclusive range of dyadic shell indices. Shell k holds pairs with 2^{k-1} <= d < 2^k.
struct ScaleWindow {
    int k_min = 0;
    int k_max = 0;

    int count() const { return k_max - k_min + 1; }
    bool contains(int k) const { return k >= k_min && k <= k_max; }
    friend bool operator==(const ScaleWindow&, const ScaleWindow&) = default;
};

/**
 * Finite metric measure space (X, d, mu).
 *
 * Immutable after construction. Distances are stored as a dense row-major
 * n x n table; coordinates are optional and only carried for spaces that
 * come from a Euclidean grid or a coordinate descriptor.
 */
class MetricMeasureSpace {
public:
    enum class MetricKind { matrix, euclidean };

    static constexpr double kTriangleSlack = 1e-9;
    static constexpr std::size_t kExhaustiveTriangleLimit = 512;

    /// Explicit distance table. `coords` may be attached as metadata.
    static MetricMeasureSpace from_matrix(const std::vector<std::vector<double>>& matrix,
                                          std::vector<double> weights = {},
                                          std::vector<std::vector<double>> coords = {}) {
        const std::size_t n = matrix.size();
        std::vector<double> flat(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            if (matrix[i].size() != n) {
                throw Error(ErrorKind::invalid, "distance matrix row " + std::to_string(i) + " has wrong length");
            }
            std::copy(matrix[i].begin(), matrix[i].end(), flat.begin() + static_cast<std::ptrdiff_t>(i * n));
        }
        return MetricMeasureSpace(n, std::move(flat), std::move(weights), std::move(coords), MetricKind::matrix);
    }

    static MetricMeasureSpace from_flat_matrix(std::size_t n, std::vector<double> flat,
                                               std::vector<double> weights = {},
                                               std::vector<std::vector<double>> coords = {}) {
        if (flat.size() != n * n) throw Error(ErrorKind::invalid, "distance table size is not n*n");
        return MetricMeasureSpace(n, std::move(flat), std::move(weights), std::move(coords), MetricKind::matrix);
    }

    /// Euclidean metric computed from coordinates.
    static MetricMeasureSpace from_coords(std::vector<std::vector<double>> coords, std::vector<double> weights = {}) {
        const std::size_t n = coords.size();
        const std::size_t dim = n ? coords[0].size() : 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (coords[i].size() != dim) {
                throw Error(ErrorKind::invalid, "coordinate row " + std::to_string(i) + " has wrong dimension");
            }
        }
        std::vector<double> flat(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double diff = coords[i][c] - coords[j][c];
                    acc += diff * diff;
                }
                flat[i * n + j] = flat[j * n + i] = std::sqrt(acc);
            }
        }
        return MetricMeasureSpace(n, std::move(flat), std::move(weights), std::move(coords), MetricKind::euclidean);
    }

    std::size_t size() const { return n_; }
    MetricKind metric_kind() const { return kind_; }

    double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
    std::span<const double> distance_row(std::size_t i) const { return {dist_.data() + i * n_, n_}; }

    double weight(std::size_t i) const { return weight_[i]; }
    std::span<const double> weights() const { return weight_; }
    double total_measure() const { return total_; }

    double measure(const PointSet& set) const {
        double acc = 0.0;
        for (std::size_t i : set) acc += weight_[i];
        return acc;
    }

    bool has_coords() const { return !coords_.empty(); }
    std::size_t dim() const { return coords_.empty() ? 0 : coords_[0].size(); }
    const std::vector<std::vector<double>>& coords() const { return coords_; }

    const ScaleWindow& window() const { return window_; }
    double diameter() const { return distances_.empty() ? 0.0 : distances_.back(); }
    double min_separation() const { return distances_.empty() ? 0.0 : distances_.front(); }

    /// Sorted distinct positive pairwise distances.
    const std::vector<double>& distinct_distances() const { return distances_; }

    /// Radii at which ball contents can change, plus one radius above the diameter.
    std::vector<double> candidate_radii() const {
        std::vector<double> radii = distances_;
        radii.push_back(diameter() > 0.0 ? 2.0 * diameter() : 1.0);
        return radii;
    }

    int shell(std::size_t i, std::size_t j) const { return dyadic_shell(distance(i, j)); }

    /// Open ball {y : d(center, y) < rho}.
    PointSet ball(std::size_t center, double rho) const {
        PointSet out;
        const auto row = distance_row(center);
        for (std::size_t y = 0; y < n_; ++y) {
            if (row[y] < rho) out.push_back(y);
        }
        return out;
    }

    double ball_measure(std::size_t center, double rho) const {
        double acc = 0.0;
        const auto row = distance_row(center);
        for (std::size_t y = 0; y < n_; ++y) {
            if (row[y] < rho) acc += weight_[y];
        }
        return acc;
    }

    /// {y : 2^{k-1} <= d(x, y) < 2^k}.
    PointSet annulus(std::size_t x, int k) const {
        PointSet out;
        const double lo = std::ldexp(1.0, k - 1);
        const double hi = std::ldexp(1.0, k);
        const auto row = distance_row(x);
        for (std::size_t y = 0; y < n_; ++y) {
            if (row[y] >= lo && row[y] < hi) out.push_back(y);
        }
        return out;
    }

    /// Distance from y to a set; +infinity for the empty set.
    double distance_to_set(std::size_t y, const PointSet& set) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t z : set) best = std::min(best, distance(y, z));
        return best;
    }

private:
    MetricMeasureSpace(std::size_t n, std::vector<double> flat, std::vector<double> weights,
                       std::vector<std::vector<double>> coords, MetricKind kind)
        : n_(n), dist_(std::move(flat)), weight_(std::move(weights)), coords_(std::move(coords)), kind_(kind) {
        if (n_ == 0) throw Error(ErrorKind::invalid, "space must contain at least one point");
        if (weight_.empty()) weight_.assign(n_, 1.0);
        if (weight_.size() != n_) throw Error(ErrorKind::invalid, "weights length does not match point count");
        if (!coords_.empty() && coords_.size() != n_) {
            throw Error(ErrorKind::invalid, "coords length does not match point count");
        }
        validate();
        total_ = 0.0;
        for (double w : weight_) total_ += w;
        collect_distances();
    }

    static std::string indices(std::initializer_list<std::size_t> ids) {
        std::ostringstream os;
        os << '(';
        bool first = true;
        for (std::size_t i : ids) {
            os << (first ? "" : ",") << i;
            first = false;
        }
        os << ')';
        return os.str();
    }

    void validate() const {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!(weight_[i] > 0.0) || !std::isfinite(weight_[i])) {
                throw Error(ErrorKind::invalid, "nonpositive weight at " + indices({i}));
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (distance(i, i) != 0.0) throw Error(ErrorKind::invalid, "nonzero self-distance at " + indices({i, i}));
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double d = distance(i, j);
                if (!std::isfinite(d) || d < 0.0) throw Error(ErrorKind::invalid, "invalid distance at " + indices({i, j}));
                if (d != distance(j, i)) throw Error(ErrorKind::invalid, "asymmetric distance at " + indices({i, j}));
                if (d == 0.0) throw Error(ErrorKind::invalid, "zero distance between distinct points " + indices({i, j}));
            }
        }
        auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
            if (distance(i, k) > distance(i, j) + distance(j, k) + kTriangleSlack) {
                throw Error(ErrorKind::invalid, "triangle inequality violated at " + indices({i, j, k}));
            }
        };
        if (n_ <= kExhaustiveTriangleLimit) {
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    for (std::size_t k = 0; k < n_; ++k) check(i, j, k);
        } else {
            std::mt19937_64 rng(0x5eedu);
            std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
            for (int t = 0; t < 200000; ++t) check(pick(rng), pick(rng), pick(rng));
        }
    }

    void collect_distances() {
        distances_.clear();
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) distances_.push_back(distance(i, j));
        std::sort(distances_.begin(), distances_.end());
        distances_.erase(std::unique(distances_.begin(), distances_.end()), distances_.end());
        if (distances_.empty()) {
            window_ = {0, 0};
        } else {
            window_ = {dyadic_shell(distances_.front()), dyadic_shell(distances_.back())};
        }
    }

    std::size_t n_ = 0;
    std::vector<double> dist_;
    std::vector<double> weight_;
    std::vector<std::vector<double>> coords_;
    MetricKind kind_ = MetricKind::matrix;
    double total_ = 0.0;
    std::vector<double> distances_;
    ScaleWindow window_;
};

/**
 * Empirical doubling constant: max over centers x and candidate radii r of
 * mu(B(x,2r)) / mu(B(x,r)). Returns 1 for a single point.
 */
inline double doubling_constant(const MetricMeasureSpace& space) {
    const std::size_t n = space.size();
    if (n == 1) return 1.0;
    const auto radii = space.candidate_radii();
    double worst = 1.0;
    std::vector<std::size_t> order(n);
    std::vector<double> sorted_d(n), prefix(n + 1);
    for (std::size_t x = 0; x < n; ++x) {
        const auto row = space.distance_row(x);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        prefix[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sorted_d[i] = row[order[i]];
            prefix[i + 1] = prefix[i] + space.weight(order[i]);
        }
        auto mass_below = [&](double r) {
            const auto it = std::lower_bound(sorted_d.begin(), sorted_d.end(), r);
            return prefix[static_cast<std::size_t>(it - sorted_d.begin())];
        };
        for (double r : radii) worst = std::max(worst, mass_below(2.0 * r) / mass_below(r));
    }
    return worst;
}

/// Space plus an optional distinguished subset (for example the Cantor points).
struct GeneratedSpace {
    MetricMeasureSpace space;
    std::optional<PointSet> distinguished;
};

inline constexpr std::size_t kMaxGeneratedPoints = 4096;
inline constexpr int kMaxCantorLevel = 8;

/// Unit-interval grid: points i/(n-1), weights 1/n.
inline MetricMeasureSpace grid1d(std::size_t n) {
    if (n == 0 || n > kMaxGeneratedPoints) throw Error(ErrorKind::config, "grid1d size must lie in [1,4096]");
    if (n == 1) return MetricMeasureSpace::from_flat_matrix(1, {0.0}, {1.0}, {{0.0}});
    const double steps = static_cast<double>(n - 1);
    std::vector<double> flat(n * n);
    std::vector<std::vector<double>> coords(n);
    for (std::size_t i = 0; i < n; ++i) {
        coords[i] = {static_cast<double>(i) / steps};
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t off = i > j ? i - j : j - i;
            flat[i * n + j] = static_cast<double>(off) / steps;
        }
    }
    return MetricMeasureSpace::from_flat_matrix(n, std::move(flat), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                                std::move(coords));
}

/// Unit-square grid with n x n points, weights 1/n^2; point (i,j) has index i*n+j.
inline MetricMeasureSpace grid2d(std::size_t n) {
    if (n == 0 || n * n > kMaxGeneratedPoints) throw Error(ErrorKind::config, "grid2d side must lie in [1,64]");
    const std::size_t total = n * n;
    if (total == 1) return MetricMeasureSpace::from_flat_matrix(1, {0.0}, {1.0}, {{0.0, 0.0}});
    const double steps = static_cast<double>(n - 1);
    std::vector<double> flat(total * total);
    std::vector<std::vector<double>> coords(total);
    for (std::size_t a = 0; a < total; ++a) {
        const std::size_t ai = a / n, aj = a % n;
        coords[a] = {static_cast<double>(ai) / steps, static_cast<double>(aj) / steps};
        for (std::size_t b = 0; b < total; ++b) {
            const std::size_t bi = b / n, bj = b % n;
            const std::size_t di = ai > bi ? ai - bi : bi - ai;
            const std::size_t dj = aj > bj ? aj - bj : bj - aj;
            flat[a * total + b] = std::sqrt(static_cast<double>(di * di + dj * dj)) / steps;
        }
    }
    const double w = 1.0 / static_cast<double>(total);
    return MetricMeasureSpace::from_flat_matrix(total, std::move(flat), std::vector<double>(total, w),
                                                std::move(coords));
}

/**
 * Cantor construction on the 3^ambient_level point unit-interval grid.
 * The distinguished set holds the indices whose leading `level` ternary digits
 * (out of `ambient_level`) avoid the digit 1.
 */
inline GeneratedSpace cantor(int level, int ambient_level = -1) {
    if (ambient_level < 0) ambient_level = level;
    if (level < 0 || level > kMaxCantorLevel) throw Error(ErrorKind::config, "cantor level must lie in [0,8]");
    if (ambient_level < level) throw Error(ErrorKind::config, "cantor ambient level must be >= level");
    std::size_t n = 1;
    for (int i = 0; i < ambient_level; ++i) n *= 3;
    if (n > kMaxGeneratedPoints) throw Error(ErrorKind::config, "cantor ambient grid exceeds 4096 points");
    PointSet set;
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rest = idx;
        std::vector<int> digits(static_cast<std::size_t>(ambient_level));
        for (int d = ambient_level - 1; d >= 0; --d) {
            digits[static_cast<std::size_t>(d)] = static_cast<int>(rest % 3);
            rest /= 3;
        }
        bool keep = true;
        for (int d = 0; d < level; ++d) keep = keep && digits[static_cast<std::size_t>(d)] != 1;
        if (keep) set.push_back(idx);
    }
    return {grid1d(n), std::move(set)};
}

}  // namespace capmeasure
