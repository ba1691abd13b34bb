#pragma once

#include <random>
#include <vector>

#include "capmeasure/space.hpp"

namespace capmeasure::gen {

/// Random Euclidean cloud in [0,1]^dim with weights in [0.5, 2]; dim 0 picks 1..3.
inline MetricMeasureSpace random_space(std::mt19937_64& rng, std::size_t n, int dim = 0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (dim == 0) dim = 1 + static_cast<int>(rng() % 3);
    for (;;) {
        std::vector<std::vector<double>> coords(n, std::vector<double>(static_cast<std::size_t>(dim)));
        for (auto& c : coords)
            for (double& v : c) v = unit(rng);
        std::vector<double> weights(n);
        for (double& w : weights) w = 0.5 + 1.5 * unit(rng);
        try {
            return MetricMeasureSpace::from_coords(std::move(coords), std::move(weights));
        } catch (const Error&) {
            // coincident points: draw again
        }
    }
}

/// Integer-valued field in [lo, hi] so that ties are frequent.
inline std::vector<double> random_int_field(std::mt19937_64& rng, std::size_t n, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    std::vector<double> u(n);
    for (double& v : u) v = d(rng);
    return u;
}

inline std::vector<double> random_field(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> u(n);
    for (double& v : u) v = d(rng);
    return u;
}

/// Each point kept with probability `prob`; never empty when `nonempty`.
inline PointSet random_subset(std::mt19937_64& rng, std::size_t n, double prob, bool nonempty = true) {
    std::bernoulli_distribution keep(prob);
    PointSet out;
    for (std::size_t i = 0; i < n; ++i)
        if (keep(rng)) out.push_back(i);
    if (out.empty() && nonempty) out.push_back(rng() % n);
    return out;
}

inline PointSet all_of(std::size_t n) {
    PointSet out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
}

}  // namespace capmeasure::gen
