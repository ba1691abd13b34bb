#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "capmeasure/error.hpp"

namespace capmeasure {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * Smoothness/integrability parameters shared by every module.
 *
 * theta, r_sub and p_prime are derived on every call and never stored.
 * q may be +infinity (sup-norm column).
 */
struct Params {
    double s = 0.5;
    double p = 2.0;
    double q = 2.0;
    double gamma = 0.5;
    double eps = 1.0;
    std::optional<double> s_prime;  // defaults to s/2

    double theta() const { return std::min(1.0, q / p); }
    double r_sub() const { return std::min(1.0, q / p); }
    double p_prime() const { return std::min(1.0, p); }
    double effective_s_prime() const { return s_prime.value_or(s / 2.0); }

    void validate() const {
        if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::config, "s must lie in (0,1)");
        if (!(p > 0.0 && std::isfinite(p))) throw Error(ErrorKind::config, "p must lie in (0,inf)");
        if (!(q > 0.0)) throw Error(ErrorKind::config, "q must lie in (0,inf]");
        if (!(gamma > 0.0 && gamma <= 0.5)) throw Error(ErrorKind::config, "gamma must lie in (0,1/2]");
        if (!(eps > 0.0 && std::isfinite(eps))) throw Error(ErrorKind::config, "eps must be positive");
        const double sp = effective_s_prime();
        if (!(sp > 0.0 && sp < s)) throw Error(ErrorKind::config, "s_prime must lie in (0,s)");
    }
};

}  // namespace capmeasure
