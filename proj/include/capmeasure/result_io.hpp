#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "capmeasure/capacity.hpp"
#include "capmeasure/gradient.hpp"
#include "capmeasure/hausdorff.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/verify.hpp"

namespace capmeasure {

/// JSON number, or "inf" / "-inf" / "nan" where JSON has no literal.
inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json json_numbers(std::span<const double> values) {
    auto out = nlohmann::json::array();
    for (double v : values) out.push_back(json_number(v));
    return out;
}

inline nlohmann::json to_json(const Params& p) {
    nlohmann::json j;
    j["s"] = p.s;
    j["p"] = p.p;
    j["q"] = json_number(p.q);
    j["gamma"] = p.gamma;
    j["eps"] = p.eps;
    j["s_prime"] = p.effective_s_prime();
    j["theta"] = p.theta();
    return j;
}

inline nlohmann::json to_json(const GradientSequence& g) {
    nlohmann::json j;
    j["k_min"] = g.window().k_min;
    j["k_max"] = g.window().k_max;
    auto rows = nlohmann::json::array();
    for (int k = g.window().k_min; k <= g.window().k_max; ++k) rows.push_back(json_numbers(g.row(k)));
    j["values"] = std::move(rows);
    return j;
}

inline GradientSequence gradient_from_json(const nlohmann::json& j, std::size_t points) {
    try {
        const ScaleWindow w{j.at("k_min").get<int>(), j.at("k_max").get<int>()};
        if (w.k_max < w.k_min) throw Error(ErrorKind::config, "gradient: k_max below k_min");
        const auto& rows = j.at("values");
        if (rows.size() != static_cast<std::size_t>(w.count())) throw Error(ErrorKind::config, "gradient: values must have one row per scale");
        GradientSequence g(w, points);
        for (int k = w.k_min; k <= w.k_max; ++k) {
            const auto row = rows.at(static_cast<std::size_t>(k - w.k_min)).get<std::vector<double>>();
            if (row.size() != points) throw Error(ErrorKind::config, "gradient: row length does not match point count");
            for (std::size_t x = 0; x < points; ++x) {
                if (!(row[x] >= 0.0) || !std::isfinite(row[x])) throw Error(ErrorKind::config, "gradient: entries must be finite and nonnegative");
                g.ref(k, x) = row[x];
            }
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("gradient: ") + e.what());
    }
}

inline nlohmann::json to_json(const CapacityResult& r) {
    nlohmann::json j;
    j["value"] = json_number(r.value);
    j["strategy"] = strategy_name(r.strategy);
    j["iterations"] = r.iterations;
    j["final_step"] = json_number(r.final_step);
    j["witness_u"] = json_numbers(r.witness_u);
    j["witness_G"] = to_json(r.witness_G);
    return j;
}

inline nlohmann::json to_json(const Ball& b) {
    return {{"center", b.center}, {"radius", json_number(b.radius)}, {"gauge", json_number(b.gauge)}};
}

inline nlohmann::json to_json(const std::vector<Ball>& balls) {
    auto out = nlohmann::json::array();
    for (const Ball& b : balls) out.push_back(to_json(b));
    return out;
}

inline nlohmann::json to_json(const CoveringSolution& c) {
    nlohmann::json j;
    j["method"] = content_method_name(c.method);
    j["covers"] = c.covers;
    j["gauge_sum"] = json_number(c.gauge_sum);
    j["balls"] = to_json(c.balls);
    return j;
}

/// Report without runtimes so that identical inputs give identical documents.
inline nlohmann::json to_json(const TheoremReport& r) {
    nlohmann::json j;
    j["family"] = r.family;
    auto rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"id", row.id},
                        {"set_size", row.set_size},
                        {"capacity", json_number(row.capacity)},
                        {"capacity_theta", json_number(row.cap_theta)},
                        {"content", json_number(row.content)},
                        {"ratio", json_number(row.ratio)},
                        {"degenerate", row.degenerate},
                        {"strategy", row.strategy},
                        {"content_method", row.content_method}});
    }
    j["rows"] = std::move(rows);
    j["max_ratio"] = json_number(r.max_ratio);
    j["min_ratio"] = json_number(r.min_ratio);
    j["spread"] = json_number(r.spread);
    j["verdict"] = r.verdict;
    j["note"] = r.note;
    return j;
}

inline nlohmann::json to_json(const ProofCoveringResult& r) {
    nlohmann::json j;
    j["x0"] = r.x0;
    j["m"] = r.m;
    j["k_top"] = r.k_top;
    j["c_poincare"] = json_number(r.c_poincare);
    j["M"] = json_number(r.M);
    auto sel = nlohmann::json::array();
    for (const auto& s : r.selected) {
        sel.push_back({{"x", s.x}, {"scale", s.scale}, {"radius", json_number(s.radius)}, {"lhs", json_number(s.lhs)},
                       {"rhs", json_number(s.rhs)}});
    }
    j["selected"] = std::move(sel);
    j["failures"] = r.failures;
    j["disjoint"] = to_json(r.disjoint);
    j["cover"] = to_json(r.cover);
    j["disjoint_gauge_sum"] = json_number(r.disjoint_gauge_sum);
    j["bound"] = json_number(r.bound);
    j["bound_holds"] = r.bound_holds;
    return j;
}

inline nlohmann::json to_json(const LebesgueResult& r) {
    nlohmann::json j;
    j["scales"] = r.scales;
    j["g"] = json_numbers(r.g);
    j["g_norm"] = json_number(r.g_norm);
    j["wsp_norm"] = json_number(r.wsp);
    j["K"] = json_number(r.K);
    j["bad_set"] = r.bad_set;
    j["bad_radius"] = json_numbers(r.bad_radius);
    j["bad_content"] = json_number(r.bad_content);
    j["bad_content_greedy"] = json_number(r.bad_content_greedy);
    j["bad_content_5b"] = json_number(r.bad_content_5b);
    j["K_prime"] = json_number(r.K_prime);
    auto rows = nlohmann::json::array();
    for (const auto& c : r.cauchy) {
        rows.push_back({{"x", c.x}, {"fine", c.fine}, {"coarse", c.coarse}, {"lhs", json_number(c.lhs)}, {"rhs", json_number(c.rhs)}});
    }
    j["cauchy"] = std::move(rows);
    return j;
}

}  // namespace capmeasure
