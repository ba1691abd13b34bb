#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capmeasure/capacity.hpp"
#include "capmeasure/error.hpp"
#include "capmeasure/gradient.hpp"
#include "capmeasure/hausdorff.hpp"
#include "capmeasure/median.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/result_io.hpp"
#include "capmeasure/space.hpp"
#include "capmeasure/space_io.hpp"
#include "capmeasure/verify.hpp"

namespace capmeasure::cli {

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"median",  "gradient-check", "capacity",       "content",
                                                "cover-5b", "verify-thm1",    "proof-covering", "lebesgue"};
    return names;
}

/**
 * One run of the tool. Every field can come from the JSON config document
 * (same key names) and be overridden by a flag.
 *
 * space:  descriptor object, {"grid1d": n}, {"grid2d": n}, {"cantor": L, "ambient": A} or {"file": path}
 * set:    array of indices or "all" | "none" | "cantor" | "ball:x:r" | "random[:prob]" | "i,j,k"
 * field:  array of values or "constant:c" | "step[:t]" | "singular[:a]" | "ball:x:r" | "random[:lo:hi]"
 * balls:  array of [center, radius] or "c:r,c:r" | "random:N"
 */
struct ScenarioConfig {
    std::string command;
    std::string out = "out";
    std::uint64_t seed = 1;
    Params params;
    nlohmann::json space = {{"grid1d", 33}};
    nlohmann::json set = "none";
    nlohmann::json field = "random";
    nlohmann::json balls = "random:12";
    std::string strategy = "convex";
    std::size_t iterations = 5000;
    std::size_t starts = 16;
    std::string family = "cantor";
    std::string levels = "1..3";
    int ambient = 0;
    double delta = 1.0;
    std::string method = "exact";
    std::string gauge = "theta";
    int m = 6;
    std::optional<double> c_poincare;
    std::optional<std::size_t> x0;
    double c_thresh = 1.0;
    int j0 = 3;
};

namespace detail {

inline double number(const nlohmann::json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return kInfinity;
    }
    throw Error(ErrorKind::config, "field '" + field + "' must be a number");
}

template <class T>
T get(const nlohmann::json& doc, const std::string& field) {
    try {
        return doc.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::config, "field '" + field + "' has the wrong type");
    }
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) parts.push_back(part);
    return parts;
}

inline double parse_double(const std::string& text, const std::string& field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "field '" + field + "' has a malformed number '" + text + "'");
    }
}

inline std::size_t parse_index(const std::string& text, const std::string& field) {
    const double v = parse_double(text, field);
    if (!(v >= 0.0) || v != std::floor(v)) throw Error(ErrorKind::config, "field '" + field + "' needs a nonnegative integer");
    return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Applies the keys of a config document on top of `cfg`; unknown keys are rejected by name.
inline void apply_config(ScenarioConfig& cfg, const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::config, "document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") cfg.command = detail::get<std::string>(doc, key);
        else if (key == "out") cfg.out = detail::get<std::string>(doc, key);
        else if (key == "seed") cfg.seed = detail::get<std::uint64_t>(doc, key);
        else if (key == "params") {
            if (!value.is_object()) throw Error(ErrorKind::config, "field 'params' must be an object");
            for (const auto& [pk, pv] : value.items()) {
                const std::string field = "params." + pk;
                if (pk == "s") cfg.params.s = detail::number(pv, field);
                else if (pk == "p") cfg.params.p = detail::number(pv, field);
                else if (pk == "q") cfg.params.q = detail::number(pv, field);
                else if (pk == "gamma") cfg.params.gamma = detail::number(pv, field);
                else if (pk == "eps") cfg.params.eps = detail::number(pv, field);
                else if (pk == "s_prime") cfg.params.s_prime = detail::number(pv, field);
                else throw Error(ErrorKind::config, "unknown field '" + field + "'");
            }
        } else if (key == "space") cfg.space = value;
        else if (key == "set") cfg.set = value;
        else if (key == "field") cfg.field = value;
        else if (key == "balls") cfg.balls = value;
        else if (key == "strategy") cfg.strategy = detail::get<std::string>(doc, key);
        else if (key == "iterations") cfg.iterations = detail::get<std::size_t>(doc, key);
        else if (key == "starts") cfg.starts = detail::get<std::size_t>(doc, key);
        else if (key == "family") cfg.family = detail::get<std::string>(doc, key);
        else if (key == "levels") cfg.levels = detail::get<std::string>(doc, key);
        else if (key == "ambient") cfg.ambient = detail::get<int>(doc, key);
        else if (key == "delta") cfg.delta = detail::number(value, key);
        else if (key == "method") cfg.method = detail::get<std::string>(doc, key);
        else if (key == "gauge") cfg.gauge = detail::get<std::string>(doc, key);
        else if (key == "m") cfg.m = detail::get<int>(doc, key);
        else if (key == "c_poincare") cfg.c_poincare = detail::number(value, key);
        else if (key == "x0") cfg.x0 = detail::get<std::size_t>(doc, key);
        else if (key == "c_thresh") cfg.c_thresh = detail::number(value, key);
        else if (key == "j0") cfg.j0 = detail::get<int>(doc, key);
        else throw Error(ErrorKind::config, "unknown field '" + key + "'");
    }
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, "config '" + path + "': " + e.what());
    }
}

struct ResolvedSpace {
    MetricMeasureSpace space;
    std::optional<PointSet> distinguished;
};

inline ResolvedSpace resolve_space(const nlohmann::json& desc) {
    if (desc.is_string()) return {load_space(desc.get<std::string>()), std::nullopt};
    if (!desc.is_object()) throw Error(ErrorKind::config, "field 'space' must be an object or a file path");
    auto count = [&](const char* key) {
        const double v = detail::number(desc.at(key), std::string("space.") + key);
        if (!(v >= 1.0) || v != std::floor(v)) throw Error(ErrorKind::config, std::string("field 'space.") + key + "' must be a positive integer");
        return static_cast<std::size_t>(v);
    };
    if (desc.contains("grid1d")) return {grid1d(count("grid1d")), std::nullopt};
    if (desc.contains("grid2d")) return {grid2d(count("grid2d")), std::nullopt};
    if (desc.contains("cantor")) {
        const int level = static_cast<int>(count("cantor"));
        const int ambient = desc.contains("ambient") ? static_cast<int>(count("ambient")) : -1;
        GeneratedSpace g = cantor(level, ambient);
        return {std::move(g.space), std::move(g.distinguished)};
    }
    if (desc.contains("file")) return {load_space(detail::get<std::string>(desc, "file")), std::nullopt};
    return {space_from_json(desc), std::nullopt};
}

inline PointSet resolve_set(const nlohmann::json& desc, const ResolvedSpace& rs, std::uint64_t seed) {
    const std::size_t n = rs.space.size();
    auto checked = [&](PointSet set) {
        for (std::size_t i : set)
            if (i >= n) throw Error(ErrorKind::config, "field 'set' index " + std::to_string(i) + " out of range");
        return normalized(std::move(set));
    };
    if (desc.is_array()) {
        PointSet set;
        for (const auto& v : desc) set.push_back(detail::parse_index(v.dump(), "set"));
        return checked(std::move(set));
    }
    if (!desc.is_string()) throw Error(ErrorKind::config, "field 'set' must be an array or a string");
    const auto text = desc.get<std::string>();
    const auto parts = detail::split(text, ':');
    if (text == "all") return all_points(rs.space);
    if (text == "none" || text.empty()) return {};
    if (text == "cantor") {
        if (!rs.distinguished) throw Error(ErrorKind::config, "set 'cantor' needs a cantor space");
        return *rs.distinguished;
    }
    if (parts[0] == "ball" && parts.size() == 3) {
        const std::size_t x = detail::parse_index(parts[1], "set");
        if (x >= n) throw Error(ErrorKind::config, "field 'set' ball center out of range");
        return rs.space.ball(x, detail::parse_double(parts[2], "set"));
    }
    if (parts[0] == "random" && parts.size() <= 2) {
        const double prob = parts.size() == 2 ? detail::parse_double(parts[1], "set") : 0.3;
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution keep(std::clamp(prob, 0.0, 1.0));
        PointSet set;
        for (std::size_t i = 0; i < n; ++i)
            if (keep(rng)) set.push_back(i);
        return set;
    }
    PointSet set;
    for (const auto& item : detail::split(text, ',')) set.push_back(detail::parse_index(item, "set"));
    return checked(std::move(set));
}

inline ScalarField resolve_field(const nlohmann::json& desc, const MetricMeasureSpace& space, std::uint64_t seed) {
    const std::size_t n = space.size();
    if (desc.is_array()) {
        ScalarField u;
        for (const auto& v : desc) u.push_back(detail::number(v, "field"));
        if (u.size() != n) throw Error(ErrorKind::config, "field 'field' must list one value per point");
        return u;
    }
    if (!desc.is_string()) throw Error(ErrorKind::config, "field 'field' must be an array or a string");
    const auto parts = detail::split(desc.get<std::string>(), ':');
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg = [&](std::size_t i, double fallback) {
        return parts.size() > i ? detail::parse_double(parts[i], "field") : fallback;
    };
    auto center_distance = [&](std::size_t i) {
        if (!space.has_coords()) throw Error(ErrorKind::config, "field '" + kind + "' needs a space with coordinates");
        double acc = 0.0;
        for (double c : space.coords()[i]) acc += (c - 0.5) * (c - 0.5);
        return std::sqrt(acc);
    };
    ScalarField u(n, 0.0);
    if (kind == "constant") {
        std::fill(u.begin(), u.end(), arg(1, 1.0));
    } else if (kind == "step") {
        const double t = arg(1, 0.5);
        for (std::size_t i = 0; i < n; ++i) {
            if (!space.has_coords()) throw Error(ErrorKind::config, "field 'step' needs a space with coordinates");
            u[i] = space.coords()[i][0] >= t ? 1.0 : 0.0;
        }
    } else if (kind == "singular") {
        const double a = arg(1, 0.5);
        for (std::size_t i = 0; i < n; ++i) u[i] = std::pow(center_distance(i), -a);
    } else if (kind == "ball" && parts.size() == 3) {
        const std::size_t x = detail::parse_index(parts[1], "field");
        if (x >= n) throw Error(ErrorKind::config, "field 'field' ball center out of range");
        u = ball_test_function(space, x, arg(2, 0.0));
    } else if (kind == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> d(arg(1, -1.0), arg(2, 1.0));
        for (double& v : u) v = d(rng);
    } else {
        throw Error(ErrorKind::config, "field 'field' must be constant, step, singular, ball:x:r or random");
    }
    for (double v : u)
        if (!std::isfinite(v)) throw Error(ErrorKind::domain, "field '" + kind + "' is not finite at some point");
    return u;
}

inline std::vector<Ball> resolve_balls(const nlohmann::json& desc, const MetricMeasureSpace& space, std::uint64_t seed) {
    std::vector<Ball> balls;
    auto add = [&](std::size_t c, double r) {
        if (c >= space.size()) throw Error(ErrorKind::config, "field 'balls' center out of range");
        balls.push_back({c, r, 0.0});
    };
    if (desc.is_array()) {
        for (const auto& b : desc) {
            if (!b.is_array() || b.size() != 2) throw Error(ErrorKind::config, "field 'balls' entries must be [center, radius]");
            add(detail::parse_index(b[0].dump(), "balls"), detail::number(b[1], "balls"));
        }
        return balls;
    }
    if (!desc.is_string()) throw Error(ErrorKind::config, "field 'balls' must be an array or a string");
    const auto text = desc.get<std::string>();
    const auto parts = detail::split(text, ':');
    if (parts[0] == "random" && parts.size() == 2) {
        const std::size_t count = detail::parse_index(parts[1], "balls");
        std::mt19937_64 rng(seed);
        const double top = space.diameter() > 0.0 ? space.diameter() / 2.0 : 1.0;
        std::uniform_real_distribution<double> radius(top / 20.0, top);
        for (std::size_t i = 0; i < count; ++i) add(rng() % space.size(), radius(rng));
        return balls;
    }
    for (const auto& item : detail::split(text, ',')) {
        const auto cr = detail::split(item, ':');
        if (cr.size() != 2) throw Error(ErrorKind::config, "field 'balls' entries must look like center:radius");
        add(detail::parse_index(cr[0], "balls"), detail::parse_double(cr[1], "balls"));
    }
    return balls;
}

inline std::pair<int, int> parse_levels(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const int l = std::stoi(text);
            return {l, l};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "field 'levels' must look like lo..hi");
    }
}

inline Gauge resolve_gauge(const std::string& name, const Params& params, const MetricMeasureSpace& space) {
    const double dim = space.dim() > 0 ? static_cast<double>(space.dim()) : 1.0;
    if (name == "theta") return theta_gauge(params.s, params.p, params.theta());
    if (name == "log") return log_gauge(params.s, params.p, params.eps);
    if (name == "euclid_log") return euclid_log(dim, params.s, params.p, params.eps);
    if (name == "euclid_log_half") return euclid_log_half(dim, params.s, params.p, params.eps);
    throw Error(ErrorKind::config, "field 'gauge' must be theta, log, euclid_log or euclid_log_half");
}

// ---------------------------------------------------------------------------
// Output.

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string tag_number(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// File stem carrying the parameter tuple, e.g. capacity_s0.5_p2_q2_g0.5_e1_seed1.
inline std::string file_stem(const ScenarioConfig& cfg) {
    const Params& p = cfg.params;
    return cfg.command + "_s" + tag_number(p.s) + "_p" + tag_number(p.p) + "_q" + tag_number(p.q) + "_g" +
           tag_number(p.gamma) + "_e" + tag_number(p.eps) + "_seed" + std::to_string(cfg.seed);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Outputs {
    std::string json_path;
    std::string csv_path;
};

inline Outputs write_outputs(const ScenarioConfig& cfg, const nlohmann::json& doc, const Table& table) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorKind::config, "cannot create output directory '" + cfg.out + "'");
    const std::filesystem::path base = std::filesystem::path(cfg.out) / file_stem(cfg);
    Outputs out{base.string() + ".json", base.string() + ".csv"};
    {
        std::ofstream j(out.json_path, std::ios::binary);
        if (!j) throw Error(ErrorKind::config, "cannot write '" + out.json_path + "'");
        j << doc.dump(2) << '\n';
    }
    std::ofstream c(out.csv_path, std::ios::binary);
    if (!c) throw Error(ErrorKind::config, "cannot write '" + out.csv_path + "'");
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) c << (i ? "," : "") << cells[i];
        c << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
    return out;
}

// ---------------------------------------------------------------------------
// Commands. Each fills the JSON document and CSV table and returns the summary.

namespace detail {

struct Context {
    const ScenarioConfig& cfg;
    nlohmann::json doc;
    Table table;
    double runtime = 0.0;
};

inline SolverOptions solver_options(const ScenarioConfig& cfg) {
    SolverOptions o;
    o.max_iterations = cfg.iterations;
    o.seed = cfg.seed;
    o.starts = cfg.starts;
    return o;
}

inline std::string run_median(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    PointSet set = resolve_set(cfg.set, rs, cfg.seed);
    if (set.empty()) set = all_points(rs.space);
    const ScalarField u = resolve_field(cfg.field, rs.space, cfg.seed);
    const double g = cfg.params.gamma;
    const double lower = gamma_median(rs.space, u, set, g);
    const double upper = upper_gamma_median(rs.space, u, set, g);
    const auto abs_check = median_abs_check(rs.space, u, set, g);
    const auto pnorm = median_pnorm_check(rs.space, u, set, g, cfg.params.p);
    ctx.doc["set"] = set;
    ctx.doc["median"] = json_number(lower);
    ctx.doc["upper_median"] = json_number(upper);
    ctx.doc["abs_check"] = {{"lhs", json_number(abs_check.lhs)}, {"rhs", json_number(abs_check.rhs)}, {"holds", abs_check.holds}};
    ctx.doc["pnorm_check"] = {{"lhs", json_number(pnorm.lhs)}, {"rhs", json_number(pnorm.rhs)}, {"holds", pnorm.holds}};
    ctx.table.header = {"quantity", "value"};
    ctx.table.rows = {{"median", csv_number(lower)},
                      {"upper_median", csv_number(upper)},
                      {"abs_lhs", csv_number(abs_check.lhs)},
                      {"abs_rhs", csv_number(abs_check.rhs)},
                      {"pnorm_lhs", csv_number(pnorm.lhs)},
                      {"pnorm_rhs", csv_number(pnorm.rhs)}};
    return "median=" + csv_number(lower) + " upper=" + csv_number(upper) + " points=" + std::to_string(set.size());
}

inline std::string run_gradient_check(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const Params& p = cfg.params;
    const ScalarField u = resolve_field(cfg.field, rs.space, cfg.seed);
    const GradientSequence g = canonical_gradient(rs.space, u, p.s);
    const GradientCheck check = is_valid_gradient(rs.space, u, p.s, g);
    const GradientSequence t = poincare_transform(g, p.effective_s_prime(), p.p);
    const PoincareTable table = poincare_check(rs.space, u, t, p.gamma, p.s, p.p);
    const double gn = mixed_norm(rs.space, g, p.p, p.q);
    const double tn = mixed_norm(rs.space, t, p.p, p.q);
    ctx.doc["valid"] = check.valid;
    ctx.doc["worst"] = {{"x", check.x}, {"y", check.y}, {"k", check.k}, {"violation", json_number(check.violation)}};
    ctx.doc["gradient"] = to_json(g);
    ctx.doc["gradient_norm"] = json_number(gn);
    ctx.doc["tl_norm"] = json_number(tl_norm(rs.space, u, g, p.p, p.q));
    ctx.doc["transformed_norm"] = json_number(tn);
    ctx.doc["norm_ratio"] = json_number(gn > 0.0 ? tn / gn : 0.0);
    ctx.doc["poincare_constant"] = json_number(table.max_ratio);
    ctx.table.header = {"x", "k", "lhs", "rhs", "ratio"};
    for (const auto& r : table.rows)
        ctx.table.rows.push_back({std::to_string(r.x), std::to_string(r.k), csv_number(r.lhs), csv_number(r.rhs), csv_number(r.ratio)});
    return std::string("valid=") + (check.valid ? "true" : "false") + " poincare_constant=" + csv_number(table.max_ratio) +
           " norm_ratio=" + csv_number(gn > 0.0 ? tn / gn : 0.0);
}

inline std::string run_capacity(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const PointSet set = resolve_set(cfg.set, rs, cfg.seed);
    const Strategy strategy = parse_strategy(cfg.strategy);
    const auto start = std::chrono::steady_clock::now();
    const CapacityResult r = capacity_upper(rs.space, set, cfg.params, strategy, solver_options(cfg));
    ctx.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const WitnessCheck w = check_witness(rs.space, set, cfg.params, r);
    if (!w.ok) throw std::runtime_error("capacity witness failed re-validation: " + w.reason);
    ctx.doc["set"] = set;
    ctx.doc["result"] = to_json(r);
    ctx.table.header = {"point", "in_set", "witness_u", "runtime_s"};
    const auto in = capmeasure::detail::membership(rs.space.size(), set);
    for (std::size_t x = 0; x < rs.space.size(); ++x)
        ctx.table.rows.push_back({std::to_string(x), in[x] ? "1" : "0", csv_number(r.witness_u[x]), csv_number(ctx.runtime)});
    return "value=" + csv_number(r.value) + " strategy=" + strategy_name(r.strategy) + " iterations=" + std::to_string(r.iterations);
}

inline std::string run_content(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const PointSet set = resolve_set(cfg.set, rs, cfg.seed);
    const Gauge gauge = resolve_gauge(cfg.gauge, cfg.params, rs.space);
    const CoveringSolution sol = content(rs.space, set, gauge, cfg.delta, parse_content_method(cfg.method));
    if (!sol.covers) throw Error(ErrorKind::infeasible, "no admissible cover with radius <= " + csv_number(cfg.delta));
    ctx.doc["set"] = set;
    ctx.doc["gauge"] = gauge_kind_name(gauge.kind);
    ctx.doc["delta"] = json_number(cfg.delta);
    ctx.doc["content"] = to_json(sol);
    ctx.table.header = {"center", "radius", "gauge"};
    for (const Ball& b : sol.balls) ctx.table.rows.push_back({std::to_string(b.center), csv_number(b.radius), csv_number(b.gauge)});
    return "content=" + csv_number(sol.gauge_sum) + " balls=" + std::to_string(sol.balls.size()) + " method=" +
           content_method_name(sol.method);
}

inline std::string run_cover_5b(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const std::vector<Ball> balls = resolve_balls(cfg.balls, rs.space, cfg.seed);
    const auto chosen = five_b_cover(rs.space, balls);
    const FiveBCheck check = check_five_b(rs.space, balls, chosen);
    ctx.doc["balls"] = to_json(balls);
    ctx.doc["chosen"] = chosen;
    ctx.doc["disjoint"] = check.disjoint;
    ctx.doc["dilates_cover"] = check.dilates_cover;
    ctx.doc["diameter_witness"] = check.diameter_witness;
    ctx.table.header = {"index", "center", "radius", "chosen"};
    std::vector<char> picked(balls.size(), 0);
    for (std::size_t i : chosen) picked[i] = 1;
    for (std::size_t i = 0; i < balls.size(); ++i)
        ctx.table.rows.push_back({std::to_string(i), std::to_string(balls[i].center), csv_number(balls[i].radius), picked[i] ? "1" : "0"});
    const bool ok = check.disjoint && check.dilates_cover && check.diameter_witness;
    return "chosen=" + std::to_string(chosen.size()) + "/" + std::to_string(balls.size()) + " checks=" + (ok ? "pass" : "fail");
}

inline std::string run_verify_thm1(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto [lo, hi] = parse_levels(cfg.levels);
    const FamilySpec desc{parse_family(cfg.family), lo, hi, cfg.ambient};
    Thm1Options options;
    options.delta = cfg.delta;
    options.solver = solver_options(cfg);
    const TheoremReport report = verify_thm1(cfg.family, family_instances(desc), cfg.params, options);
    ctx.doc["report"] = to_json(report);
    ctx.table.header = {"id", "set_size", "capacity", "capacity_theta", "content", "ratio", "degenerate", "strategy", "runtime_s"};
    for (const auto& r : report.rows) {
        ctx.table.rows.push_back({r.id, std::to_string(r.set_size), csv_number(r.capacity), csv_number(r.cap_theta),
                                  csv_number(r.content), csv_number(r.ratio), r.degenerate ? "1" : "0", r.strategy,
                                  csv_number(r.runtime_seconds)});
    }
    return std::string("verdict=") + (report.verdict ? "pass" : "fail") + " max_ratio=" + csv_number(report.max_ratio) +
           " spread=" + csv_number(report.spread) + " rows=" + std::to_string(report.rows.size());
}

inline std::string run_proof_covering(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const PointSet set = resolve_set(cfg.set, rs, cfg.seed);
    const ScalarField u = resolve_field(cfg.field, rs.space, cfg.seed);
    const GradientSequence g =
        poincare_transform(canonical_gradient(rs.space, u, cfg.params.s), cfg.params.effective_s_prime(), cfg.params.p);
    const ProofCoveringResult r = proof_covering(rs.space, set, u, g, cfg.params, cfg.m, cfg.c_poincare, cfg.x0);
    ctx.doc["set"] = set;
    ctx.doc["result"] = to_json(r);
    ctx.table.header = {"x", "scale", "radius", "lhs", "rhs"};
    for (const auto& s : r.selected)
        ctx.table.rows.push_back({std::to_string(s.x), std::to_string(s.scale), csv_number(s.radius), csv_number(s.lhs), csv_number(s.rhs)});
    return "disjoint_sum=" + csv_number(r.disjoint_gauge_sum) + " bound=" + csv_number(r.bound) +
           " holds=" + (r.bound_holds ? "true" : "false") + " failures=" + std::to_string(r.failures.size());
}

inline std::string run_lebesgue(Context& ctx, const ResolvedSpace& rs) {
    const auto& cfg = ctx.cfg;
    const ScalarField u = resolve_field(cfg.field, rs.space, cfg.seed);
    LebesgueOptions options;
    options.c_thresh = cfg.c_thresh;
    options.j0 = cfg.j0;
    const LebesgueResult r = lebesgue_experiment(rs.space, u, cfg.params, options);
    ctx.doc["result"] = to_json(r);
    ctx.table.header = {"point", "g", "bad"};
    const auto bad = capmeasure::detail::membership(rs.space.size(), r.bad_set);
    for (std::size_t x = 0; x < rs.space.size(); ++x)
        ctx.table.rows.push_back({std::to_string(x), csv_number(r.g[x]), bad[x] ? "1" : "0"});
    return "K=" + csv_number(r.K) + " bad=" + std::to_string(r.bad_set.size()) + " bad_content=" + csv_number(r.bad_content);
}

}  // namespace detail

struct RunResult {
    std::string summary;
    Outputs files;
};

inline RunResult run(const ScenarioConfig& cfg) {
    const auto& names = commands();
    if (std::find(names.begin(), names.end(), cfg.command) == names.end()) {
        throw Error(ErrorKind::config, "unknown command '" + cfg.command + "'");
    }
    cfg.params.validate();
    detail::Context ctx{cfg, nlohmann::json::object(), {}, 0.0};
    ctx.doc["command"] = cfg.command;
    ctx.doc["seed"] = cfg.seed;
    ctx.doc["params"] = to_json(cfg.params);
    std::string summary;
    if (cfg.command == "verify-thm1") {
        summary = detail::run_verify_thm1(ctx);
    } else {
        const ResolvedSpace rs = resolve_space(cfg.space);
        ctx.doc["points"] = rs.space.size();
        if (cfg.command == "median") summary = detail::run_median(ctx, rs);
        else if (cfg.command == "gradient-check") summary = detail::run_gradient_check(ctx, rs);
        else if (cfg.command == "capacity") summary = detail::run_capacity(ctx, rs);
        else if (cfg.command == "content") summary = detail::run_content(ctx, rs);
        else if (cfg.command == "cover-5b") summary = detail::run_cover_5b(ctx, rs);
        else if (cfg.command == "proof-covering") summary = detail::run_proof_covering(ctx, rs);
        else summary = detail::run_lebesgue(ctx, rs);
    }
    const Outputs files = write_outputs(cfg, ctx.doc, ctx.table);
    return {cfg.command + ": " + summary + " -> " + files.json_path, files};
}

/// Exit status per error kind: 2 for bad input, 3 for infeasible.
inline int exit_code(ErrorKind kind) { return kind == ErrorKind::infeasible ? 3 : 2; }

inline std::string error_prefix(ErrorKind kind) {
    return kind == ErrorKind::infeasible ? "infeasible" : std::string(error_kind_name(kind)) + "-error";
}

}  // namespace capmeasure::cli
