#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "capmeasure/cli.hpp"

namespace {

using nlohmann::json;

// Flag text that looks like a JSON array is parsed as one; anything else stays a string.
json flag_value(const std::string& text) {
    if (!text.empty() && text.front() == '[') {
        try {
            return json::parse(text);
        } catch (const json::parse_error&) {
            throw capmeasure::Error(capmeasure::ErrorKind::config, "flag value '" + text + "' is not valid JSON");
        }
    }
    return text;
}

json number_flag(const std::string& text, const std::string& field) {
    if (text == "inf" || text == "infinity") return "inf";
    return capmeasure::cli::detail::parse_double(text, field);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capmeasure: capacity and Hausdorff content on finite metric measure spaces"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out, s, p, q, gamma, eps, s_prime;
    std::string space, set, field, balls, strategy, family, levels, method, gauge, delta, c_poincare, c_thresh;
    std::size_t grid1d = 0, grid2d = 0, iterations = 0, starts = 0, x0 = 0;
    int cantor_level = 0, ambient = 0, m = 0, j0 = 0;
    std::uint64_t seed = 0;

    app.add_option("--config", config_path, "JSON config document; flags override its fields");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--s", s, "smoothness s in (0,1)");
    app.add_option("--p", p, "integrability p > 0");
    app.add_option("--q", q, "sequence exponent q in (0,inf]");
    app.add_option("--gamma", gamma, "median level in (0,1/2]");
    app.add_option("--eps", eps, "log-gauge exponent");
    app.add_option("--s-prime", s_prime, "Poincare transform exponent in (0,s)");
    app.add_option("--space", space, "space descriptor file");
    app.add_option("--grid1d", grid1d, "uniform grid on [0,1] with N points");
    app.add_option("--grid2d", grid2d, "uniform N x N grid on [0,1]^2");
    app.add_option("--cantor", cantor_level, "Cantor construction level");
    app.add_option("--ambient", ambient, "ambient grid level for Cantor spaces and families");
    app.add_option("--set", set, "target set: all, none, cantor, ball:x:r, random[:prob], i,j,k or a JSON array");
    app.add_option("--field", field, "field: constant:c, step[:t], singular[:a], ball:x:r, random[:lo:hi] or a JSON array");
    app.add_option("--balls", balls, "balls for cover-5b: c:r,c:r, random:N or a JSON array");
    app.add_option("--strategy", strategy, "capacity strategy: convex, multistart, lipschitz_test");
    app.add_option("--iterations", iterations, "solver iteration cap");
    app.add_option("--starts", starts, "multistart starting points");
    app.add_option("--family", family, "verify-thm1 family: cantor, interval, square");
    app.add_option("--levels", levels, "verify-thm1 levels lo..hi");
    app.add_option("--delta", delta, "largest covering radius");
    app.add_option("--method", method, "content method: exact or greedy");
    app.add_option("--gauge", gauge, "gauge: theta, log, euclid_log, euclid_log_half");
    app.add_option("--m", m, "proof-covering ball exponent: E inside B(x0, 2^-m)");
    app.add_option("--c-poincare", c_poincare, "Poincare constant used by proof-covering");
    app.add_option("--x0", x0, "proof-covering center point");
    app.add_option("--c-thresh", c_thresh, "lebesgue threshold constant");
    app.add_option("--j0", j0, "lebesgue smallest scale index");

    for (const auto& name : capmeasure::cli::commands()) app.add_subcommand(name, "run " + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config-error: " << e.what() << '\n';
        return 2;
    }

    auto given = [&](const char* flag) { return app.count(flag) > 0; };
    try {
        capmeasure::cli::ScenarioConfig cfg;
        if (given("--config")) capmeasure::cli::apply_config(cfg, capmeasure::cli::load_json_file(config_path));

        json overrides = json::object();
        json params = json::object();
        if (given("--s")) params["s"] = number_flag(s, "s");
        if (given("--p")) params["p"] = number_flag(p, "p");
        if (given("--q")) params["q"] = number_flag(q, "q");
        if (given("--gamma")) params["gamma"] = number_flag(gamma, "gamma");
        if (given("--eps")) params["eps"] = number_flag(eps, "eps");
        if (given("--s-prime")) params["s_prime"] = number_flag(s_prime, "s_prime");
        if (!params.empty()) overrides["params"] = params;
        if (given("--out")) overrides["out"] = out;
        if (given("--seed")) overrides["seed"] = seed;
        if (given("--space")) overrides["space"] = json{{"file", space}};
        if (given("--grid1d")) overrides["space"] = json{{"grid1d", grid1d}};
        if (given("--grid2d")) overrides["space"] = json{{"grid2d", grid2d}};
        if (given("--cantor")) {
            overrides["space"] = json{{"cantor", cantor_level}};
            if (given("--ambient")) overrides["space"]["ambient"] = ambient;
        }
        if (given("--ambient")) overrides["ambient"] = ambient;
        if (given("--set")) overrides["set"] = flag_value(set);
        if (given("--field")) overrides["field"] = flag_value(field);
        if (given("--balls")) overrides["balls"] = flag_value(balls);
        if (given("--strategy")) overrides["strategy"] = strategy;
        if (given("--iterations")) overrides["iterations"] = iterations;
        if (given("--starts")) overrides["starts"] = starts;
        if (given("--family")) overrides["family"] = family;
        if (given("--levels")) overrides["levels"] = levels;
        if (given("--delta")) overrides["delta"] = number_flag(delta, "delta");
        if (given("--method")) overrides["method"] = method;
        if (given("--gauge")) overrides["gauge"] = gauge;
        if (given("--m")) overrides["m"] = m;
        if (given("--c-poincare")) overrides["c_poincare"] = number_flag(c_poincare, "c_poincare");
        if (given("--x0")) overrides["x0"] = x0;
        if (given("--c-thresh")) overrides["c_thresh"] = number_flag(c_thresh, "c_thresh");
        if (given("--j0")) overrides["j0"] = j0;
        overrides["command"] = app.get_subcommands().front()->get_name();
        capmeasure::cli::apply_config(cfg, overrides);

        const auto result = capmeasure::cli::run(cfg);
        std::cout << result.summary << '\n';
        return 0;
    } catch (const capmeasure::Error& e) {
        std::cerr << capmeasure::cli::error_prefix(e.kind()) << ": " << e.what() << '\n';
        return capmeasure::cli::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal-error: " << e.what() << '\n';
        return 4;
    }
}
