#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "capmeasure/space.hpp"

namespace capmeasure {

/**
 * Space-descriptor document:
 *   {"points": n, "metric": "euclidean"|"matrix", "coords": [[...]]?, "matrix": [[...]]?, "weights": [...]?}
 */
inline MetricMeasureSpace space_from_json(const nlohmann::json& doc) {
    auto need = [&](const char* field) -> const nlohmann::json& {
        if (!doc.contains(field)) throw Error(ErrorKind::config, std::string("space descriptor: missing field '") + field + "'");
        return doc.at(field);
    };
    try {
        const auto points = need("points").get<std::size_t>();
        const auto metric = need("metric").get<std::string>();
        std::vector<double> weights;
        if (doc.contains("weights")) weights = doc.at("weights").get<std::vector<double>>();
        std::vector<std::vector<double>> coords;
        if (doc.contains("coords")) coords = doc.at("coords").get<std::vector<std::vector<double>>>();
        if (metric == "euclidean") {
            if (coords.size() != points) throw Error(ErrorKind::config, "space descriptor: coords must list 'points' rows");
            return MetricMeasureSpace::from_coords(std::move(coords), std::move(weights));
        }
        if (metric == "matrix") {
            auto matrix = need("matrix").get<std::vector<std::vector<double>>>();
            if (matrix.size() != points) throw Error(ErrorKind::config, "space descriptor: matrix must have 'points' rows");
            return MetricMeasureSpace::from_matrix(matrix, std::move(weights), std::move(coords));
        }
        throw Error(ErrorKind::config, "space descriptor: metric must be \"euclidean\" or \"matrix\"");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("space descriptor: ") + e.what());
    }
}

inline MetricMeasureSpace space_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("space descriptor: ") + e.what());
    }
    return space_from_json(doc);
}

inline MetricMeasureSpace load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open space descriptor '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return space_from_string(buffer.str());
}

inline nlohmann::json space_to_json(const MetricMeasureSpace& space) {
    const std::size_t n = space.size();
    nlohmann::json doc;
    doc["points"] = n;
    if (space.metric_kind() == MetricMeasureSpace::MetricKind::euclidean) {
        doc["metric"] = "euclidean";
    } else {
        doc["metric"] = "matrix";
        auto matrix = nlohmann::json::array();
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = space.distance_row(i);
            matrix.push_back(std::vector<double>(row.begin(), row.end()));
        }
        doc["matrix"] = std::move(matrix);
    }
    if (space.has_coords()) doc["coords"] = space.coords();
    const auto w = space.weights();
    doc["weights"] = std::vector<double>(w.begin(), w.end());
    return doc;
}

/// Serializes with shortest round-trip float formatting, so re-reading is bit-exact.
inline std::string emit(const MetricMeasureSpace& space) { return space_to_json(space).dump(); }

}  // namespace capmeasure
