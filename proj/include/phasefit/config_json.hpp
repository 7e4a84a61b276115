#pragma once

// JSON (de)serialization for experiment configs and run metadata. Schema
// violations throw ConfigError carrying the offending field path.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "phasefit/rng.hpp"
#include "phasefit/sim.hpp"

namespace phasefit::io {

struct ConfigError : std::runtime_error {
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), field_path(std::move(path)) {}
    std::string field_path;
};

namespace detail {

template <typename T>
T require(const nlohmann::json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(path + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

template <typename T>
T optional(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

inline sim::DegreeToken parse_token(const nlohmann::json& j, const std::string& path) {
    sim::DegreeToken t;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "gamma_star") {
            t.kind = sim::DegreeToken::Kind::GammaStar;
        } else if (s == "gamma_max") {
            t.kind = sim::DegreeToken::Kind::GammaMax;
        } else if (s == "heuristic") {
            t.kind = sim::DegreeToken::Kind::Heuristic;
        } else if (s.rfind("fixed:", 0) == 0) {
            t.kind = sim::DegreeToken::Kind::Fixed;
            try {
                t.fixed = std::stoi(s.substr(6));
            } catch (const std::exception&) {
                throw ConfigError(path, "bad fixed token '" + s + "'");
            }
        } else {
            throw ConfigError(path, "unknown degree token '" + s + "'");
        }
        return t;
    }
    if (j.is_object() && j.contains("fixed")) {
        t.kind = sim::DegreeToken::Kind::Fixed;
        try {
            t.fixed = j.at("fixed").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ".fixed", e.what());
        }
        return t;
    }
    throw ConfigError(path, "expected a token string or {\"fixed\": k}");
}

}  // namespace detail

inline sim::ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
    sim::ExperimentConfig c;
    c.n_grid = detail::require<std::vector<long long>>(j, "$.", "n_grid");
    c.sigma = detail::require<double>(j, "$.", "sigma");
    c.replications = detail::require<int>(j, "$.", "replications");
    c.seed = detail::require<uint64_t>(j, "$.", "seed");
    c.lambda_multiplier = detail::optional<double>(j, "$.", "lambda_multiplier", 1.0);
    c.quadrature_points = detail::optional<int>(j, "$.", "quadrature_points", 256);
    c.density = detail::optional<std::string>(j, "$.", "density", "uniform01");

    if (!j.contains("truth")) throw ConfigError("$.truth", "missing required field");
    const auto& jt = j.at("truth");
    if (!jt.is_object()) throw ConfigError("$.truth", "must be an object");
    c.truth.id = detail::require<std::string>(jt, "$.truth.", "id");
    c.truth.gamma = detail::require<int>(jt, "$.truth.", "gamma");
    c.truth.c_bar = detail::optional<double>(jt, "$.truth.", "c_bar", 6.0);
    c.truth.coeffs = detail::optional<std::vector<double>>(jt, "$.truth.", "coeffs", {});
    c.truth.radius = detail::optional<double>(jt, "$.truth.", "radius", 1.0);
    c.truth.m_terms = detail::optional<int>(jt, "$.truth.", "m_terms", 16);
    c.truth.fn_seed = detail::optional<uint64_t>(jt, "$.truth.", "fn_seed", 1);

    if (!j.contains("degrees")) throw ConfigError("$.degrees", "missing required field");
    const auto& jd = j.at("degrees");
    if (!jd.is_array() || jd.empty()) throw ConfigError("$.degrees", "must be a nonempty array");
    for (size_t i = 0; i < jd.size(); ++i)
        c.degrees.push_back(
            detail::parse_token(jd[i], "$.degrees[" + std::to_string(i) + "]"));

    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("$", e.what());
    }
    return c;
}

inline sim::ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json config_to_json(const sim::ExperimentConfig& c) {
    nlohmann::json jd = nlohmann::json::array();
    for (const auto& t : c.degrees) jd.push_back(t.str());
    return nlohmann::json{{"n_grid", c.n_grid},
                          {"sigma", c.sigma},
                          {"truth",
                           {{"id", c.truth.id},
                            {"gamma", c.truth.gamma},
                            {"c_bar", c.truth.c_bar},
                            {"coeffs", c.truth.coeffs},
                            {"radius", c.truth.radius},
                            {"m_terms", c.truth.m_terms},
                            {"fn_seed", c.truth.fn_seed}}},
                          {"degrees", jd},
                          {"lambda_multiplier", c.lambda_multiplier},
                          {"replications", c.replications},
                          {"quadrature_points", c.quadrature_points},
                          {"seed", c.seed},
                          {"density", c.density}};
}

/// Run metadata persisted next to sweep results.
inline nlohmann::json run_metadata(const sim::ExperimentConfig& c) {
    return nlohmann::json{
        {"tool", "phasefit"},
        {"version", "0.1.0"},
        {"prng", rng::kPrngId},
        {"seed_mixing", "splitmix64(seed, n, degree, replication)"},
        {"constants",
         {{"entropy", "all ratio constants 1; B2 packing constant log 2"},
          {"lambda_rule", "order-k rule (k+1)/n v (1/n)^((2k+2)/(2k+3)), unit constant"},
          {"eigen_clamp", 1e-9},
          {"solver_residual_tol", 1e-8}}},
        {"config", config_to_json(c)}};
}

}  // namespace phasefit::io
