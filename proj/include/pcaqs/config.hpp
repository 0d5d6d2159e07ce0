#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

enum class KMode { Fixed, Dynamic };

inline const std::set<std::string>& known_metrics() {
    static const std::set<std::string> names = {"js",  "kl",          "energy",     "mmd",
                                                "mahalanobis", "pairwise_dd", "w1"};
    return names;
}

inline std::vector<std::string> default_metrics() {
    return {"js", "kl", "energy", "mmd", "mahalanobis", "pairwise_dd"};
}

/// Default bin count rule: m = max(k, 15).
inline int default_m(int k) { return std::max(k, 15); }

struct RunConfig {
    KMode k_mode = KMode::Dynamic;
    int k = 0;  // used when k_mode == Fixed
    double variance_threshold = 0.70;
    std::optional<int> m;  // unset -> default_m(resolved k)
    double delta = 0.05;
    int replications = 10;
    std::uint64_t seed = 42;
    int test_size = 0;
    std::vector<std::string> metrics = default_metrics();

    int resolved_m(int resolved_k) const { return m ? *m : default_m(resolved_k); }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& field, const std::string& bound) {
    throw std::invalid_argument("parse_config: " + field + " " + bound);
}

}  // namespace detail

/// Parse the run configuration from a JSON document. Unknown keys and
/// out-of-range values are rejected with the field named in the message.
/// The PCAQS_SEED environment variable, when set, overrides the seed.
inline RunConfig parse_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("parse_config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("parse_config: document must be an object");

    static const std::set<std::string> known_keys = {
        "delta", "k_mode", "k",    "variance_threshold", "m",
        "replications", "seed", "test_size", "metrics"};
    for (const auto& [key, _] : doc.items())
        if (!known_keys.count(key))
            throw std::invalid_argument("parse_config: unknown key '" + key + "'");

    RunConfig cfg;
    try {
        if (doc.contains("delta")) cfg.delta = doc["delta"].get<double>();
        if (doc.contains("k_mode")) {
            const auto mode = doc["k_mode"].get<std::string>();
            if (mode == "fixed")
                cfg.k_mode = KMode::Fixed;
            else if (mode == "dynamic")
                cfg.k_mode = KMode::Dynamic;
            else
                detail::config_error("k_mode", "must be \"fixed\" or \"dynamic\"");
        }
        if (doc.contains("k")) cfg.k = doc["k"].get<int>();
        if (doc.contains("variance_threshold"))
            cfg.variance_threshold = doc["variance_threshold"].get<double>();
        if (doc.contains("m")) cfg.m = doc["m"].get<int>();
        if (doc.contains("replications")) cfg.replications = doc["replications"].get<int>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("test_size")) cfg.test_size = doc["test_size"].get<int>();
        if (doc.contains("metrics")) cfg.metrics = doc["metrics"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("parse_config: bad value type: ") + e.what());
    }

    if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) detail::config_error("delta", "must lie in (0,1]");
    if (cfg.k_mode == KMode::Fixed && cfg.k < 1) detail::config_error("k", "must be >= 1 when k_mode is \"fixed\"");
    if (cfg.k_mode == KMode::Dynamic &&
        !(cfg.variance_threshold > 0.0 && cfg.variance_threshold < 1.0))
        detail::config_error("variance_threshold", "must lie in (0,1)");
    if (cfg.m && *cfg.m < 1) detail::config_error("m", "must be >= 1");
    if (cfg.replications < 1) detail::config_error("replications", "must be >= 1");
    if (cfg.test_size < 0) detail::config_error("test_size", "must be >= 0");
    for (const auto& name : cfg.metrics)
        if (!known_metrics().count(name))
            throw std::invalid_argument("parse_config: unknown metric '" + name + "'");

    if (const char* env = std::getenv("PCAQS_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (...) {
            throw std::invalid_argument("parse_config: PCAQS_SEED is not a valid integer: '" +
                                        std::string(env) + "'");
        }
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_config_file: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace pcaqs
