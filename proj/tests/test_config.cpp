#include "pcaqs/config.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

using namespace pcaqs;

TEST_CASE("parse_config accepts the documented example") {
    const auto cfg =
        parse_config(R"({"delta":0.05,"k_mode":"dynamic","variance_threshold":0.70,"m":10})");
    REQUIRE(cfg.delta == 0.05);
    REQUIRE(cfg.k_mode == KMode::Dynamic);
    REQUIRE(cfg.variance_threshold == 0.70);
    REQUIRE(cfg.m.has_value());
    REQUIRE(*cfg.m == 10);
}

TEST_CASE("parse_config rejects out-of-range delta naming the bound") {
    REQUIRE_THROWS_WITH(parse_config(R"({"delta":0})"),
                        Catch::Matchers::ContainsSubstring("delta") &&
                            Catch::Matchers::ContainsSubstring("(0,1]"));
    REQUIRE_THROWS_WITH(parse_config(R"({"delta":1.5})"),
                        Catch::Matchers::ContainsSubstring("delta"));
}

TEST_CASE("empty config takes the documented defaults") {
    const auto cfg = parse_config("{}");
    REQUIRE(cfg.delta == 0.05);
    REQUIRE(cfg.k_mode == KMode::Dynamic);
    REQUIRE(cfg.variance_threshold == 0.70);
    REQUIRE_FALSE(cfg.m.has_value());
    REQUIRE(cfg.resolved_m(5) == 15);
    REQUIRE(cfg.resolved_m(21) == 21);
}

TEST_CASE("default m rule is max(k, 15)") {
    REQUIRE(default_m(1) == 15);
    REQUIRE(default_m(15) == 15);
    REQUIRE(default_m(16) == 16);
    REQUIRE(default_m(40) == 40);
}

TEST_CASE("unknown keys and metrics are rejected") {
    REQUIRE_THROWS_WITH(parse_config(R"({"deltaa":0.05})"),
                        Catch::Matchers::ContainsSubstring("unknown key 'deltaa'"));
    REQUIRE_THROWS_WITH(parse_config(R"({"metrics":["energy","bogus"]})"),
                        Catch::Matchers::ContainsSubstring("unknown metric 'bogus'"));
}

TEST_CASE("fixed mode requires a valid k") {
    REQUIRE_THROWS_WITH(parse_config(R"({"k_mode":"fixed"})"),
                        Catch::Matchers::ContainsSubstring("k"));
    const auto cfg = parse_config(R"({"k_mode":"fixed","k":5})");
    REQUIRE(cfg.k == 5);
}

TEST_CASE("remaining bounds are validated") {
    REQUIRE_THROWS(parse_config(R"({"m":0})"));
    REQUIRE_THROWS(parse_config(R"({"replications":0})"));
    REQUIRE_THROWS(parse_config(R"({"test_size":-1})"));
    REQUIRE_THROWS(parse_config(R"({"k_mode":"dynamic","variance_threshold":1.0})"));
    REQUIRE_THROWS(parse_config(R"({"k_mode":"middle"})"));
    REQUIRE_THROWS(parse_config("[1,2]"));
    REQUIRE_THROWS(parse_config("not json"));
}

TEST_CASE("PCAQS_SEED environment variable overrides the config seed") {
    ::setenv("PCAQS_SEED", "777", 1);
    const auto cfg = parse_config(R"({"seed":42})");
    ::unsetenv("PCAQS_SEED");
    REQUIRE(cfg.seed == 777);
    const auto cfg2 = parse_config(R"({"seed":42})");
    REQUIRE(cfg2.seed == 42);
}

TEST_CASE("default metric set is the six paper metrics") {
    const auto cfg = parse_config("{}");
    REQUIRE(cfg.metrics == std::vector<std::string>{"js", "kl", "energy", "mmd", "mahalanobis",
                                                    "pairwise_dd"});
}
