#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phasefit/config_json.hpp"

using namespace phasefit;

namespace {

const char* kGood = R"({
  "n_grid": [128, 256],
  "sigma": 0.3,
  "truth": {"id": "bump", "gamma": 0},
  "degrees": ["gamma_star", "fixed:2", {"fixed": 0}],
  "replications": 10,
  "seed": 7
})";

}  // namespace

TEST_CASE("happy path parse with defaults") {
    const auto c = io::parse_config_text(kGood);
    CHECK(c.n_grid == std::vector<long long>{128, 256});
    CHECK(c.sigma == doctest::Approx(0.3));
    CHECK(c.truth.id == "bump");
    CHECK(c.degrees.size() == 3);
    CHECK(c.degrees[0].kind == sim::DegreeToken::Kind::GammaStar);
    CHECK(c.degrees[1].kind == sim::DegreeToken::Kind::Fixed);
    CHECK(c.degrees[1].fixed == 2);
    CHECK(c.degrees[2].fixed == 0);
    CHECK(c.lambda_multiplier == 1.0);
    CHECK(c.quadrature_points == 256);
    CHECK(c.density == "uniform01");
}

TEST_CASE("schema violations carry a field path") {
    try {
        io::parse_config_text(R"({"sigma": 1.0})");
        FAIL("expected ConfigError");
    } catch (const io::ConfigError& e) {
        CHECK(e.field_path == "$.n_grid");
    }

    try {
        io::parse_config_text(
            R"({"n_grid":[8],"sigma":1,"truth":{"id":"bump","gamma":0},
                "degrees":["bogus"],"replications":1,"seed":1})");
        FAIL("expected ConfigError");
    } catch (const io::ConfigError& e) {
        CHECK(e.field_path == "$.degrees[0]");
    }

    try {
        io::parse_config_text(
            R"({"n_grid":[8],"sigma":1,"truth":{"gamma":0},
                "degrees":["heuristic"],"replications":1,"seed":1})");
        FAIL("expected ConfigError");
    } catch (const io::ConfigError& e) {
        CHECK(e.field_path == "$.truth.id");
    }

    CHECK_THROWS_AS(io::parse_config_text("not json"), io::ConfigError);
    // semantic failures surface as $-level errors
    CHECK_THROWS_AS(io::parse_config_text(
                        R"({"n_grid":[8],"sigma":1,"truth":{"id":"bump","gamma":0},
                            "degrees":["heuristic"],"replications":0,"seed":1})"),
                    io::ConfigError);
}

TEST_CASE("config round-trips through json") {
    const auto c = io::parse_config_text(kGood);
    const auto c2 = io::parse_config(io::config_to_json(c));
    CHECK(c2.n_grid == c.n_grid);
    CHECK(c2.sigma == c.sigma);
    CHECK(c2.seed == c.seed);
    CHECK(c2.degrees.size() == c.degrees.size());
    for (size_t i = 0; i < c.degrees.size(); ++i) CHECK(c2.degrees[i].str() == c.degrees[i].str());
}

TEST_CASE("metadata records the PRNG and constants") {
    const auto c = io::parse_config_text(kGood);
    const auto meta = io::run_metadata(c);
    CHECK(meta.at("prng").get<std::string>() == rng::kPrngId);
    CHECK(meta.contains("constants"));
    CHECK(meta.at("config").at("seed").get<uint64_t>() == 7);
}
