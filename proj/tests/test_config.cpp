#include <catch2/catch_amalgamated.hpp>

#include "edring/config.hpp"

using namespace edring;

TEST_CASE("a full scenario parses with all fields") {
    json j = json::parse(R"({
        "name": "demo",
        "model": {
            "L": 6,
            "statistics": "boson",
            "mu": "0.25",
            "pseudopotential": {"F": {"0": "1.0", "1": [0.5, -0.5]}},
            "terms": [{"m": 1, "entries": [{"x": [1], "y": [1], "w": 2.0}]}]
        },
        "filling": {"p": 1, "q": 2},
        "n_range": [0, 4],
        "checks": ["relation_I", "weerasinghe"],
        "solver": {"dense_crossover": 500, "seed": 99},
        "tolerances": {"slack": "1e-7", "kernel": 1e-10}
    })");
    Scenario sc = parse_scenario(j);
    CHECK(sc.name == "demo");
    CHECK(sc.spec.L == 6);
    CHECK(sc.spec.statistics == Statistics::boson);
    CHECK(sc.spec.mu == Catch::Approx(0.25));
    REQUIRE(sc.spec.pseudopotential.has_value());
    CHECK(sc.spec.pseudopotential->F.at(0) == cplx(1.0, 0.0));
    CHECK(sc.spec.pseudopotential->F.at(1) == cplx(0.5, -0.5));
    REQUIRE(sc.spec.terms.size() == 1);
    CHECK(sc.spec.terms[0].entries[0].w == cplx(2.0, 0.0));
    REQUIRE(sc.filling.has_value());
    CHECK(sc.filling->q == 2);
    CHECK(sc.n_min == 0);
    CHECK(sc.n_max == 4);
    CHECK(sc.checks == std::vector<std::string>{"relation_I", "weerasinghe"});
    CHECK(sc.solver.dense_crossover == 500);
    CHECK(sc.solver.seed == 99);
    CHECK(sc.tols.slack_rel == Catch::Approx(1e-7));
    CHECK(sc.solver.kernel_rel_tol == Catch::Approx(1e-10));
    CHECK_FALSE(sc.digest.empty());
}

TEST_CASE("n_range defaults to [0, n_q + 1] when a filling is given") {
    json j = json::parse(R"({
        "model": {"L": 8, "statistics": "boson",
                   "pseudopotential": {"F": {"0": 1}}},
        "filling": {"p": 1, "q": 2}
    })");
    Scenario sc = parse_scenario(j);
    CHECK(sc.n_min == 0);
    CHECK(sc.n_max == 5);
    CHECK_FALSE(sc.checks.empty());  // default check set
}

TEST_CASE("malformed configs are rejected with config_error") {
    auto reject = [](const char* text) {
        CHECK_THROWS_AS(parse_scenario(json::parse(text)), config_error);
    };
    // no model
    reject(R"({"n_range": [0, 2]})");
    // unknown statistics
    reject(R"({"model": {"L": 4, "statistics": "anyon",
               "pseudopotential": {"F": {"0": 1}}}, "n_range": [0, 2]})");
    // empty model
    reject(R"({"model": {"L": 4, "statistics": "boson"}, "n_range": [0, 2]})");
    // unknown check name
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"0": 1}}},
               "n_range": [0, 2], "checks": ["bogus"]})");
    // non-integer F key
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"half": 1}}}, "n_range": [0, 2]})");
    // F key out of range (2k > 2L)
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"9": 1}}}, "n_range": [0, 2]})");
    // site out of range
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "terms": [{"m": 1, "entries": [{"x": [5], "y": [1], "w": 1}]}]},
               "n_range": [0, 2]})");
    // arity mismatch
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "terms": [{"m": 2, "entries": [{"x": [1], "y": [1, 2], "w": 1}]}]},
               "n_range": [0, 2]})");
    // bad n_range
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"0": 1}}}, "n_range": [3, 1]})");
    // missing both n_range and filling
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"0": 1}}}})");
    // non-coprime filling
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"0": 1}}},
               "filling": {"p": 2, "q": 4}})");
    // non-numeric tolerance
    reject(R"({"model": {"L": 4, "statistics": "boson",
               "pseudopotential": {"F": {"0": 1}}}, "n_range": [0, 2],
               "tolerances": {"slack": "tiny"}})");
}

TEST_CASE("digest is stable for identical configs and differs across configs") {
    json a = json::parse(R"({"model": {"L": 4, "statistics": "boson",
        "pseudopotential": {"F": {"0": 1}}}, "n_range": [0, 2]})");
    json b = a;
    b["model"]["L"] = 5;
    CHECK(parse_scenario(a).digest == parse_scenario(a).digest);
    CHECK(parse_scenario(a).digest != parse_scenario(b).digest);
}

TEST_CASE("load_scenario reports missing files") {
    CHECK_THROWS_AS(load_scenario("/no/such/file.json"), config_error);
}
