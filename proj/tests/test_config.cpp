#include <doctest.h>

#include <json.hpp>

#include "qbound/config_json.hpp"
#include "qbound/errors.hpp"

using namespace qbound;
using nlohmann::json;

TEST_CASE("distribution JSON: round trip and strictness") {
    auto j = json::parse(R"({"type":"erlang","shape":2,"rate":3.0})");
    auto d = cfg::dist_from_json(j, "service");
    CHECK(d.kind() == DistKind::Erlang);
    CHECK(d.shape() == 2);
    CHECK(d.rate() == 3.0);
    CHECK(cfg::dist_to_json(d) == j);

    auto e = cfg::dist_from_json(json::parse(R"({"type":"exponential","rate":2.0})"),
                                 "service");
    CHECK(e.kind() == DistKind::Exponential);
    CHECK(cfg::dist_to_json(e)["rate"] == 2.0);

    auto h = cfg::dist_from_json(
        json::parse(R"({"type":"hyperexponential","weights":[0.3,0.7],"rates":[1.0,4.0]})"),
        "service");
    CHECK(h.kind() == DistKind::HyperExponential);

    // unknown keys are errors, with the offending key named
    try {
        cfg::dist_from_json(json::parse(R"({"type":"exponential","rate":2.0,"rte":1})"),
                            "service");
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("rte") != std::string::npos);
    }
    CHECK_THROWS_AS(
        cfg::dist_from_json(json::parse(R"({"type":"weibull","k":2})"), "service"),
        ConfigError);
    CHECK_THROWS_AS(
        cfg::dist_from_json(json::parse(R"({"type":"exponential","rate":-1.0})"),
                            "service"),
        ConfigError);
    CHECK_THROWS_AS(
        cfg::dist_from_json(json::parse(R"({"type":"exponential"})"), "service"),
        ConfigError);
}

TEST_CASE("run config: parse, defaults, validation") {
    auto j = json::parse(R"({
        "command": "mg1",
        "lambda": 1.0,
        "service": {"type": "erlang", "shape": 2, "rate": 4.0},
        "level": 6,
        "x_grid": [0.2, 0.4],
        "cycles": 1e6,
        "seed": 42,
        "mode": "exact"
    })");
    auto c = cfg::run_config_from_json(j);
    CHECK(c.command == "mg1");
    CHECK(*c.lambda == 1.0);
    CHECK(c.service->kind() == DistKind::Erlang);
    CHECK(*c.level == 6);
    CHECK(c.x_grid.size() == 2);
    CHECK(*c.cycles == 1000000);
    CHECK(c.seed == 42);
    CHECK(c.echo == j);  // verbatim echo for report round-trips

    CHECK_THROWS_AS(cfg::run_config_from_json(json::parse(R"({"comand":"mm1"})")),
                    ConfigError);
    CHECK_THROWS_AS(cfg::run_config_from_json(json::parse(R"({"command":"mmm"})")),
                    ConfigError);
    CHECK_THROWS_AS(cfg::run_config_from_json(json::parse(R"({"level":0})")),
                    ConfigError);
    CHECK_THROWS_AS(cfg::run_config_from_json(json::parse(R"({"mode":"magic"})")),
                    ConfigError);
    CHECK_THROWS_AS(cfg::run_config_from_json(json::parse(R"([1,2])")), ConfigError);
}

TEST_CASE("bound report JSON carries flags") {
    regen::BoundReport r;
    r.x = 0.3;
    r.lower = -0.1;
    r.upper = 0.2;
    r.tail_lower = 0.5;
    r.asymptotic = true;
    auto j = cfg::bound_report_to_json(r);
    CHECK(j["x"] == 0.3);
    CHECK(j["flags"].size() == 1);
}
