#ifndef QBOUND_CONFIG_JSON_HPP
#define QBOUND_CONFIG_JSON_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbound/distributions.hpp"
#include "qbound/regen_bounds.hpp"

namespace qbound::cfg {

using nlohmann::json;

// {"type": "exponential", "rate": 2.0} and friends; unknown keys are errors.
ServiceDistribution dist_from_json(const json& j, const std::string& path);
json dist_to_json(const ServiceDistribution& d);

json bound_report_to_json(const regen::BoundReport& r);

// One parsed run request.  Shared by every CLI subcommand and by config
// files passed to `verify`; validation is strict and mirrors
// schema/run-config.schema.json.
struct RunConfig {
    std::string command;  // mm1 | mg1 | geomsum | simulate | verify
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<ServiceDistribution> service;
    std::optional<int> level;
    std::vector<double> x_grid;  // defaults to {0.1..0.9} when empty
    std::optional<std::uint64_t> cycles;
    std::optional<std::uint64_t> m3_cycles;
    std::optional<double> m3;
    std::uint64_t seed = 12345;
    std::string mode = "exact";  // mg1 moment sourcing
    bool light_tail_substitute = false;
    std::optional<double> q;  // geomsum
    std::optional<ServiceDistribution> summand;
    std::optional<ServiceDistribution> delay;
    std::optional<std::uint64_t> simulate_n;
    int threads = 0;
    std::optional<std::string> csv;

    json echo;  // the raw parsed object, embedded verbatim in reports
};

RunConfig run_config_from_json(const json& j);
regen::MomentSource mode_from_string(const std::string& s);

}

#endif
