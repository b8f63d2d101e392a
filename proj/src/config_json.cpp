#include "qbound/config_json.hpp"

#include <set>

#include "qbound/errors.hpp"

namespace qbound::cfg {

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + ": unknown key \"" + it.key() + "\"");
}

double get_number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw ConfigError(path + ": missing key \"" + key + "\"");
    if (!j[key].is_number())
        throw ConfigError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw ConfigError(path + ": missing key \"" + key + "\"");
    if (!j[key].is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    return j[key].get<int>();
}

}

ServiceDistribution dist_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    if (!j.contains("type") || !j["type"].is_string())
        throw ConfigError(path + ": missing string key \"type\"");
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "exponential") {
            require_keys(j, {"type", "rate"}, path);
            return ServiceDistribution::exponential(get_number(j, "rate", path));
        }
        if (type == "deterministic") {
            require_keys(j, {"type", "value"}, path);
            return ServiceDistribution::deterministic(get_number(j, "value", path));
        }
        if (type == "erlang") {
            require_keys(j, {"type", "shape", "rate"}, path);
            return ServiceDistribution::erlang(get_int(j, "shape", path),
                                               get_number(j, "rate", path));
        }
        if (type == "uniform") {
            require_keys(j, {"type", "lo", "hi"}, path);
            return ServiceDistribution::uniform(get_number(j, "lo", path),
                                                get_number(j, "hi", path));
        }
        if (type == "hyperexponential") {
            require_keys(j, {"type", "weights", "rates"}, path);
            if (!j.contains("weights") || !j["weights"].is_array() ||
                !j.contains("rates") || !j["rates"].is_array())
                throw ConfigError(path + ": weights/rates must be arrays");
            std::vector<double> w, r;
            for (const auto& v : j["weights"]) w.push_back(v.get<double>());
            for (const auto& v : j["rates"]) r.push_back(v.get<double>());
            return ServiceDistribution::hyperexponential(std::move(w), std::move(r));
        }
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ".type: unknown distribution type \"" + type + "\"");
}

json dist_to_json(const ServiceDistribution& d) {
    switch (d.kind()) {
        case DistKind::Exponential:
            return {{"type", "exponential"}, {"rate", d.rate()}};
        case DistKind::Deterministic:
            return {{"type", "deterministic"}, {"value", d.value()}};
        case DistKind::Erlang:
            return {{"type", "erlang"}, {"shape", d.shape()}, {"rate", d.rate()}};
        case DistKind::Uniform:
            return {{"type", "uniform"}, {"lo", d.lo()}, {"hi", d.hi()}};
        case DistKind::HyperExponential:
            return {{"type", "hyperexponential"},
                    {"weights", d.weights()},
                    {"rates", d.rates()}};
    }
    return {};
}

json bound_report_to_json(const regen::BoundReport& r) {
    json j{{"x", r.x},
           {"lower", r.lower},
           {"upper", r.upper},
           {"tail_lower", r.tail_lower},
           {"informative", r.informative}};
    json flags = json::array();
    if (r.asymptotic) flags.push_back("asymptotic: o(1) set to 0");
    if (r.lower_only) flags.push_back("lower-only (x >= 1)");
    if (r.inverted) flags.push_back("inverted");
    j["flags"] = flags;
    return j;
}

regen::MomentSource mode_from_string(const std::string& s) {
    if (s == "exact") return regen::MomentSource::exact;
    if (s == "envelope") return regen::MomentSource::envelope;
    if (s == "monte-carlo" || s == "mc") return regen::MomentSource::monte_carlo;
    throw ConfigError("mode: expected exact|envelope|monte-carlo, got \"" + s + "\"");
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::set<std::string> allowed{
        "command", "lambda",  "mu",      "service",  "level",
        "x_grid",  "cycles",  "m3_cycles", "m3",     "seed",
        "mode",    "light_tail_substitute", "q",     "summand",
        "delay",   "simulate_n", "threads", "csv"};
    require_keys(j, allowed, "config");

    RunConfig c;
    c.echo = j;
    if (j.contains("command")) {
        if (!j["command"].is_string())
            throw ConfigError("config.command: expected a string");
        c.command = j["command"].get<std::string>();
        static const std::set<std::string> cmds{"mm1", "mg1", "geomsum", "simulate",
                                                "verify"};
        if (!cmds.count(c.command))
            throw ConfigError("config.command: unknown command \"" + c.command + "\"");
    }
    if (j.contains("lambda")) c.lambda = get_number(j, "lambda", "config");
    if (j.contains("mu")) c.mu = get_number(j, "mu", "config");
    if (j.contains("service")) c.service = dist_from_json(j["service"], "config.service");
    if (j.contains("level")) {
        c.level = get_int(j, "level", "config");
        if (*c.level < 1) throw ConfigError("config.level: must be >= 1");
    }
    if (j.contains("x_grid")) {
        if (!j["x_grid"].is_array())
            throw ConfigError("config.x_grid: expected an array of numbers");
        for (const auto& v : j["x_grid"]) {
            if (!v.is_number()) throw ConfigError("config.x_grid: expected numbers");
            c.x_grid.push_back(v.get<double>());
        }
    }
    auto get_u64 = [&](const char* key) {
        if (!j[key].is_number() || j[key].get<double>() < 0)
            throw ConfigError(std::string("config.") + key + ": expected a count");
        return static_cast<std::uint64_t>(j[key].get<double>());
    };
    if (j.contains("cycles")) c.cycles = get_u64("cycles");
    if (j.contains("m3_cycles")) c.m3_cycles = get_u64("m3_cycles");
    if (j.contains("m3")) c.m3 = get_number(j, "m3", "config");
    if (j.contains("seed")) c.seed = get_u64("seed");
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) throw ConfigError("config.mode: expected a string");
        c.mode = j["mode"].get<std::string>();
        mode_from_string(c.mode);
    }
    if (j.contains("light_tail_substitute")) {
        if (!j["light_tail_substitute"].is_boolean())
            throw ConfigError("config.light_tail_substitute: expected a boolean");
        c.light_tail_substitute = j["light_tail_substitute"].get<bool>();
    }
    if (j.contains("q")) c.q = get_number(j, "q", "config");
    if (j.contains("summand")) c.summand = dist_from_json(j["summand"], "config.summand");
    if (j.contains("delay")) c.delay = dist_from_json(j["delay"], "config.delay");
    if (j.contains("simulate_n")) c.simulate_n = get_u64("simulate_n");
    if (j.contains("threads")) c.threads = get_int(j, "threads", "config");
    if (j.contains("csv")) {
        if (!j["csv"].is_string()) throw ConfigError("config.csv: expected a string");
        c.csv = j["csv"].get<std::string>();
    }
    return c;
}

}
