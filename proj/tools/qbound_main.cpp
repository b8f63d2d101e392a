// Command-line front door: analytic level-crossing bounds for M/M/1 and
// M/G/1 queues, geometric-sum error bounds, seeded simulation, and
// bound-vs-simulation verification.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbound/config_json.hpp"
#include "qbound/distributions.hpp"
#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"
#include "qbound/mg1.hpp"
#include "qbound/mm1.hpp"
#include "qbound/simulate.hpp"
#include "qbound/version.hpp"

using nlohmann::json;
using namespace qbound;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    double lambda = 0, mu = 0;
    std::string service_json, summand_json, delay_json;
    int level = 0;
    std::vector<double> xs;
    double cycles = 0, m3_cycles = 0, simulate_n = 0;
    double m3 = 0, q = 0;
    std::uint64_t seed = 0;
    std::string mode;
    bool light_tail = false;
    int threads = 0;
    std::string csv;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override)");
    cmd->add_option("--out", f.out_path, "write the JSON report here (default stdout)");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--threads", f.threads, "worker threads (default: QBOUND_THREADS or hardware)");
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: malformed JSON in \"" + path + "\": " + e.what());
    }
    return j;
}

// Merge explicitly-given flags over the config file; the merged object is
// what gets validated and echoed into the report.
json merge_flags(const CLI::App* cmd, const CommonFlags& f, const std::string& command) {
    json j = load_config(f.config_path);
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    j["command"] = command;
    auto given = [&](const char* name) {
        const CLI::Option* o = cmd->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
    };
    if (given("--lambda")) j["lambda"] = f.lambda;
    if (given("--mu")) j["mu"] = f.mu;
    if (given("--service")) j["service"] = json::parse(f.service_json);
    if (given("--summand")) j["summand"] = json::parse(f.summand_json);
    if (given("--delay")) j["delay"] = json::parse(f.delay_json);
    if (given("--level")) j["level"] = f.level;
    if (given("--x")) j["x_grid"] = f.xs;
    if (given("--cycles")) j["cycles"] = f.cycles;
    if (given("--m3-cycles")) j["m3_cycles"] = f.m3_cycles;
    if (given("--m3")) j["m3"] = f.m3;
    if (given("--q")) j["q"] = f.q;
    if (given("--simulate")) j["simulate_n"] = f.simulate_n;
    if (given("--seed")) j["seed"] = f.seed;
    if (given("--mode")) j["mode"] = f.mode;
    if (given("--light-tail-substitute")) j["light_tail_substitute"] = f.light_tail;
    if (given("--threads")) j["threads"] = f.threads;
    if (given("--csv")) j["csv"] = f.csv;
    return j;
}

void emit(const json& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("out: cannot open \"" + out_path + "\"");
        out << report.dump(2) << "\n";
    }
}

json report_header(const cfg::RunConfig& c) {
    return json{{"qbound_version", kVersion},
                {"command", c.command},
                {"seed", c.seed},
                {"config", c.echo}};
}

std::vector<double> grid_of(const cfg::RunConfig& c) {
    if (!c.x_grid.empty()) {
        for (double x : c.x_grid)
            if (!(x > 0.0) || !(x < 1.0))
                throw ConfigError("config.x_grid: entries must lie in (0,1)");
        return c.x_grid;
    }
    return geomsum::default_x_grid();
}

double require(const std::optional<double>& v, const char* key) {
    if (!v) throw ConfigError(std::string("config: missing \"") + key + "\"");
    return *v;
}

int require_level(const cfg::RunConfig& c) {
    if (!c.level) throw ConfigError("config: missing \"level\"");
    return *c.level;
}

// m3 for the two-sided reports: user-supplied or a seeded simulation.
std::pair<double, regen::MomentSource> source_m3(const cfg::RunConfig& c,
                                                 const mg1::Model& model, int u,
                                                 const sim::SimOptions& opt) {
    if (c.m3) return {*c.m3, regen::MomentSource::exact};
    std::uint64_t n = c.m3_cycles.value_or(1000000);
    auto stats = sim::simulate_cycles(model, u, n, RngStream(c.seed, 1000), opt);
    return {stats.m3.value, regen::MomentSource::monte_carlo};
}

json mm1_run(const cfg::RunConfig& c, const sim::SimOptions& opt) {
    mm1::Model model(require(c.lambda, "lambda"), require(c.mu, "mu"));
    const int u = require_level(c);
    mg1::Model as_mg1(model.lambda, ServiceDistribution::exponential(model.mu));
    auto [m3, m3_src] = source_m3(c, as_mg1, u, opt);

    json rep = report_header(c);
    rep["model"] = {{"lambda", model.lambda}, {"mu", model.mu},
                    {"rho", model.rho}, {"p", model.p}};
    rep["level"] = u;
    json bounds = json::array();
    for (double x : grid_of(c)) {
        mm1::MM1Report r = mm1::bound_report(model, u, x, m3, m3_src);
        if (bounds.empty()) {
            rep["q"] = r.q;
            rep["q_star"] = r.q_star;
            rep["prefactor"] = r.prefactor;
            rep["mhat1_plus"] = r.mhat1_plus;
            rep["mhat1_plus_asymptotic"] = r.mhat1_plus_asymptotic;
            rep["m1_minus"] = r.m1_minus;
            rep["ratio"] = r.ratio;
            rep["cycle_moments"] = {{"m1", r.m1},
                                    {"m2", r.m2},
                                    {"m2_over_m1_sq", mm1::m2_over_m1_sq(model)},
                                    {"m3", r.m3},
                                    {"m3_source", regen::to_string(r.m3_source)}};
            rep["m2_minus"] = {{"value", r.m2_minus_envelope}, {"source", "envelope"}};
        }
        bounds.push_back({{"x", x},
                          {"mm1_form", cfg::bound_report_to_json(r.asym)},
                          {"two_sided", cfg::bound_report_to_json(r.finite_q)},
                          {"pessimistic_tail", r.pessimistic_tail}});
    }
    rep["bounds"] = bounds;
    return rep;
}

json mg1_run(const cfg::RunConfig& c, const sim::SimOptions& opt) {
    if (!c.service) throw ConfigError("config: missing \"service\"");
    mg1::Model model(require(c.lambda, "lambda"), *c.service);
    const int u = require_level(c);
    auto [m3, m3_src] = source_m3(c, model, u, opt);
    regen::MomentSource mode = cfg::mode_from_string(c.mode);

    std::optional<mg1::McSplitEstimates> mc;
    if (mode == regen::MomentSource::monte_carlo) {
        std::uint64_t n = c.cycles.value_or(1000000);
        auto stats = sim::simulate_cycles(model, u, n, RngStream(c.seed, 2000), opt);
        mc = mg1::McSplitEstimates{stats.q_hat.value, stats.m1_minus.value,
                                   stats.m2_minus.value, stats.m1_plus_cont.value};
    }

    json rep = report_header(c);
    rep["model"] = {{"lambda", model.lambda},
                    {"service", cfg::dist_to_json(model.service)},
                    {"rho", model.rho}};
    rep["level"] = u;
    rep["mode"] = c.mode;

    json bounds = json::array();
    for (double x : grid_of(c)) {
        mg1::MG1Report r = mg1::bound_report(model, u, x, mode, m3, m3_src,
                                             mc ? &*mc : nullptr,
                                             c.light_tail_substitute);
        if (bounds.empty()) {
            rep["q"] = r.q;
            rep["q_star"] = r.q_star;
            rep["mhat1_plus"] = {{"embedded", r.mhat1_plus_embedded},
                                 {"continuous", r.mhat1_plus_continuous},
                                 {"clock_gap", r.clock_gap},
                                 {"clock_gap_cap", r.clock_gap_cap}};
            rep["m1_minus"] = r.m1_minus;
            rep["m2_minus"] = {{"value", r.m2_minus},
                               {"source", mode == regen::MomentSource::monte_carlo
                                              ? "monte-carlo"
                                              : "envelope"}};
            rep["ratio"] = r.ratio;
            rep["cycle_moments"] = {{"m1", r.m1},
                                    {"m2", r.m2},
                                    {"m3", r.m3},
                                    {"m3_source", regen::to_string(r.m3_source)}};
            try {
                auto lt = mg1::light_tail_params(model);
                auto rb = mg1::mhat_light_tail_bound(model, u, r.q, lt);
                rep["light_tail"] = {{"beta", lt.beta},
                                     {"gamma", lt.gamma_rate},
                                     {"v_lambda", lt.v_lambda},
                                     {"alpha", lt.alpha},
                                     {"reach_upper_via_q", rb.via_q},
                                     {"reach_upper_via_gamma", rb.via_gamma},
                                     {"asymptotic", true}};
            } catch (const NoRootError& e) {
                rep["light_tail"] = {{"error", e.what()}};
            }
        }
        bounds.push_back({{"x", x},
                          {"asymptotic_form", cfg::bound_report_to_json(r.asym)},
                          {"two_sided", cfg::bound_report_to_json(r.finite_q)},
                          {"pessimistic_tail", r.pessimistic_tail}});
    }
    rep["bounds"] = bounds;
    return rep;
}

json geomsum_run(const cfg::RunConfig& c, const sim::SimOptions&) {
    if (!c.summand) throw ConfigError("config: missing \"summand\"");
    const ServiceDistribution& summand = *c.summand;
    const ServiceDistribution& delay = c.delay ? *c.delay : summand;
    const double q = require(c.q, "q");
    if (!(q > 0.0) || !(q < 0.5)) throw ConfigError("config.q: must lie in (0, 1/2)");
    auto stats = geomsum::stats_from_laws(summand, delay);

    json rep = report_header(c);
    rep["q"] = q;
    rep["q_star"] = geomsum::q_star(q);
    rep["summand"] = cfg::dist_to_json(summand);
    rep["delay"] = cfg::dist_to_json(delay);
    rep["stats"] = {{"a1", stats.a1}, {"a2", stats.a2}, {"a1_delay", stats.a1_delay}};

    const bool exact_exp = summand.kind() == DistKind::Exponential &&
                           delay.kind() == DistKind::Exponential &&
                           summand.rate() == delay.rate();
    auto grid = grid_of(c);
    json bounds = json::array();
    for (double x : grid) {
        auto e = geomsum::error_bounds(x, q, stats);
        json b{{"x", x}, {"lower", e.lower}, {"upper", e.upper},
               {"informative", e.informative}};
        if (exact_exp) b["delta_exact"] = geomsum::delta_exact_exponential(x, q);
        bounds.push_back(b);
    }
    rep["bounds"] = bounds;

    if (c.simulate_n) {
        auto emp = geomsum::simulate_geom_sum(delay, summand, q, *c.simulate_n,
                                              RngStream(c.seed, 0), grid);
        json sim_j{{"n", emp.n},
                   {"mean_sum", emp.mean_sum},
                   {"mean_se", emp.mean_se}};
        json pts = json::array();
        for (std::size_t i = 0; i < emp.x.size(); ++i)
            pts.push_back({{"x", emp.x[i]},
                           {"t", emp.t[i]},
                           {"cdf", emp.cdf[i]},
                           {"se", emp.se[i]},
                           {"delta", emp.delta[i]}});
        sim_j["points"] = pts;
        rep["empirical"] = sim_j;
    }
    return rep;
}

json estimate_to_json(const sim::SimEstimate& e) {
    return {{"value", e.value}, {"se", e.se}, {"n", e.n}};
}

json simulate_run(const cfg::RunConfig& c, const sim::SimOptions& opt) {
    ServiceDistribution service =
        c.service ? *c.service
                  : ServiceDistribution::exponential(require(c.mu, "mu or service"));
    mg1::Model model(require(c.lambda, "lambda"), service);
    const int u = require_level(c);
    const std::uint64_t n = c.cycles.value_or(1000000);

    std::ofstream csv;
    sim::CycleSink sink;
    if (c.csv) {
        csv.open(*c.csv);
        if (!csv) throw ConfigError("csv: cannot open \"" + *c.csv + "\"");
        csv << "length,idle,max_level,hit,t_cont,t_emb\r\n";
        sink = [&csv](const sim::CycleRecord& r) {
            csv << r.total_length << ',' << r.idle_time << ',' << r.max_level << ','
                << (r.hit ? 1 : 0) << ',';
            if (r.hit)
                csv << r.hit_time_continuous << ',' << r.hit_time_embedded;
            else
                csv << ',';
            csv << "\r\n";
        };
    }

    auto stats = sim::simulate_cycles(model, u, n, RngStream(c.seed, 0), opt, sink);
    json rep = report_header(c);
    rep["model"] = {{"lambda", model.lambda},
                    {"service", cfg::dist_to_json(model.service)},
                    {"rho", model.rho}};
    rep["level"] = u;
    rep["estimates"] = {{"q_hat", estimate_to_json(stats.q_hat)},
                        {"m1", estimate_to_json(stats.m1)},
                        {"m2", estimate_to_json(stats.m2)},
                        {"m3", estimate_to_json(stats.m3)},
                        {"m1_minus", estimate_to_json(stats.m1_minus)},
                        {"m2_minus", estimate_to_json(stats.m2_minus)},
                        {"m1_plus_cont", estimate_to_json(stats.m1_plus_cont)},
                        {"m1_plus_emb", estimate_to_json(stats.m1_plus_emb)},
                        {"m1_plus_full", estimate_to_json(stats.m1_plus_full)},
                        {"cycles", stats.n},
                        {"hits", stats.hits}};
    if (c.csv) rep["csv"] = *c.csv;
    return rep;
}

// Analytic report + fresh simulation + sandwich check.
std::pair<json, sim::Verdict> verify_run(const cfg::RunConfig& c,
                                         const sim::SimOptions& opt) {
    ServiceDistribution service =
        c.service ? *c.service
                  : ServiceDistribution::exponential(require(c.mu, "mu or service"));
    mg1::Model model(require(c.lambda, "lambda"), service);
    const int u = require_level(c);
    auto grid = grid_of(c);
    auto [m3, m3_src] = source_m3(c, model, u, opt);

    std::vector<regen::BoundReport> reports;
    double m1_minus = 0, q = 0;
    json per_x = json::array();
    for (double x : grid) {
        mg1::MG1Report r = mg1::bound_report(model, u, x, regen::MomentSource::exact,
                                             m3, m3_src);
        reports.push_back(r.finite_q);
        m1_minus = r.m1_minus;
        q = r.q;
    }

    const std::uint64_t n = c.cycles.value_or(1000000);
    sim::Engine engine = service.kind() == DistKind::Exponential
                             ? sim::Engine::mm1_walk
                             : sim::Engine::event_driven;
    auto emp = sim::hitting_cdf(model, u, n, grid, m1_minus, q,
                                RngStream(c.seed, 0), opt, engine);
    sim::Verdict verdict = sim::verify_report(reports, emp);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        per_x.push_back({{"x", grid[i]},
                         {"lower", reports[i].lower},
                         {"upper", reports[i].upper},
                         {"delta_hat", emp.delta[i]},
                         {"se", emp.se[i]},
                         {"informative", reports[i].informative}});
    }

    json rep = report_header(c);
    rep["model"] = {{"lambda", model.lambda},
                    {"service", cfg::dist_to_json(model.service)},
                    {"rho", model.rho}};
    rep["level"] = u;
    rep["q"] = q;
    rep["m1_minus"] = m1_minus;
    rep["m3"] = {{"value", m3}, {"source", regen::to_string(m3_src)}};
    rep["histories"] = n;
    rep["engine"] = engine == sim::Engine::mm1_walk ? "mm1_walk" : "event_driven";
    rep["points"] = per_x;
    rep["verdict"] = sim::to_string(verdict);
    return {rep, verdict};
}

}

int main(int argc, char** argv) {
    CLI::App app{"Analytic two-sided bounds on level-crossing probabilities of "
                 "regenerative queueing processes, with seeded Monte Carlo "
                 "verification"};
    app.require_subcommand(1);

    CommonFlags f;
    auto* mm1_cmd = app.add_subcommand("mm1", "closed-form M/M/1 bound report");
    mm1_cmd->add_option("--lambda", f.lambda, "arrival rate");
    mm1_cmd->add_option("--mu", f.mu, "service rate");
    mm1_cmd->add_option("--level,-u", f.level, "level u (integer >= 1)");
    mm1_cmd->add_option("--x", f.xs, "scaled-time grid points in (0,1); default 0.1..0.9");
    mm1_cmd->add_option("--m3", f.m3, "third cycle moment (default: simulated)");
    mm1_cmd->add_option("--m3-cycles", f.m3_cycles, "cycles for the m3 estimate (default 1e6)");
    add_common(mm1_cmd, f);

    auto* mg1_cmd = app.add_subcommand("mg1", "M/G/1 bound report via the taboo systems");
    mg1_cmd->add_option("--lambda", f.lambda, "arrival rate");
    mg1_cmd->add_option("--service", f.service_json, "service law JSON, e.g. '{\"type\":\"erlang\",\"shape\":2,\"rate\":4.0}'");
    mg1_cmd->add_option("--level,-u", f.level, "level u (integer >= 1)");
    mg1_cmd->add_option("--x", f.xs, "scaled-time grid points in (0,1)");
    mg1_cmd->add_option("--mode", f.mode, "moment sourcing: exact|envelope|monte-carlo");
    mg1_cmd->add_option("--m3", f.m3, "third cycle moment (default: simulated)");
    mg1_cmd->add_option("--m3-cycles", f.m3_cycles, "cycles for the m3 estimate");
    mg1_cmd->add_option("--cycles", f.cycles, "cycles for monte-carlo mode");
    mg1_cmd->add_flag("--light-tail-substitute", f.light_tail,
                      "replace the reach mean in the upper bound by its light-tail bound");
    add_common(mg1_cmd, f);

    auto* gs_cmd = app.add_subcommand("geomsum", "delayed geometric-sum error bounds");
    gs_cmd->add_option("--q", f.q, "success probability in (0, 1/2)");
    gs_cmd->add_option("--summand", f.summand_json, "summand law JSON");
    gs_cmd->add_option("--delay", f.delay_json, "delay law JSON (default: summand)");
    gs_cmd->add_option("--x", f.xs, "grid points in (0,1)");
    gs_cmd->add_option("--simulate", f.simulate_n, "also simulate this many sums");
    add_common(gs_cmd, f);

    auto* sim_cmd = app.add_subcommand("simulate", "simulate regeneration cycles");
    sim_cmd->add_option("--lambda", f.lambda, "arrival rate");
    sim_cmd->add_option("--mu", f.mu, "exponential service rate (or use --service)");
    sim_cmd->add_option("--service", f.service_json, "service law JSON");
    sim_cmd->add_option("--level,-u", f.level, "level u");
    sim_cmd->add_option("--cycles", f.cycles, "number of cycles (default 1e6)");
    sim_cmd->add_option("--csv", f.csv, "write per-cycle records here (single-threaded)");
    add_common(sim_cmd, f);

    auto* ver_cmd = app.add_subcommand("verify", "check bounds against a fresh simulation");
    ver_cmd->add_option("--lambda", f.lambda, "arrival rate");
    ver_cmd->add_option("--mu", f.mu, "exponential service rate (or use --service)");
    ver_cmd->add_option("--service", f.service_json, "service law JSON");
    ver_cmd->add_option("--level,-u", f.level, "level u");
    ver_cmd->add_option("--x", f.xs, "grid points in (0,1)");
    ver_cmd->add_option("--cycles", f.cycles, "first-passage histories (default 1e6)");
    ver_cmd->add_option("--m3", f.m3, "third cycle moment (default: simulated)");
    ver_cmd->add_option("--m3-cycles", f.m3_cycles, "cycles for the m3 estimate");
    add_common(ver_cmd, f);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        const std::string command = active->get_name();
        cfg::RunConfig cfgd = cfg::run_config_from_json(merge_flags(active, f, command));
        cfgd.command = command;
        sim::SimOptions opt;
        opt.threads = cfgd.threads;

        if (command == "mm1") {
            emit(mm1_run(cfgd, opt), f.out_path);
        } else if (command == "mg1") {
            emit(mg1_run(cfgd, opt), f.out_path);
        } else if (command == "geomsum") {
            emit(geomsum_run(cfgd, opt), f.out_path);
        } else if (command == "simulate") {
            emit(simulate_run(cfgd, opt), f.out_path);
        } else if (command == "verify") {
            auto [rep, verdict] = verify_run(cfgd, opt);
            emit(rep, f.out_path);
            if (verdict == sim::Verdict::fail) return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
