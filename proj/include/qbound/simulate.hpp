#ifndef QBOUND_SIMULATE_HPP
#define QBOUND_SIMULATE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qbound/mg1.hpp"
#include "qbound/regen_bounds.hpp"
#include "qbound/rng.hpp"

namespace qbound::sim {

struct SimEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

// One regeneration cycle: exponential idle part, then the busy period run
// event by event.  Hit clocks are measured from the first arrival; the
// embedded clock stops at the end of the service during which the level
// first reached u, the continuous clock at the arrival that reached it.
struct CycleRecord {
    double total_length = 0.0;
    double idle_time = 0.0;
    int max_level = 0;
    bool hit = false;
    double hit_time_continuous = 0.0;  // valid when hit
    double hit_time_embedded = 0.0;    // valid when hit
};

struct SimOptions {
    std::size_t event_cap = 1000000000;  // per busy period
    int threads = 0;                     // 0: QBOUND_THREADS env or hardware
};

int resolve_threads(const SimOptions& opt);

struct CycleStats {
    SimEstimate q_hat;
    SimEstimate m1, m2, m3;              // unconditional cycle moments
    SimEstimate m1_minus, m2_minus;      // cycles staying below u
    SimEstimate m1_plus_cont;            // mean reach time, continuous clock
    SimEstimate m1_plus_emb;             // mean reach time, embedded clock
    SimEstimate m1_plus_full;            // mean full length of exceeding cycles
    std::size_t n = 0, hits = 0;
};

using CycleSink = std::function<void(const CycleRecord&)>;

// n independent cycles; deterministic for a given (seed, stream, n) no matter
// how many worker threads run the chunks.  A sink forces single-threaded
// execution so records stream in order.
CycleStats simulate_cycles(const mg1::Model& model, int u, std::size_t n,
                           RngStream base, const SimOptions& opt = {},
                           const CycleSink& sink = nullptr);

// Empirical CDF of the scaled first-passage time q*/m1^- * T(u) on a grid of
// dimensionless points x, built from n independent first-passage histories
// (cycles concatenated until the first hit).
struct HittingCdf {
    std::vector<double> x;      // grid
    std::vector<double> t;      // x * m1_minus / q_star
    std::vector<double> cdf;    // empirical G_X
    std::vector<double> se;     // binomial standard errors
    std::vector<double> delta;  // 1 - e^{-x} - cdf
    double mean_passage = 0.0;
    std::size_t n = 0;
};

enum class Engine {
    event_driven,  // general M/G/1, the default
    mm1_walk       // exponential service only: jump chain + gamma clocks
};

HittingCdf hitting_cdf(const mg1::Model& model, int u, std::size_t n,
                       std::span<const double> xs, double m1_minus, double q,
                       RngStream base, const SimOptions& opt = {},
                       Engine engine = Engine::event_driven);

// Same, but at explicit first-passage times (x and t coincide).
HittingCdf hitting_cdf_at_times(const mg1::Model& model, int u, std::size_t n,
                                std::span<const double> t_points, RngStream base,
                                const SimOptions& opt = {},
                                Engine engine = Engine::event_driven);

// Mean renewal count by each grid time, optionally with a delayed first
// increment drawn from a different law.
struct RenewalEstimate {
    std::vector<double> t;
    std::vector<double> h;
    std::vector<double> se;
    std::size_t n = 0;
};

RenewalEstimate empirical_renewal(const ServiceDistribution& summand,
                                  const ServiceDistribution* delay,
                                  std::span<const double> t_grid, std::size_t n,
                                  RngStream base, const SimOptions& opt = {});

// Sandwich verdict: every grid point must satisfy
// lower - k*se <= delta_hat <= upper + k*se.
enum class Verdict { pass, fail, uninformative };

const char* to_string(Verdict v);

Verdict verify_report(std::span<const regen::BoundReport> reports,
                      const HittingCdf& empirical, double n_sigma = 3.0);

// Survival-tail slope of simulated busy periods with the known t^{-3/2}
// prefactor divided out; test helper for the busy-period decay rate.
struct TailSlope {
    double slope = 0.0;
    std::size_t points = 0;
};

TailSlope busy_period_tail_slope(const mg1::Model& model, std::size_t n,
                                 RngStream base, const SimOptions& opt = {});

}

#endif
