#ifndef QBOUND_GEOMSUM_HPP
#define QBOUND_GEOMSUM_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qbound/distributions.hpp"
#include "qbound/rng.hpp"

namespace qbound::geomsum {

// q* = -ln(1-q); satisfies q <= q* <= q + q^2 for q < 1/2.
double q_star(double q);

struct Envelope {
    double lower, upper;
};

// Lorden's two-sided envelope for the renewal function:
// t/a1 - 1 <= H(t) <= t/a1 + a2/a1^2 - 1.
Envelope lorden_bounds(double t, double a1, double a2);

// Moments of the generic summand plus the delayed first term, described by
// function handles so callers can plug in exact forms or Markov-type tail
// envelopes interchangeably.
struct SummandStats {
    double a1 = 0.0;        // mean of generic summand
    double a2 = 0.0;        // second moment of generic summand
    double a1_delay = 0.0;  // mean of the delayed first summand
    std::function<double(double)> delay_tail;          // t -> 1 - F_d(t)
    std::function<double(double)> delay_partial_mean;  // t -> g(t) = (1/a1) ∫_t^∞ y dF_d(y)
};

SummandStats stats_from_laws(const ServiceDistribution& summand,
                             const ServiceDistribution& delay);

// Error of the exponential approximation for a delayed geometric sum:
//   Delta_S(x) = 1 - e^{-x} - G_S(a1 x / q*).
// error_lower is valid for every x > 0; error_upper requires 0 < x < 1.
double error_lower(double x, double q, const SummandStats& stats);
double error_upper(double x, double q, const SummandStats& stats);

struct GeomSumError {
    double x, q, q_star, lower, upper;
    bool informative;  // false once lower <= -1 or upper >= 1
};

GeomSumError error_bounds(double x, double q, const SummandStats& stats);

// Exact Delta_S(x) for i.i.d. exponential summands with no delay.
double delta_exact_exponential(double x, double q);

// Empirical CDF of the delayed geometric sum at the points a1*x/q*.
struct EmpiricalCdf {
    std::vector<double> x;      // dimensionless grid
    std::vector<double> t;      // evaluation points a1*x/q*
    std::vector<double> cdf;    // empirical G_S
    std::vector<double> se;     // binomial standard errors
    std::vector<double> delta;  // 1 - e^{-x} - cdf
    double mean_sum = 0.0;      // sample mean of S (Wald checks)
    double mean_se = 0.0;
    std::size_t n = 0;
};

EmpiricalCdf simulate_geom_sum(const ServiceDistribution& delay,
                               const ServiceDistribution& summand, double q,
                               std::size_t n, RngStream rng,
                               std::span<const double> xs);

// Default evaluation grid {0.1, ..., 0.9}.
std::vector<double> default_x_grid();

}

#endif
