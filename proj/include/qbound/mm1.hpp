#ifndef QBOUND_MM1_HPP
#define QBOUND_MM1_HPP

#include <vector>

#include "qbound/regen_bounds.hpp"

namespace qbound::mm1 {

// M/M/1 queue: Poisson arrivals at rate lambda, exponential service at rate
// mu.  The embedded state-change chain is a +/-1 walk with up-probability
// p = lambda/(lambda+mu) < 1/2 whenever rho = lambda/mu < 1.
struct Model {
    double lambda, mu, rho, p;
    Model(double lambda_, double mu_);
};

// Values and derivatives at s=1 of the absorption generating functions'
// characteristic roots h1, h2.
struct WalkTransforms {
    double h1_at_1, h2_at_1, dh1_at_1, dh2_at_1;
};

WalkTransforms walk_transforms(const Model& m);

// q(u): probability that a regeneration cycle reaches level u.
double exceedance(const Model& m, int u);

// P(absorbed at 0 before u | start 1), via the generating function route;
// independent of exceedance() for the certain-absorption identity.
double absorb_zero_prob(const Model& m, int u);

// Expected walk-step count to absorption at u (defective: 0 on failure).
double reach_mean_star(const Model& m, int u);

// Expected walk-step count to absorption at either boundary.
double absorb_mean_star(const Model& m, int u);

// Defective return-step mean, evaluated directly from the generating
// function derivative (independent route for the identity test).
double return_mean_star_direct(const Model& m, int u);

// Continuous-time versions: each walk step holds Exp(lambda+mu).
double reach_mean_time(const Model& m, int u);

// Mean time to reach u within an exceeding cycle (continuous clock).
double mhat1_plus(const Model& m, int u);
// The simplified large-u form (remainder O(u rho^u) dropped).
double mhat1_plus_asymptotic(const Model& m, int u);

// Mean length of a cycle that stays below u.
double m1_minus(const Model& m, int u);

// Unconditional cycle moments: m1 = 1/((1-rho)lambda), m2 per the busy-period
// second moment; also m2/m1^2 = 2(1-rho) + 2rho^2/(1-rho).
std::pair<double, double> cycle_moments(const Model& m);
double m2_over_m1_sq(const Model& m);

// Bound report for the queue-length process: the dedicated M/M/1 form with
// prefactor (1-rho) rho^{u-1}, plus the finite-q two-sided report with exact
// split moments (m2^- enveloped, m_gamma supplied, gamma = 3 by default).
struct MM1Report {
    int u = 0;
    double x = 0.0;
    double q = 0.0, q_star = 0.0;
    double prefactor = 0.0;  // (1-rho) rho^{u-1}
    double mhat1_plus = 0.0, mhat1_plus_asymptotic = 0.0;
    double m1_minus = 0.0, m2_minus_envelope = 0.0;
    double ratio = 0.0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    regen::MomentSource m3_source = regen::MomentSource::monte_carlo;
    regen::BoundReport asym;      // prefactor form, o(1) dropped
    regen::BoundReport finite_q;  // two-sided bound at the actual q(u)
    double pessimistic_tail = 0.0;
};

MM1Report bound_report(const Model& m, int u, double x, double m3,
                       regen::MomentSource m3_source, double gamma = 3.0);

}

#endif
