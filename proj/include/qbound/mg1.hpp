#ifndef QBOUND_MG1_HPP
#define QBOUND_MG1_HPP

#include <utility>
#include <vector>

#include "qbound/distributions.hpp"
#include "qbound/regen_bounds.hpp"

namespace qbound::mg1 {

// M/G/1 queue: Poisson arrivals at rate lambda, i.i.d. service times from a
// parametric positive law.  Stability requires rho = lambda * E(service) < 1.
struct Model {
    double lambda;
    ServiceDistribution service;
    double rho;
    Model(double lambda_, ServiceDistribution service_);
};

// Distribution of the number of arrivals during one service:
//   d_k = ∫ (lambda x)^k / k! e^{-lambda x} dG(x),
// with tail sums D_k = P(more than k arrivals) computed by complement and the
// service-weighted terms e_k = E[eta; k arrivals] = (k+1) d_{k+1} / lambda.
struct ArrivalCounts {
    std::vector<double> d;        // d_0 .. d_K
    std::vector<double> D;        // D_0 .. D_K (complements, never tail sums)
    std::vector<double> eta;      // e_0 .. e_{K-1}
    std::vector<double> eta_tail; // M_j = sum_{k>=j} e_k = b1 - prefix, j=0..K
    int K = 0;

    double tail(int k) const { return k < 0 ? 1.0 : D[k]; }
    double weight_tail(int j) const { return eta_tail[j]; }
};

ArrivalCounts arrivals_per_service(const Model& m, int K, double tol = 1e-13);

// Everything the taboo systems produce for one level u >= 2.
struct TabooSolution {
    int u = 0;
    ArrivalCounts counts;
    std::vector<double> q_ku;  // q_{k,u}, k = 1..u-2 (empty for u == 2)
    double q_u = 0.0;          // = q_{1,u}
    std::vector<double> reach_embedded;    // taboo reach means, embedded clock
    std::vector<double> reach_continuous;  // same systems, first-hit clock
    std::vector<double> return_means;      // taboo return means
    double mhat1_plus_embedded = 0.0;    // 1/lambda + reach_embedded[1]/q
    double mhat1_plus_continuous = 0.0;  // 1/lambda + reach_continuous[1]/q
    double m1_minus = 0.0;               // 1/lambda + return[1]/(1-q)
    // numeric overshoot gap and its analytic cap b2/(2 b1) + b1
    double clock_gap = 0.0;
    double clock_gap_cap = 0.0;
};

// q(u) alone (u >= 1; q(1) = 1, q(2) = D_0).
double solve_exceedance(const Model& m, int u);

// Full taboo analysis (u >= 2).
TabooSolution analyze(const Model& m, int u);

// m1 = 1/((1-rho) lambda), m2 = 2/(lambda^2 (1-rho)) + b2/(1-rho)^3.
std::pair<double, double> cycle_moments(const Model& m);

// Light-tail machinery: beta solves E e^{beta eta} = 1 + beta/lambda, giving
// the geometric decay rate gamma = ln(1 + beta/lambda) of q(u); v solves
// M'_G(v) = 1/lambda and alpha = lambda + v - lambda M_G(v) is the busy-period
// decay rate.
struct LightTailParams {
    double beta = 0.0;
    double gamma_rate = 0.0;
    double v_lambda = 0.0;
    double alpha = 0.0;
};

std::pair<double, double> cramer_root(const Model& m);  // (beta, gamma)
std::pair<double, double> busy_decay(const Model& m);   // (v_lambda, alpha)
LightTailParams light_tail_params(const Model& m);

// Upper bounds on the reach mean for light-tailed service, both asymptotic:
// via_q uses u/(alpha e q^{1/u}), via_gamma uses u e^{gamma-1}/alpha.
struct ReachUpperBound {
    double via_q = 0.0;
    double via_gamma = 0.0;
    bool asymptotic = true;
};

ReachUpperBound mhat_light_tail_bound(const Model& m, int u, double q_u,
                                      const LightTailParams& lt);

// Combined report: split stats from the solved systems (exact mode), the
// moment envelopes (envelope mode), or caller-provided Monte Carlo estimates.
struct MG1Report {
    int u = 0;
    double x = 0.0;
    double q = 0.0, q_star = 0.0;
    double mhat1_plus_embedded = 0.0, mhat1_plus_continuous = 0.0;
    double clock_gap = 0.0, clock_gap_cap = 0.0;
    double m1_minus = 0.0, m2_minus = 0.0;
    double ratio = 0.0;  // continuous-clock mhat1+/m1-
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    regen::MomentSource mode = regen::MomentSource::exact;
    regen::MomentSource m3_source = regen::MomentSource::monte_carlo;
    regen::BoundReport asym;      // large-u asymptotic form, o(1) dropped
    regen::BoundReport finite_q;  // two-sided bound at the solved q(u)
    double pessimistic_tail = 0.0;
    bool light_tail_substitute = false;  // ratio built from the via_gamma bound
    LightTailParams light_tail;
};

struct McSplitEstimates {  // used in monte-carlo mode
    double q, m1_minus, m2_minus, m1_plus_hat;
};

MG1Report bound_report(const Model& m, int u, double x, regen::MomentSource mode,
                       double m3, regen::MomentSource m3_source,
                       const McSplitEstimates* mc = nullptr,
                       bool light_tail_substitute = false, double gamma = 3.0);

}

#endif
