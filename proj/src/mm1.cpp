#include "qbound/mm1.hpp"

#include <cmath>

#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"

namespace qbound::mm1 {

namespace {
constexpr double kEm2 = 0.71828182845904523536;  // e - 2

// rho^u and 1 - rho^u through log1p/expm1; accurate for rho near 1 and
// large u alike, so none of the closed forms ever form rho^{-u}.
double pow_rho(const Model& m, int u) { return std::exp(u * std::log(m.rho)); }
double one_minus_pow_rho(const Model& m, int u) {
    return -std::expm1(u * std::log(m.rho));
}

void require_u2(int u, const char* who) {
    if (u < 2) throw DomainError(std::string(who) + ": u must be >= 2");
}
}

Model::Model(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
    if (!(lambda > 0.0) || !(mu > 0.0))
        throw DomainError("mm1: rates must be positive");
    rho = lambda / mu;
    if (!(rho < 1.0)) throw DomainError("mm1: requires rho = lambda/mu < 1");
    p = lambda / (lambda + mu);
}

WalkTransforms walk_transforms(const Model& m) {
    WalkTransforms t;
    t.h1_at_1 = (1.0 - m.p) / m.p;  // = 1/rho
    t.h2_at_1 = 1.0;
    t.dh1_at_1 = -(1.0 - m.p) / (m.p * (1.0 - 2.0 * m.p));
    t.dh2_at_1 = 1.0 / (1.0 - 2.0 * m.p);
    return t;
}

double exceedance(const Model& m, int u) {
    if (u < 1) throw DomainError("exceedance: u must be >= 1");
    if (u == 1) return 1.0;
    const double num = (1.0 - m.rho) * std::exp((u - 1) * std::log(m.rho));
    return num / one_minus_pow_rho(m, u);
}

double absorb_zero_prob(const Model& m, int u) {
    require_u2(u, "absorb_zero_prob");
    return one_minus_pow_rho(m, u - 1) / one_minus_pow_rho(m, u);
}

double reach_mean_star(const Model& m, int u) {
    // P'_{1,u}(1) with h1(1) = 1/rho, h2(1) = 1, h1'(1) = -(1-p)/(p(1-2p)),
    // h2'(1) = 1/(1-2p); written in powers of rho^u <= 1 so nothing overflows
    require_u2(u, "reach_mean_star");
    const double ru = pow_rho(m, u);
    const double d = one_minus_pow_rho(m, u);
    const double num = std::exp((u - 1) * std::log(m.rho)) *
                       (u * (1.0 - m.rho) * (1.0 + ru) - (1.0 + m.rho) * d);
    return num / ((1.0 - 2.0 * m.p) * d * d);
}

double absorb_mean_star(const Model& m, int u) {
    require_u2(u, "absorb_mean_star");
    const double ru = pow_rho(m, u);
    const double d = one_minus_pow_rho(m, u);
    return (1.0 + u * (2.0 - 1.0 / m.p) * ru / d) / (1.0 - 2.0 * m.p);
}

double return_mean_star_direct(const Model& m, int u) {
    require_u2(u, "return_mean_star_direct");
    const double ru = pow_rho(m, u);
    const double ru1 = pow_rho(m, u - 1);
    const double d = one_minus_pow_rho(m, u);
    const double num = u * (1.0 - ru1) * (1.0 + ru) - (u - 1.0) * (1.0 + ru1) * d;
    return num / ((1.0 - 2.0 * m.p) * d * d);
}

double reach_mean_time(const Model& m, int u) {
    return reach_mean_star(m, u) / (m.lambda + m.mu);
}

double mhat1_plus(const Model& m, int u) {
    require_u2(u, "mhat1_plus");
    const double ru = pow_rho(m, u);
    const double d = one_minus_pow_rho(m, u);
    const double num = u * (1.0 - m.rho) * (1.0 + ru) - (1.0 + m.rho) * d;
    return 1.0 / m.lambda +
           num / ((1.0 - 2.0 * m.p) * d * (1.0 - m.rho) * (m.lambda + m.mu));
}

double mhat1_plus_asymptotic(const Model& m, int u) {
    // exact form with the O(u rho^u) remainder dropped; grows at 1/(mu-lambda)
    // per level
    require_u2(u, "mhat1_plus_asymptotic");
    return 1.0 / m.lambda + (u - (1.0 + m.rho) / (1.0 - m.rho)) /
                                ((1.0 - 2.0 * m.p) * (m.lambda + m.mu));
}

double m1_minus(const Model& m, int u) {
    require_u2(u, "m1_minus");
    const double return_star = absorb_mean_star(m, u) - reach_mean_star(m, u);
    const double q = exceedance(m, u);
    return 1.0 / m.lambda + return_star / ((m.lambda + m.mu) * (1.0 - q));
}

std::pair<double, double> cycle_moments(const Model& m) {
    const double b2 = 2.0 / (m.mu * m.mu);
    const double om = 1.0 - m.rho;
    const double m1 = 1.0 / (om * m.lambda);
    const double m2 = 2.0 / (m.lambda * m.lambda * om) + b2 / (om * om * om);
    return {m1, m2};
}

double m2_over_m1_sq(const Model& m) {
    return 2.0 * (1.0 - m.rho) + 2.0 * m.rho * m.rho / (1.0 - m.rho);
}

MM1Report bound_report(const Model& m, int u, double x, double m3,
                       regen::MomentSource m3_source, double gamma) {
    MM1Report rep;
    rep.u = u;
    rep.x = x;
    rep.q = exceedance(m, u);
    if (!(rep.q < 0.5))
        throw DomainError("mm1 bound_report: q(u) >= 1/2, bounds not applicable");
    rep.q_star = geomsum::q_star(rep.q);
    rep.prefactor = (1.0 - m.rho) * std::exp((u - 1) * std::log(m.rho));
    rep.mhat1_plus = mhat1_plus(m, u);
    rep.mhat1_plus_asymptotic = mhat1_plus_asymptotic(m, u);
    rep.m1_minus = m1_minus(m, u);
    rep.ratio = rep.mhat1_plus / rep.m1_minus;
    auto [m1, m2] = cycle_moments(m);
    rep.m1 = m1;
    rep.m2 = m2;
    rep.m3 = m3;
    rep.m3_source = m3_source;
    rep.m2_minus_envelope = m2 / (1.0 - rep.q);

    // dedicated M/M/1 asymptotic form with prefactor (1-rho) rho^{u-1}
    const double fac = 2.0 * (1.0 - m.rho) + 2.0 * m.rho * m.rho / (1.0 - m.rho);
    const double ex = std::exp(-x);
    rep.asym.x = x;
    rep.asym.lower = ex * rep.prefactor * (rep.ratio - fac);
    rep.asym.upper = ex * rep.prefactor *
                     (rep.ratio * (1.0 + 2.0 * x * kEm2) + 4.0 * kEm2 * fac * x - x);
    rep.asym.tail_lower = ex + rep.asym.lower;
    rep.asym.asymptotic = true;
    rep.asym.informative = rep.asym.lower > -1.0 && rep.asym.upper < 1.0;
    rep.asym.inverted = rep.asym.lower > rep.asym.upper;

    regen::SplitCycleStats split{rep.q, rep.m1_minus, rep.m2_minus_envelope,
                                 rep.mhat1_plus, regen::MomentSource::exact};
    regen::CycleMoments moments(m1, m2, m3, gamma);
    rep.finite_q = regen::error_bounds(x, split, moments);
    rep.pessimistic_tail = regen::pessimistic_tail_lower(x, rep.q, m1, m2, rep.ratio);
    return rep;
}

}
