#include "qbound/regen_bounds.hpp"

#include <cmath>
#include <limits>

#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"

namespace qbound::regen {

namespace {
constexpr double kEm2 = 0.71828182845904523536;  // e - 2

void check_q(double q) {
    if (!(q > 0.0) || !(q < 0.5))
        throw DomainError("regen bounds: q must lie in (0, 1/2)");
}
}

CycleMoments::CycleMoments(double m1_, double m2_, double m_gamma_, double gamma_)
    : m1(m1_), m2(m2_), m_gamma(m_gamma_), gamma(gamma_) {
    if (!(m1 > 0.0)) throw DomainError("CycleMoments: m1 must be > 0");
    if (!(m2 >= m1 * m1)) throw DomainError("CycleMoments: m2 must be >= m1^2");
    if (!(gamma > 2.0)) throw DomainError("CycleMoments: gamma must exceed 2");
    if (!(m_gamma >= std::pow(m1, gamma)))
        throw DomainError("CycleMoments: m_gamma must be >= m1^gamma");
}

const char* to_string(MomentSource s) {
    switch (s) {
        case MomentSource::exact: return "exact";
        case MomentSource::envelope: return "envelope";
        case MomentSource::monte_carlo: return "monte-carlo";
    }
    return "?";
}

double split_moment_identity(double m_r_minus, double m_r_plus, double q) {
    return (1.0 - q) * m_r_minus + q * m_r_plus;
}

MomentEnvelopes split_moment_envelopes(const CycleMoments& m, double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw DomainError("split_moment_envelopes: q must lie in (0,1)");
    MomentEnvelopes e;
    const double g = m.gamma;
    e.m1_plus_hi = std::pow(m.m_gamma / q, 1.0 / g);
    e.m2_plus_hi = std::pow(m.m_gamma / q, 2.0 / g);
    e.m_gamma_plus_hi = m.m_gamma / q;
    e.m1_minus_lo = (m.m1 - std::pow(m.m_gamma, 1.0 / g) * std::pow(q, 1.0 - 1.0 / g)) / (1.0 - q);
    e.m1_minus_hi = m.m1 / (1.0 - q);
    e.m2_minus_lo = (m.m2 - std::pow(m.m_gamma, 2.0 / g) * std::pow(q, 1.0 - 2.0 / g)) / (1.0 - q);
    e.m2_minus_hi = m.m2 / (1.0 - q);
    const double mg = m.m_gamma, gam = g;
    e.plus_tail = [mg, q, gam](double t) {
        if (t <= 0.0) return 1.0;
        return std::min(1.0, mg / (q * std::pow(t, gam)));
    };
    if (!(e.m1_minus_lo > 0.0))
        throw DegenerateError("split_moment_envelopes: m1^- lower bracket nonpositive (q too large)");
    return e;
}

BoundReport error_bounds(double x, const SplitCycleStats& split,
                         const CycleMoments& moments, bool lower_only) {
    check_q(split.q);
    if (!(x > 0.0)) throw DomainError("error_bounds: x must be > 0");
    if (!lower_only && !(x < 1.0))
        throw DomainError("error_bounds: x must lie in (0,1) for the two-sided bound");
    if (!(split.m1_minus > 0.0) || !(split.m2_minus > 0.0) || !(split.m1_plus_hat > 0.0))
        throw DomainError("error_bounds: split moments must be positive");

    const double q = split.q;
    const double qs = geomsum::q_star(q);
    const double g = moments.gamma;
    const double m1m = split.m1_minus;
    const double r2 = split.m2_minus / (m1m * m1m);
    const double ratio = split.m1_plus_hat / m1m;
    const double ex = std::exp(-x);

    // tail envelope of the reach-time distribution, evaluated at x m1^-/q*
    const double g_env = g * moments.m_gamma * std::pow(qs, g - 2.0) * (1.0 + q) /
                         ((g - 1.0) * std::pow(x, g - 1.0) * std::pow(m1m, g));
    const double c0 = r2 + g_env;

    BoundReport rep;
    rep.x = x;
    rep.lower = ex * qs * (ratio - c0);
    if (lower_only && x >= 1.0) {
        rep.upper = std::numeric_limits<double>::infinity();
        rep.lower_only = true;
    } else {
        const double c1 = (2.0 * x * kEm2 + 1.0) * moments.m_gamma *
                          std::pow(qs, g - 1.0) * (1.0 + q) /
                          (std::pow(m1m, g) * std::pow(x, g - 1.0));
        const double c2 = kEm2 * ((2.0 * r2 + 1.0) * (x + (r2 - 1.0) * qs) +
                                  2.0 * r2 * x - 2.0 * x + qs);
        rep.upper = ex * qs * (ratio * (1.0 + 2.0 * x * kEm2) + c1 + c2);
    }
    rep.tail_lower = ex + rep.lower;
    rep.informative = rep.lower > -1.0 && rep.upper < 1.0;
    rep.inverted = rep.lower > rep.upper;
    return rep;
}

BoundReport asymptotic_error_bounds(double x, double q, double m1, double m2,
                                    double ratio) {
    check_q(q);
    if (!(x > 0.0) || !(x < 1.0))
        throw DomainError("asymptotic_error_bounds: x must lie in (0,1)");
    const double qs = geomsum::q_star(q);
    const double ex = std::exp(-x);
    const double r2 = m2 / (m1 * m1);

    BoundReport rep;
    rep.x = x;
    rep.lower = ex * qs * (ratio - r2);
    rep.upper = ex * qs * (ratio * (1.0 + 2.0 * x * kEm2) + kEm2 * (4.0 * r2 * x - x));
    rep.tail_lower = ex + rep.lower;
    rep.asymptotic = true;
    rep.informative = rep.lower > -1.0 && rep.upper < 1.0;
    rep.inverted = rep.lower > rep.upper;
    return rep;
}

double pessimistic_tail_lower(double x, double q, double m1, double m2,
                              double ratio) {
    check_q(q);
    if (!(x >= 0.0)) throw DomainError("pessimistic_tail_lower: x must be >= 0");
    const double qs = geomsum::q_star(q);
    const double ex = std::exp(-x);
    return ex + ex * qs * (ratio - m2 / (m1 * m1));
}

}
