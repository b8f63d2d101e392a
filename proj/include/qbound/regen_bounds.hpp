#ifndef QBOUND_REGEN_BOUNDS_HPP
#define QBOUND_REGEN_BOUNDS_HPP

#include <functional>
#include <string>

namespace qbound::regen {

// Unconditional cycle-length moments; gamma > 2 is the extra moment order
// the two-sided bounds need (default 3 throughout the queue analyzers).
struct CycleMoments {
    double m1, m2, m_gamma, gamma;
    CycleMoments(double m1_, double m2_, double m_gamma_, double gamma_);
};

enum class MomentSource { exact, envelope, monte_carlo };

const char* to_string(MomentSource s);

// Conditional split of a cycle at the level-u exceedance event: q is the
// per-cycle exceedance probability, minus-moments describe cycles that stay
// below u, and m1_plus_hat is the mean time to reach u within an exceeding
// cycle.
struct SplitCycleStats {
    double q;
    double m1_minus;
    double m2_minus;
    double m1_plus_hat;
    MomentSource source = MomentSource::exact;
};

// Two-sided bracket for Delta_X(x) = 1 - e^{-x} - G_X(x m1^- / q*).
struct BoundReport {
    double x = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double tail_lower = 0.0;  // e^{-x} + lower, bounds 1 - G_X from below
    bool informative = true;  // lower > -1 and upper < 1
    bool asymptotic = false;  // o(1) terms dropped
    bool lower_only = false;  // x >= 1: only the lower bound is valid
    bool inverted = false;    // lower > upper (reported, never silently fixed)
};

// Mixture identity (1-q) m_r^- + q m_r^+ = m_r.
double split_moment_identity(double m_r_minus, double m_r_plus, double q);

// Closed-form brackets for the conditional moments in terms of the
// unconditional ones (Hoelder / Markov estimates).  Throws DegenerateError
// when the m1^- lower bracket is nonpositive.
struct MomentEnvelopes {
    double m1_minus_lo, m1_minus_hi;
    double m2_minus_lo, m2_minus_hi;
    double m1_plus_hi;   // also bounds m1_plus_hat
    double m2_plus_hi;
    double m_gamma_plus_hi;
    std::function<double(double)> plus_tail;  // t -> min(1, m_gamma/(q t^gamma))
};

MomentEnvelopes split_moment_envelopes(const CycleMoments& moments, double q);

// Two-sided bound on Delta_X(x) from the split statistics.  Requires
// 0 < q < 1/2 and 0 < x < 1; with lower_only=true any x > 0 is accepted and
// the upper bound is reported as +infinity.
BoundReport error_bounds(double x, const SplitCycleStats& split,
                         const CycleMoments& moments, bool lower_only = false);

// Large-u form with fixed cycle distribution: conditional moments replaced by
// their limits, o(1) set to zero, report flagged asymptotic.
BoundReport asymptotic_error_bounds(double x, double q, double m1, double m2,
                                    double ratio /* m1_plus_hat / m1_minus */);

// Lower bound on the scaled survival 1 - G_X(x m1^-/q*) as u grows.
double pessimistic_tail_lower(double x, double q, double m1, double m2,
                              double ratio);

}

#endif
