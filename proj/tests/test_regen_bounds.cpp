#include <doctest.h>

#include <cmath>
#include <limits>

#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"
#include "qbound/regen_bounds.hpp"
#include "qbound/rng.hpp"

using namespace qbound;
using regen::CycleMoments;
using regen::SplitCycleStats;

TEST_CASE("split moment identity") {
    CHECK(regen::split_moment_identity(3.0, 3.0, 0.37) == doctest::Approx(3.0));
    CHECK(regen::split_moment_identity(1.0, 5.0, 0.25) == doctest::Approx(2.0));
}

TEST_CASE("moment envelopes collapse to m1 as q -> 0 and contain it") {
    CycleMoments m(2.0, 8.0, 60.0, 3.0);
    for (double q : {1e-3, 1e-5, 1e-7}) {
        auto env = regen::split_moment_envelopes(m, q);
        CHECK(env.m1_minus_lo <= 2.0);
        CHECK(2.0 <= env.m1_minus_hi * (1.0 + 1e-12));
        CHECK(env.m1_minus_hi - env.m1_minus_lo < 10.0 * std::pow(q, 2.0 / 3.0));
        CHECK(env.m2_minus_lo <= 8.0);
        CHECK(8.0 <= env.m2_minus_hi * (1.0 + 1e-12));
        CHECK(env.m1_plus_hi == doctest::Approx(std::cbrt(60.0 / q)));
        CHECK(env.m_gamma_plus_hi == doctest::Approx(60.0 / q));
        CHECK(env.plus_tail(1e9) <= 60.0 / (q * 1e27) * (1.0 + 1e-12));
        CHECK(env.plus_tail(0.0) == 1.0);
    }
}

TEST_CASE("moment envelope degenerates for large q") {
    CycleMoments m(1.0, 1.2, 2.0, 3.0);
    CHECK_THROWS_AS(regen::split_moment_envelopes(m, 0.9), DegenerateError);
}

TEST_CASE("two-sided bounds: spot check against the delayed-geometric-sum bounds") {
    // plugging the tail envelopes into the geometric-sum bounds and replacing
    // q*/q by (1+q)
    // can only widen the bracket
    CycleMoments moments(2.0, 8.0, 60.0, 3.0);
    SplitCycleStats split{0.02, 1.95, 8.1, 6.0, regen::MomentSource::exact};
    geomsum::SummandStats stats;
    stats.a1 = split.m1_minus;
    stats.a2 = split.m2_minus;
    stats.a1_delay = split.m1_plus_hat;
    const double q = split.q, mg = moments.m_gamma, g = moments.gamma;
    const double m1m = split.m1_minus;
    stats.delay_tail = [=](double t) { return mg / (q * std::pow(t, g)); };
    stats.delay_partial_mean = [=](double t) {
        return g * mg / (q * m1m * (g - 1.0) * std::pow(t, g - 1.0));
    };
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        auto rep = regen::error_bounds(x, split, moments);
        CHECK(rep.lower <= geomsum::error_lower(x, q, stats) + 1e-15);
        CHECK(rep.upper >= geomsum::error_upper(x, q, stats) - 1e-15);
        // substitution factor (1+q) vs q*/q keeps them within a q^2 sliver
        CHECK(rep.lower == doctest::Approx(geomsum::error_lower(x, q, stats)).epsilon(0.01));
        CHECK(rep.upper == doctest::Approx(geomsum::error_upper(x, q, stats)).epsilon(0.01));
    }
}

TEST_CASE("two-sided bounds: gates and modes") {
    CycleMoments moments(2.0, 8.0, 60.0, 3.0);
    SplitCycleStats split{0.02, 1.95, 8.1, 6.0, regen::MomentSource::exact};
    CHECK_THROWS_AS(regen::error_bounds(1.2, split, moments), DomainError);
    CHECK_THROWS_AS(regen::error_bounds(0.0, split, moments), DomainError);
    SplitCycleStats bad = split;
    bad.q = 0.6;
    CHECK_THROWS_AS(regen::error_bounds(0.5, bad, moments), DomainError);

    auto rep = regen::error_bounds(2.0, split, moments, /*lower_only=*/true);
    CHECK(rep.lower_only);
    CHECK(std::isinf(rep.upper));
    CHECK(rep.lower < 1.0);
    CHECK(rep.tail_lower == doctest::Approx(std::exp(-2.0) + rep.lower));
}

TEST_CASE("never inverted: upper - lower is a sum of positive terms") {
    RngStream rng(91, 0);
    for (int i = 0; i < 500; ++i) {
        double m1 = 0.5 + 3.0 * rng.u01();
        double m2 = m1 * m1 * (1.0 + 2.0 * rng.u01());
        double m3 = std::pow(m1, 3) * (1.0 + 10.0 * rng.u01());
        CycleMoments moments(m1, m2, m3, 3.0);
        double q = 0.001 + 0.099 * rng.u01();
        SplitCycleStats split{q, m1 * (0.8 + 0.3 * rng.u01()),
                              m2 * (0.9 + 0.3 * rng.u01()),
                              m1 * (1.0 + 5.0 * rng.u01()),
                              regen::MomentSource::exact};
        for (int k = 1; k <= 9; ++k) {
            auto rep = regen::error_bounds(0.1 * k, split, moments);
            CHECK(!rep.inverted);
            CHECK(rep.tail_lower == doctest::Approx(std::exp(-0.1 * k) + rep.lower));
        }
    }
}

TEST_CASE("bounds vanish proportionally to q* as q -> 0 with fixed ratios") {
    CycleMoments moments(2.0, 8.0, 60.0, 3.0);
    const double x = 0.4;
    double prev_ratio = 0.0;
    for (double q : {1e-5, 1e-7}) {
        SplitCycleStats split{q, 2.0, 8.0, 8.0, regen::MomentSource::exact};
        auto rep = regen::error_bounds(x, split, moments);
        CHECK(std::fabs(rep.lower) < 10.0 * q);
        CHECK(rep.upper < 10.0 * q);
        double r = rep.upper / rep.lower;
        if (prev_ratio != 0.0) CHECK(r == doctest::Approx(prev_ratio).epsilon(1e-3));
        prev_ratio = r;
    }
}

TEST_CASE("asymptotic form: cancellation at ratio = m2/m1^2") {
    auto rep = regen::asymptotic_error_bounds(0.3, 0.01, 2.0, 8.0, 2.0);
    CHECK(rep.lower == doctest::Approx(0.0));
    CHECK(rep.asymptotic);
    CHECK(rep.upper > 0.0);
}

TEST_CASE("pessimistic tail lower bound") {
    // ratio = m2/m1^2 reproduces the bare exponential bound
    CHECK(regen::pessimistic_tail_lower(0.5, 0.01, 2.0, 8.0, 2.0) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    // at x = 0 with ratio above m2/m1^2 the value exceeds 1 (uninformative)
    CHECK(regen::pessimistic_tail_lower(0.0, 0.01, 2.0, 8.0, 3.0) > 1.0);
}

TEST_CASE("finite-q vs asymptotic form: difference shrinks faster than q*") {
    // m2^- replaced by its upper bracket m2/(1-q), m1^- and the ratio exact
    // limits; the residual is the gamma-moment tail term of order q*
    CycleMoments moments(2.0, 8.0, 60.0, 3.0);
    const double x = 0.5;
    double prev = std::numeric_limits<double>::infinity();
    for (double q : {0.01, 0.003, 0.001, 0.0003}) {
        SplitCycleStats split{q, 2.0, 8.0 / (1.0 - q), 8.0, regen::MomentSource::envelope};
        auto th = regen::error_bounds(x, split, moments);
        auto cor = regen::asymptotic_error_bounds(x, q, 2.0, 8.0, 4.0);
        double qs = geomsum::q_star(q);
        double diff = std::max(std::fabs(th.lower - cor.lower),
                               std::fabs(th.upper - cor.upper)) / qs;
        CHECK(diff < prev);
        prev = diff;
    }
    CHECK(prev < 0.01);
}
