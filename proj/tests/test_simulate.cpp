#include <doctest.h>

#include <cmath>
#include <vector>

#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"
#include "qbound/mg1.hpp"
#include "qbound/mm1.hpp"
#include "qbound/simulate.hpp"
#include "test_util.hpp"

using namespace qbound;

namespace {

mg1::Model mm1_model(double lambda, double mu) {
    return mg1::Model(lambda, ServiceDistribution::exponential(mu));
}

bool same(const sim::SimEstimate& a, const sim::SimEstimate& b) {
    return a.value == b.value && a.se == b.se && a.n == b.n;
}

}

TEST_CASE("bit-identical aggregates for any thread count") {
    auto model = mm1_model(1.0, 2.0);
    sim::SimOptions one, two;
    one.threads = 1;
    two.threads = 2;
    auto a = sim::simulate_cycles(model, 5, 200000, RngStream(99, 0), one);
    auto b = sim::simulate_cycles(model, 5, 200000, RngStream(99, 0), two);
    CHECK(same(a.q_hat, b.q_hat));
    CHECK(same(a.m1, b.m1));
    CHECK(same(a.m2, b.m2));
    CHECK(same(a.m3, b.m3));
    CHECK(same(a.m1_minus, b.m1_minus));
    CHECK(same(a.m1_plus_cont, b.m1_plus_cont));
    CHECK(same(a.m1_plus_emb, b.m1_plus_emb));

    auto h1 = sim::hitting_cdf(model, 5, 100000, geomsum::default_x_grid(),
                               mm1::m1_minus(mm1::Model(1.0, 2.0), 5),
                               mm1::exceedance(mm1::Model(1.0, 2.0), 5),
                               RngStream(99, 10), one);
    auto h2 = sim::hitting_cdf(model, 5, 100000, geomsum::default_x_grid(),
                               mm1::m1_minus(mm1::Model(1.0, 2.0), 5),
                               mm1::exceedance(mm1::Model(1.0, 2.0), 5),
                               RngStream(99, 10), two);
    for (std::size_t i = 0; i < h1.cdf.size(); ++i) CHECK(h1.cdf[i] == h2.cdf[i]);
    CHECK(h1.mean_passage == h2.mean_passage);
}

TEST_CASE("per-cycle records: clock ordering and sink consistency") {
    // deterministic service pins the embedded-continuous gap to at most b
    mg1::Model model(1.0, ServiceDistribution::deterministic(0.5));
    std::vector<sim::CycleRecord> recs;
    auto stats = sim::simulate_cycles(model, 3, 20000, RngStream(7, 0), {},
                                      [&](const sim::CycleRecord& r) {
                                          recs.push_back(r);
                                      });
    CHECK(recs.size() == 20000);
    std::size_t hits = 0;
    for (const auto& r : recs) {
        CHECK(r.idle_time <= r.total_length);
        CHECK(r.max_level >= 1);
        if (r.hit) {
            ++hits;
            CHECK(r.hit_time_continuous <= r.hit_time_embedded);
            CHECK(r.hit_time_embedded <= r.hit_time_continuous + 0.5 + 1e-12);
        }
    }
    CHECK(hits == stats.hits);
}

TEST_CASE("near-empty queue limit") {
    auto model = mm1_model(1.0, 1e6);
    auto stats = sim::simulate_cycles(model, 2, 1000000, RngStream(8, 0));
    CHECK(stats.q_hat.value < 5e-6);
    CHECK(std::fabs(stats.m1.value - 1.0) < 3.0 * stats.m1.se);
}

TEST_CASE("M/M/1 cycle statistics match the closed forms (1e7 cycles)") {
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    const int u = 5;
    auto s = sim::simulate_cycles(model, u, 10000000, RngStream(2025, 0));

    CHECK(std::fabs(s.m1.value - 2.0) < 3.0 * s.m1.se);
    CHECK(std::fabs(s.m2.value - 8.0) < 3.0 * s.m2.se);
    // third cycle moment: 6/lambda^3 + 3*(2/lambda^2)EL + 3*(1/lambda)EL2 + EL3
    // with EL3 = b3/(1-rho)^4 + 3 lambda b2^2/(1-rho)^5 = 36, total 60
    CHECK(std::fabs(s.m3.value - 60.0) < 3.0 * s.m3.se);

    CHECK(std::fabs(s.q_hat.value - mm1::exceedance(mm, u)) < 3.0 * s.q_hat.se);
    CHECK(std::fabs(s.m1_minus.value - mm1::m1_minus(mm, u)) < 3.0 * s.m1_minus.se);
    CHECK(std::fabs(s.m1_plus_cont.value - mm1::mhat1_plus(mm, u)) <
          3.0 * s.m1_plus_cont.se);
    CHECK(std::fabs(s.m1_plus_emb.value - (mm1::mhat1_plus(mm, u) + 0.5)) <
          3.0 * s.m1_plus_emb.se);

    // mixture identity (1-q) m1^- + q m1^+ = m1
    double mix = (1.0 - s.q_hat.value) * s.m1_minus.value +
                 s.q_hat.value * s.m1_plus_full.value;
    double mix_se = std::sqrt(std::pow(s.m1_minus.se, 2) +
                              std::pow(s.m1_plus_full.se * s.q_hat.value, 2) +
                              std::pow(s.m1.se, 2));
    CHECK(std::fabs(mix - s.m1.value) < 4.0 * mix_se);
}

TEST_CASE("degenerate level u = 1: first-passage time is the first arrival") {
    auto model = mm1_model(1.3, 2.0);
    std::vector<double> ts{0.1, 0.3, 0.7, 1.2, 2.0, 3.0};
    auto h = sim::hitting_cdf_at_times(model, 1, 200000, ts, RngStream(12, 0));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double expect = 1.0 - std::exp(-1.3 * ts[i]);
        CHECK(std::fabs(h.cdf[i] - expect) < 3.0 * std::max(h.se[i], 1e-4));
    }
}

TEST_CASE("exponential-start class: scaled survival dominates e^{-x}") {
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    const int u = 6;
    auto grid = geomsum::default_x_grid();
    auto h = sim::hitting_cdf(model, u, 1000000, grid, mm1::m1_minus(mm, u),
                              mm1::exceedance(mm, u), RngStream(13, 0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double survival = 1.0 - h.cdf[i];
        CHECK(survival >= std::exp(-grid[i]) - 3.0 * h.se[i]);
    }
}

TEST_CASE("scaled first-passage CDF approaches 1 - e^{-x} as u grows") {
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    auto grid = geomsum::default_x_grid();
    double prev = 1e9;
    for (int u : {4, 6, 8}) {
        auto h = sim::hitting_cdf(model, u, 1000000, grid, mm1::m1_minus(mm, u),
                                  mm1::exceedance(mm, u), RngStream(14, u));
        double worst = 0.0;
        for (double d : h.delta) worst = std::max(worst, std::fabs(d));
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("event-driven and walk engines sample the same law") {
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    const int u = 6;
    auto grid = geomsum::default_x_grid();
    auto a = sim::hitting_cdf(model, u, 1000000, grid, mm1::m1_minus(mm, u),
                              mm1::exceedance(mm, u), RngStream(15, 0), {},
                              sim::Engine::event_driven);
    auto b = sim::hitting_cdf(model, u, 1000000, grid, mm1::m1_minus(mm, u),
                              mm1::exceedance(mm, u), RngStream(16, 0), {},
                              sim::Engine::mm1_walk);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::fabs(a.cdf[i] - b.cdf[i]) < 3.0 * (a.se[i] + b.se[i]));
    CHECK(a.mean_passage == doctest::Approx(b.mean_passage).epsilon(0.01));

    mg1::Model erl(1.0, ServiceDistribution::erlang(2, 4.0));
    CHECK_THROWS_AS(sim::hitting_cdf(erl, 4, 10, grid, 1.0, 0.1, RngStream(1, 0),
                                     {}, sim::Engine::mm1_walk),
                    DomainError);
}

TEST_CASE("empirical renewal function: Poisson case and Lorden envelope") {
    // exponential(1.3) increments: H(t) = 1.3 t
    auto ex = ServiceDistribution::exponential(1.3);
    std::vector<double> grid{2.0, 5.0, 10.0};
    auto r = sim::empirical_renewal(ex, nullptr, grid, 200000, RngStream(17, 0));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::fabs(r.h[i] - 1.3 * grid[i]) < 3.0 * r.se[i]);

    // Erlang(2,1): a1 = 2, a2 = 6; envelope at t = 10 is [4, 4.5]
    auto erl = ServiceDistribution::erlang(2, 1.0);
    std::vector<double> t10{10.0};
    auto e = sim::empirical_renewal(erl, nullptr, t10, 100000, RngStream(18, 0));
    auto env = geomsum::lorden_bounds(10.0, 2.0, 6.0);
    CHECK(env.lower == doctest::Approx(4.0));
    CHECK(env.upper == doctest::Approx(5.5));
    CHECK(e.h[0] >= env.lower - 3.0 * e.se[0]);
    CHECK(e.h[0] <= env.upper + 3.0 * e.se[0]);
}

TEST_CASE("delayed renewal function sits inside the delay-adjusted bracket") {
    auto erl = ServiceDistribution::erlang(2, 1.0);   // summand: a1 = 2, a2 = 6
    auto dly = ServiceDistribution::exponential(0.7); // delayed first increment
    std::vector<double> grid{4.0, 8.0, 16.0};
    auto r = sim::empirical_renewal(erl, &dly, grid, 200000, RngStream(19, 0));
    const double a1 = 2.0, a2 = 6.0, a1d = dly.mean();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        double fd = dly.cdf(t);
        double g = dly.partial_mean_above(t) / a1;
        double upper = (t / a1 + a2 / (a1 * a1)) * fd + g - a1d / a1;
        double lower = t / a1 - (1.0 - fd) * t / a1 - a1d / a1;
        CHECK(r.h[i] >= lower - 3.0 * r.se[i]);
        CHECK(r.h[i] <= upper + 3.0 * r.se[i]);
    }
}

TEST_CASE("verdicts: pass, fail, uninformative") {
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    const int u = 6;
    std::vector<double> grid{0.2, 0.5, 0.8};
    auto h = sim::hitting_cdf(model, u, 200000, grid, mm1::m1_minus(mm, u),
                              mm1::exceedance(mm, u), RngStream(20, 0));

    std::vector<regen::BoundReport> reports;
    for (double x : grid) {
        auto rep = mm1::bound_report(mm, u, x, 60.0, regen::MomentSource::exact);
        reports.push_back(rep.finite_q);
    }
    CHECK(sim::verify_report(reports, h) == sim::Verdict::pass);

    // the two-sided upper bound runs 2-6x above the observed error at these
    // parameters, so the corruption must be stronger than a factor of two to
    // push it below delta_hat
    auto broken = reports;
    for (auto& r : broken) r.upper *= 0.125;
    CHECK(sim::verify_report(broken, h) == sim::Verdict::fail);

    auto vague = reports;
    for (auto& r : vague) {
        r.lower = -2.0;
        r.upper = 2.0;
        r.informative = false;
    }
    CHECK(sim::verify_report(vague, h) == sim::Verdict::uninformative);
}

TEST_CASE("busy-period tail decay matches the transform rate within 10%") {
    auto model = mm1_model(1.0, 2.0);
    auto slope = sim::busy_period_tail_slope(model, 20000000, RngStream(21, 0));
    double alpha = mg1::busy_decay(model).second;
    CHECK(std::fabs(-slope.slope - alpha) < 0.10 * alpha);

    mg1::Model det(1.0, ServiceDistribution::deterministic(0.5));
    auto ds = sim::busy_period_tail_slope(det, 20000000, RngStream(22, 0));
    double da = mg1::busy_decay(det).second;
    CHECK(std::fabs(-ds.slope - da) < 0.10 * da);
}

TEST_CASE("reach-time tail envelope dominates the integrated partial mean") {
    // g(t) = (1/m1^-) E[chi; chi > t | exceeding cycle] against the
    // gamma-moment envelope used inside the lower bound
    auto model = mm1_model(1.0, 2.0);
    mm1::Model mm(1.0, 2.0);
    const int u = 5;
    std::vector<double> chis;
    sim::SimOptions opt;
    auto stats = sim::simulate_cycles(model, u, 1000000, RngStream(23, 0), opt,
                                      [&](const sim::CycleRecord& r) {
                                          if (r.hit)
                                              chis.push_back(r.idle_time +
                                                             r.hit_time_continuous);
                                      });
    (void)stats;
    const double q = mm1::exceedance(mm, u);
    const double qs = geomsum::q_star(q);
    const double m1m = mm1::m1_minus(mm, u);
    const double m3 = 60.0, gamma = 3.0;
    for (double x : {0.3, 0.5, 0.9}) {
        double t = x * m1m / qs;
        double sum = 0.0, sum2 = 0.0;
        for (double c : chis)
            if (c > t) {
                sum += c;
                sum2 += c * c;
            }
        double ghat = sum / chis.size() / m1m;
        double se = std::sqrt(sum2 / chis.size()) / std::sqrt((double)chis.size()) / m1m;
        double env = gamma * m3 * std::pow(qs, gamma - 2.0) * (1.0 + q) /
                     ((gamma - 1.0) * std::pow(x, gamma - 1.0) * std::pow(m1m, gamma));
        CHECK(ghat <= env + 3.0 * se);
    }
}

TEST_CASE("event cap raises ResourceError") {
    auto model = mm1_model(1.0, 1.05);  // rho close to 1, long busy periods
    sim::SimOptions opt;
    opt.event_cap = 50;
    CHECK_THROWS_AS(sim::simulate_cycles(model, 4, 100000, RngStream(24, 0), opt),
                    ResourceError);
}

TEST_CASE("Hoelder bracket dominates the simulated conditional reach mean") {
    mg1::Model erl(1.0, ServiceDistribution::erlang(2, 4.0));
    const int u = 6;
    auto s = sim::simulate_cycles(erl, u, 1000000, RngStream(31, 0));
    auto [m1, m2] = mg1::cycle_moments(erl);
    regen::CycleMoments moments(m1, m2, s.m3.value, 3.0);
    auto env = regen::split_moment_envelopes(moments, s.q_hat.value);
    // m1+ (full exceeding-cycle mean) obeys the gamma-moment bracket
    CHECK(s.m1_plus_full.value <= env.m1_plus_hi + 3.0 * s.m1_plus_full.se);
    CHECK(s.m1_plus_cont.value <= env.m1_plus_hi + 3.0 * s.m1_plus_cont.se);
}
