#include "qbound/geomsum.hpp"

#include <cmath>

#include "qbound/detail/chunks.hpp"
#include "qbound/errors.hpp"

namespace qbound::geomsum {

namespace {
constexpr double kEm2 = 0.71828182845904523536;  // e - 2
}

double q_star(double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw DomainError("q_star: q must lie in (0,1)");
    return -std::log1p(-q);
}

Envelope lorden_bounds(double t, double a1, double a2) {
    if (!(a1 > 0.0)) throw DomainError("lorden_bounds: a1 must be > 0");
    if (!(a2 >= a1 * a1)) throw DomainError("lorden_bounds: a2 must be >= a1^2");
    if (!(t >= 0.0)) throw DomainError("lorden_bounds: t must be >= 0");
    return {t / a1 - 1.0, t / a1 + a2 / (a1 * a1) - 1.0};
}

SummandStats stats_from_laws(const ServiceDistribution& summand,
                             const ServiceDistribution& delay) {
    SummandStats s;
    s.a1 = summand.moment(1);
    s.a2 = summand.moment(2);
    s.a1_delay = delay.moment(1);
    const double a1 = s.a1;
    s.delay_tail = [delay](double t) { return delay.tail(t); };
    s.delay_partial_mean = [delay, a1](double t) {
        return delay.partial_mean_above(t) / a1;
    };
    return s;
}

double error_lower(double x, double q, const SummandStats& stats) {
    if (!(x > 0.0)) throw DomainError("error_lower: x must be > 0");
    if (!(q > 0.0) || !(q < 0.5))
        throw DomainError("error_lower: q must lie in (0, 1/2)");
    const double qs = q_star(q);
    const double ratio2 = stats.a2 / (stats.a1 * stats.a1);
    const double g = stats.delay_partial_mean(stats.a1 * x / qs);
    return qs * std::exp(-x) * (stats.a1_delay / stats.a1 - ratio2 - g);
}

double error_upper(double x, double q, const SummandStats& stats) {
    if (!(x > 0.0) || !(x < 1.0))
        throw DomainError("error_upper: x must lie in (0,1)");
    if (!(q > 0.0) || !(q < 0.5))
        throw DomainError("error_upper: q must lie in (0, 1/2)");
    const double qs = q_star(q);
    const double r2 = stats.a2 / (stats.a1 * stats.a1);
    const double tail = stats.delay_tail(stats.a1 * x / qs);
    // With V = x - q* N_d(a1 x/q*), the error is e^{-x} E[e^V - 1] and
    // e^y - 1 <= y + (e-2) y^2 on y <= 1.  E V^2 splits into a mean part
    // 2x E V (whose delay-tail slice joins the E V tail slice in c1) and a
    // second-moment part (q*)^2 E N_d^2 - x^2, bounded through the renewal
    // envelope; c2 is that second-moment bound.
    const double c1 = (2.0 * x * x * kEm2 + x) * tail;
    const double c2 = kEm2 * ((2.0 * r2 + 1.0) * (x + (r2 - 1.0) * qs) +
                              2.0 * r2 * x - 2.0 * x + qs);
    return qs * std::exp(-x) *
           (stats.a1_delay / stats.a1 * (1.0 + 2.0 * x * kEm2) + c1 + c2);
}

GeomSumError error_bounds(double x, double q, const SummandStats& stats) {
    GeomSumError e;
    e.x = x;
    e.q = q;
    e.q_star = q_star(q);
    e.lower = error_lower(x, q, stats);
    e.upper = error_upper(x, q, stats);
    e.informative = e.lower > -1.0 && e.upper < 1.0;
    return e;
}

double delta_exact_exponential(double x, double q) {
    if (x == 0.0) return 0.0;
    if (!(q > 0.0) || !(q < 1.0))
        throw DomainError("delta_exact_exponential: q must lie in (0,1)");
    const double qs = q_star(q);
    return std::exp(-x * q / qs) - std::exp(-x);
}

std::vector<double> default_x_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) g.push_back(0.1 * i);
    return g;
}

EmpiricalCdf simulate_geom_sum(const ServiceDistribution& delay,
                               const ServiceDistribution& summand, double q,
                               std::size_t n, RngStream rng,
                               std::span<const double> xs) {
    if (n < 1) throw DomainError("simulate_geom_sum: n must be >= 1");
    const double qs = q_star(q);
    const double a1 = summand.moment(1);

    EmpiricalCdf out;
    out.n = n;
    out.x.assign(xs.begin(), xs.end());
    for (double x : xs) out.t.push_back(a1 * x / qs);

    struct Acc {
        std::vector<std::size_t> counts;
        long double sum = 0.0L, sum2 = 0.0L;
    };
    const auto& tpts = out.t;
    auto accs = detail::run_chunks<Acc>(
        n, rng, 0, [&](Acc& acc, RngStream& r, std::size_t count) {
            acc.counts.assign(tpts.size(), 0);
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint64_t nu = r.geometric(q);
                double s = delay.sample(r);
                for (std::uint64_t k = 2; k <= nu; ++k) s += summand.sample(r);
                acc.sum += s;
                acc.sum2 += static_cast<long double>(s) * s;
                for (std::size_t j = 0; j < tpts.size(); ++j)
                    if (s <= tpts[j]) ++acc.counts[j];
            }
        });

    std::vector<std::size_t> counts(xs.size(), 0);
    long double sum = 0.0L, sum2 = 0.0L;
    for (const auto& a : accs) {
        for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += a.counts[j];
        sum += a.sum;
        sum2 += a.sum2;
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
        double p = static_cast<double>(counts[j]) / n;
        out.cdf.push_back(p);
        out.se.push_back(std::sqrt(p * (1.0 - p) / n));
        out.delta.push_back(1.0 - std::exp(-out.x[j]) - p);
    }
    out.mean_sum = static_cast<double>(sum / n);
    double var = static_cast<double>(sum2 / n) - out.mean_sum * out.mean_sum;
    out.mean_se = std::sqrt(std::max(var, 0.0) / n);
    return out;
}

}
