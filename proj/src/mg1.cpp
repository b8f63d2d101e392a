#include "qbound/mg1.hpp"

#include <cmath>

#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"
#include "qbound/linsolve.hpp"
#include "qbound/mathutil.hpp"

namespace qbound::mg1 {

Model::Model(double lambda_, ServiceDistribution service_)
    : lambda(lambda_), service(std::move(service_)) {
    if (!(lambda > 0.0)) throw DomainError("mg1: lambda must be > 0");
    rho = lambda * service.mean();
    if (!(rho < 1.0)) throw DomainError("mg1: requires rho = lambda*E(service) < 1");
}

namespace {

// D_k = P(nu > k) evaluated directly (not by complement), relative-accurate.
double detail_arrival_tail(const Model& m, int k) {
    const double lam = m.lambda;
    switch (m.service.kind()) {
        case DistKind::Exponential: {
            const double p = lam / (lam + m.service.rate());
            return std::exp((k + 1) * std::log(p));
        }
        case DistKind::HyperExponential: {
            double s = 0.0;
            for (std::size_t i = 0; i < m.service.weights().size(); ++i) {
                double p = lam / (lam + m.service.rates()[i]);
                s += m.service.weights()[i] * std::exp((k + 1) * std::log(p));
            }
            return s;
        }
        case DistKind::Deterministic:
            return poisson_survival(k, lam * m.service.value());
        case DistKind::Erlang: {
            const int r = m.service.shape();
            const double p = lam / (lam + m.service.rate());
            double term = std::exp(std::lgamma(k + 1 + r) - std::lgamma(k + 2.0) -
                                   std::lgamma(static_cast<double>(r)) +
                                   (k + 1) * std::log(p) + r * std::log1p(-p));
            double sum = 0.0;
            for (int i = k + 1; i < k + 1000000; ++i) {
                sum += term;
                term *= p * (i + r) / (i + 1.0);
                if (term <= sum * 1e-18) break;
            }
            return sum;
        }
        case DistKind::Uniform: {
            const double lo = m.service.lo(), hi = m.service.hi();
            return integrate(
                [&](double x) {
                    return poisson_survival(k, lam * x) / (hi - lo);
                },
                lo, hi, 1e-16 * (1.0 + std::fabs(hi)));
        }
    }
    return 0.0;
}

// M_j = E[eta; nu >= j] = sum_{k >= j} (k+1) d_{k+1} / lambda, direct form.
double detail_weighted_tail(const Model& m, int j) {
    const double lam = m.lambda;
    if (j <= 0) return m.service.mean();
    switch (m.service.kind()) {
        case DistKind::Exponential: {
            const double p = lam / (lam + m.service.rate());
            return std::exp((j + 1) * std::log(p)) * ((j + 1) * (1.0 - p) + p) /
                   (lam * (1.0 - p));
        }
        case DistKind::HyperExponential: {
            double s = 0.0;
            for (std::size_t i = 0; i < m.service.weights().size(); ++i) {
                double p = lam / (lam + m.service.rates()[i]);
                s += m.service.weights()[i] * std::exp((j + 1) * std::log(p)) *
                     ((j + 1) * (1.0 - p) + p) / (lam * (1.0 - p));
            }
            return s;
        }
        case DistKind::Deterministic: {
            const double mean = lam * m.service.value();
            double term = (j + 1) / lam *
                          std::exp((j + 1) * std::log(mean) - mean -
                                   std::lgamma(j + 2.0));
            double sum = 0.0;
            for (int k = j; k < j + 1000000; ++k) {
                sum += term;
                term *= mean / (k + 1.0);  // (k+2)d_{k+2} / ((k+1)d_{k+1})
                if (term <= sum * 1e-18) break;
            }
            return sum;
        }
        case DistKind::Erlang: {
            const int r = m.service.shape();
            const double p = lam / (lam + m.service.rate());
            double d = std::exp(std::lgamma(j + 1 + r) - std::lgamma(j + 2.0) -
                                std::lgamma(static_cast<double>(r)) +
                                (j + 1) * std::log(p) + r * std::log1p(-p));
            double term = (j + 1) * d / lam;
            double sum = 0.0;
            for (int k = j; k < j + 1000000; ++k) {
                sum += term;
                term *= p * (k + 1 + r) / (k + 1.0);  // (k+2)d_{k+2}/((k+1)d_{k+1})
                if (term <= sum * 1e-18) break;
            }
            return sum;
        }
        case DistKind::Uniform: {
            const double lo = m.service.lo(), hi = m.service.hi();
            return integrate(
                [&](double x) {
                    return x * poisson_survival(j - 1, lam * x) / (hi - lo);
                },
                lo, hi, 1e-16 * (1.0 + std::fabs(hi)));
        }
    }
    return 0.0;
}

}

ArrivalCounts arrivals_per_service(const Model& m, int K, double tol) {
    if (K < 1) throw DomainError("arrivals_per_service: K must be >= 1");
    if (!(tol > 0.0)) throw DomainError("arrivals_per_service: tol must be > 0");
    const double lam = m.lambda;
    ArrivalCounts c;
    c.K = K;
    c.d.assign(K + 1, 0.0);

    switch (m.service.kind()) {
        case DistKind::Exponential: {
            const double p = lam / (lam + m.service.rate());
            double v = 1.0 - p;
            for (int k = 0; k <= K; ++k, v *= p) c.d[k] = v;
            break;
        }
        case DistKind::Deterministic: {
            const double mean = lam * m.service.value();
            double v = std::exp(-mean);
            for (int k = 0; k <= K; ++k) {
                c.d[k] = v;
                v *= mean / (k + 1);
            }
            break;
        }
        case DistKind::Erlang: {
            // negative binomial: C(k+r-1,k) p^k (1-p)^r
            const int r = m.service.shape();
            const double p = lam / (lam + m.service.rate());
            double v = std::pow(1.0 - p, r);
            for (int k = 0; k <= K; ++k) {
                c.d[k] = v;
                v *= p * (k + r) / (k + 1.0);
            }
            break;
        }
        case DistKind::HyperExponential: {
            const auto& w = m.service.weights();
            const auto& r = m.service.rates();
            std::vector<double> v(w.size());
            for (std::size_t i = 0; i < w.size(); ++i)
                v[i] = w[i] * r[i] / (lam + r[i]);
            for (int k = 0; k <= K; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    s += v[i];
                    v[i] *= lam / (lam + r[i]);
                }
                c.d[k] = s;
            }
            break;
        }
        case DistKind::Uniform: {
            const double lo = m.service.lo(), hi = m.service.hi();
            const double dens = 1.0 / (hi - lo);
            for (int k = 0; k <= K; ++k) {
                auto f = [lam, k, dens](double x) {
                    if (x <= 0.0) return k == 0 ? dens : 0.0;
                    double lp = k * std::log(lam * x) - lam * x - std::lgamma(k + 1.0);
                    return std::exp(lp) * dens;
                };
                c.d[k] = integrate(f, lo, hi, tol);
            }
            break;
        }
    }

    c.D.assign(K + 1, 0.0);
    long double prefix = 0.0L;
    for (int k = 0; k <= K; ++k) {
        prefix += c.d[k];
        c.D[k] = static_cast<double>(1.0L - prefix);
    }

    const double b1 = m.service.mean();
    c.eta.assign(K, 0.0);
    c.eta_tail.assign(K + 1, 0.0);
    c.eta_tail[0] = b1;
    long double wprefix = 0.0L;
    for (int k = 0; k < K; ++k) {
        c.eta[k] = (k + 1) * c.d[k + 1] / lam;
        wprefix += c.eta[k];
        c.eta_tail[k + 1] = static_cast<double>(b1 - wprefix);
    }

    // Complements lose relative precision once they fall below the rounding
    // noise of the prefix sums; the linear systems at large u divide by these
    // tails, so switch to direct survival evaluations there.
    for (int k = 0; k <= K; ++k)
        if (c.D[k] < 1e-6) c.D[k] = detail_arrival_tail(m, k);
    for (int j = 1; j <= K; ++j)
        if (c.eta_tail[j] < 1e-6 * b1) c.eta_tail[j] = detail_weighted_tail(m, j);
    return c;
}

namespace {

ArrivalCounts counts_for_level(const Model& m, int u) {
    int K = u + static_cast<int>(std::ceil(50.0 + 10.0 * m.rho));
    for (int attempt = 0; attempt < 20; ++attempt) {
        ArrivalCounts c = arrivals_per_service(m, K);
        if (c.D[K] < 1e-12 && c.eta_tail[K] < 1e-10 * (1.0 + m.service.mean()))
            return c;
        K *= 2;
    }
    throw DomainError("arrivals_per_service: arrival tail not summable at working precision");
}

// All three taboo systems share the same matrix: row i couples state i to the
// post-completion states i+k-1 that stay inside {1..u-2}.
DenseSystem system_matrix(const ArrivalCounts& c, int u) {
    const std::size_t n = static_cast<std::size_t>(u - 2);
    DenseSystem sys;
    sys.n = n;
    sys.a.assign(n * n, 0.0);
    sys.b.assign(n, 0.0);
    for (int i = 1; i <= static_cast<int>(n); ++i) {
        double* row = sys.a.data() + (i - 1) * n;
        row[i - 1] += 1.0;
        for (int k = 0; k <= u - i - 1; ++k) {
            int j = i + k - 1;
            if (j >= 1 && j <= static_cast<int>(n)) row[j - 1] -= c.d[k];
        }
    }
    return sys;
}

std::vector<double> solve_with_rhs(DenseSystem sys, std::vector<double> rhs) {
    sys.b = std::move(rhs);
    return solve(sys).x;
}

}

double solve_exceedance(const Model& m, int u) {
    if (u < 1) throw DomainError("solve_exceedance: u must be >= 1");
    if (u == 1) return 1.0;  // the first arrival reaches level 1
    ArrivalCounts c = counts_for_level(m, u);
    if (u == 2) return c.D[0];
    DenseSystem sys = system_matrix(c, u);
    std::vector<double> rhs(sys.n);
    for (int k = 1; k <= static_cast<int>(sys.n); ++k) rhs[k - 1] = c.D[u - k - 1];
    auto q = solve_with_rhs(sys, std::move(rhs));
    return q[0];
}

TabooSolution analyze(const Model& m, int u) {
    if (u < 2) throw DomainError("analyze: u must be >= 2");
    TabooSolution t;
    t.u = u;
    t.counts = counts_for_level(m, u);
    const ArrivalCounts& c = t.counts;
    const double lam = m.lambda;
    const double b1 = m.service.mean();

    if (u == 2) {
        t.q_u = c.D[0];
        const double reach_emb = c.eta_tail[1];          // E[eta; at least one arrival]
        const double reach_cont = c.D[1] / lam;          // E[first-arrival instant; >= 1 arrival]
        const double ret = c.eta[0];                     // E[eta; no arrivals]
        t.reach_embedded = {reach_emb};
        t.reach_continuous = {reach_cont};
        t.return_means = {ret};
        t.mhat1_plus_embedded = 1.0 / lam + reach_emb / t.q_u;
        t.mhat1_plus_continuous = 1.0 / lam + reach_cont / t.q_u;
        t.m1_minus = 1.0 / lam + ret / (1.0 - t.q_u);
    } else {
        const std::size_t n = static_cast<std::size_t>(u - 2);
        DenseSystem sys = system_matrix(c, u);

        std::vector<double> rhs(n);
        for (int k = 1; k <= static_cast<int>(n); ++k) rhs[k - 1] = c.D[u - k - 1];
        t.q_ku = solve_with_rhs(sys, rhs);
        t.q_u = t.q_ku[0];

        auto q_at = [&](int j) { return j == 0 ? 0.0 : t.q_ku[j - 1]; };

        // embedded clock: a hit during the current service costs the full service
        std::vector<double> rhs_emb(n), rhs_cont(n), rhs_ret(n);
        for (int i = 1; i <= static_cast<int>(n); ++i) {
            double se = c.eta_tail[u - i];
            double sc = (u - i) * c.D[u - i] / lam;  // mean first-hit instant within the service
            double sr = 0.0;
            for (int k = 0; k <= u - i - 1; ++k) {
                int j = i + k - 1;
                se += c.eta[k] * q_at(j);
                sc += c.eta[k] * q_at(j);
                sr += c.eta[k] * (j == 0 ? 1.0 : 1.0 - q_at(j));
            }
            rhs_emb[i - 1] = se;
            rhs_cont[i - 1] = sc;
            rhs_ret[i - 1] = sr;
        }
        t.reach_embedded = solve_with_rhs(sys, rhs_emb);
        t.reach_continuous = solve_with_rhs(sys, rhs_cont);
        t.return_means = solve_with_rhs(sys, rhs_ret);

        t.mhat1_plus_embedded = 1.0 / lam + t.reach_embedded[0] / t.q_u;
        t.mhat1_plus_continuous = 1.0 / lam + t.reach_continuous[0] / t.q_u;
        t.m1_minus = 1.0 / lam + t.return_means[0] / (1.0 - t.q_u);
    }

    t.clock_gap = t.mhat1_plus_embedded - t.mhat1_plus_continuous;
    t.clock_gap_cap = m.service.moment(2) / (2.0 * b1) + b1;
    return t;
}

std::pair<double, double> cycle_moments(const Model& m) {
    const double b2 = m.service.moment(2);
    const double om = 1.0 - m.rho;
    const double m1 = 1.0 / (om * m.lambda);
    const double m2 = 2.0 / (m.lambda * m.lambda * om) + b2 / (om * om * om);
    return {m1, m2};
}

namespace {

// Bracketed Newton/bisection hybrid for an increasing-through-zero function.
double find_root(const std::function<double(double)>& f,
                 const std::function<double(double)>& fprime, double lo,
                 double hi, double ftol) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fx = f(x);
        if (std::fabs(fx) <= ftol && it > 0) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        double step = fx / fprime(x);
        double xn = x - step;
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) < 1e-16 * (1.0 + std::fabs(x)) && std::fabs(fx) <= ftol)
            return xn;
        x = xn;
    }
    if (std::fabs(f(x)) <= ftol) return x;
    throw NoRootError("root search did not converge");
}

// Bracket a sign change of f on (0, s_max): f < 0 just right of 0,
// f(hi) > 0 by the divergence condition on the transform.
std::pair<double, double> bracket_root(const std::function<double(double)>& f,
                                       double s_max) {
    double hi = 0.0;
    bool found = false;
    if (std::isfinite(s_max)) {
        for (int j = 1; j <= 60 && !found; ++j) {
            double s = s_max * (1.0 - std::pow(0.5, j));
            double v = f(s);
            if (v > 0.0) {
                hi = s;
                found = true;
            }
        }
    } else {
        hi = 1.0;
        for (int j = 0; j < 80 && !found; ++j) {
            if (f(hi) > 0.0)
                found = true;
            else
                hi *= 2.0;
        }
    }
    if (!found)
        throw NoRootError("transform never crosses the target line below s0");
    double lo = 0.5 * hi;
    while (f(lo) > 0.0) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-300)
            throw NoRootError("no sign change found while bracketing root");
    }
    return {lo, hi};
}

}

std::pair<double, double> cramer_root(const Model& m) {
    const ServiceDistribution& g = m.service;
    const double lam = m.lambda;
    auto f = [&](double s) { return g.mgf(s) - 1.0 - s / lam; };
    auto fp = [&](double s) { return g.mgf_prime(s) - 1.0 / lam; };
    auto [lo, hi] = bracket_root(f, g.s0());
    double beta = find_root(f, fp, lo, hi, 1e-12);
    return {beta, std::log1p(beta / lam)};
}

std::pair<double, double> busy_decay(const Model& m) {
    const ServiceDistribution& g = m.service;
    const double lam = m.lambda;
    auto f = [&](double s) { return g.mgf_prime(s) - 1.0 / lam; };
    // second derivative of the mgf: E X^2 e^{sX}; a small forward difference
    // of mgf_prime is accurate enough to steer the safeguarded Newton.
    auto fp = [&](double s) {
        double h = 1e-7 * (1.0 + std::fabs(s));
        return (g.mgf_prime(s + h) - g.mgf_prime(s)) / h;
    };
    auto [lo, hi] = bracket_root(f, g.s0());
    double v = find_root(f, fp, lo, hi, 1e-12);
    double alpha = lam + v - lam * g.mgf(v);
    return {v, alpha};
}

LightTailParams light_tail_params(const Model& m) {
    LightTailParams lt;
    auto [beta, gamma] = cramer_root(m);
    lt.beta = beta;
    lt.gamma_rate = gamma;
    auto [v, alpha] = busy_decay(m);
    lt.v_lambda = v;
    lt.alpha = alpha;
    return lt;
}

ReachUpperBound mhat_light_tail_bound(const Model& m, int u, double q_u,
                                      const LightTailParams& lt) {
    if (u < 1) throw DomainError("mhat_light_tail_bound: u must be >= 1");
    if (!(q_u > 0.0)) throw DomainError("mhat_light_tail_bound: q(u) must be > 0");
    ReachUpperBound b;
    const double e = 2.71828182845904523536;
    b.via_q = 1.0 / m.lambda + u / (lt.alpha * e * std::pow(q_u, 1.0 / u));
    b.via_gamma = 1.0 / m.lambda + u * std::exp(lt.gamma_rate - 1.0) / lt.alpha;
    return b;
}

MG1Report bound_report(const Model& m, int u, double x, regen::MomentSource mode,
                       double m3, regen::MomentSource m3_source,
                       const McSplitEstimates* mc, bool light_tail_substitute,
                       double gamma) {
    MG1Report rep;
    rep.u = u;
    rep.x = x;
    rep.mode = mode;
    rep.m3 = m3;
    rep.m3_source = m3_source;
    auto [m1, m2] = cycle_moments(m);
    rep.m1 = m1;
    rep.m2 = m2;
    regen::CycleMoments moments(m1, m2, m3, gamma);

    double lower_ratio_num = 0.0;  // mhat1+ used on the lower side
    double upper_ratio_num = 0.0;  // mhat1+ used on the upper side
    double m1m_lower_side = 0.0, m1m_upper_side = 0.0, m2m = 0.0;

    switch (mode) {
        case regen::MomentSource::exact: {
            TabooSolution t = analyze(m, u);
            rep.q = t.q_u;
            rep.mhat1_plus_embedded = t.mhat1_plus_embedded;
            rep.mhat1_plus_continuous = t.mhat1_plus_continuous;
            rep.clock_gap = t.clock_gap;
            rep.clock_gap_cap = t.clock_gap_cap;
            rep.m1_minus = t.m1_minus;
            m2m = m2 / (1.0 - rep.q);  // envelope bracket, valid on both sides
            rep.m2_minus = m2m;
            lower_ratio_num = upper_ratio_num = t.mhat1_plus_continuous;
            m1m_lower_side = m1m_upper_side = t.m1_minus;
            break;
        }
        case regen::MomentSource::envelope: {
            rep.q = solve_exceedance(m, u);
            if (!(rep.q < 0.5))
                throw DomainError("mg1 bound_report: q(u) >= 1/2, bounds not applicable");
            auto env = regen::split_moment_envelopes(moments, rep.q);
            m2m = env.m2_minus_hi;
            rep.m2_minus = m2m;
            rep.m1_minus = env.m1_minus_lo;
            rep.mhat1_plus_continuous = env.m1_plus_hi;
            lower_ratio_num = 1.0 / m.lambda;  // idle part of the cycle bounds it below
            upper_ratio_num = env.m1_plus_hi;
            m1m_lower_side = env.m1_minus_hi;
            m1m_upper_side = env.m1_minus_lo;
            break;
        }
        case regen::MomentSource::monte_carlo: {
            if (mc == nullptr)
                throw DomainError("mg1 bound_report: monte-carlo mode needs estimates");
            rep.q = mc->q;
            rep.m1_minus = mc->m1_minus;
            rep.m2_minus = m2m = mc->m2_minus;
            rep.mhat1_plus_continuous = mc->m1_plus_hat;
            lower_ratio_num = upper_ratio_num = mc->m1_plus_hat;
            m1m_lower_side = m1m_upper_side = mc->m1_minus;
            break;
        }
    }
    if (!(rep.q < 0.5))
        throw DomainError("mg1 bound_report: q(u) >= 1/2, bounds not applicable");
    rep.q_star = geomsum::q_star(rep.q);
    rep.ratio = upper_ratio_num / m1m_upper_side;

    if (light_tail_substitute) {
        rep.light_tail = light_tail_params(m);
        auto bnd = mhat_light_tail_bound(m, u, rep.q, rep.light_tail);
        upper_ratio_num = bnd.via_gamma;
        rep.light_tail_substitute = true;
    }

    regen::SplitCycleStats lo_split{rep.q, m1m_lower_side, m2m, lower_ratio_num, mode};
    regen::SplitCycleStats hi_split{rep.q, m1m_upper_side, m2m, upper_ratio_num, mode};
    regen::BoundReport lo_rep = regen::error_bounds(x, lo_split, moments);
    regen::BoundReport hi_rep = regen::error_bounds(x, hi_split, moments);
    rep.finite_q = lo_rep;
    rep.finite_q.upper = hi_rep.upper;
    rep.finite_q.informative = rep.finite_q.lower > -1.0 && rep.finite_q.upper < 1.0;
    rep.finite_q.inverted = rep.finite_q.lower > rep.finite_q.upper;

    rep.asym = regen::asymptotic_error_bounds(x, rep.q, m1, m2,
                                              lower_ratio_num / m1m_lower_side);
    regen::BoundReport asym_hi = regen::asymptotic_error_bounds(
        x, rep.q, m1, m2, upper_ratio_num / m1m_upper_side);
    rep.asym.upper = asym_hi.upper;
    rep.asym.informative = rep.asym.lower > -1.0 && rep.asym.upper < 1.0;
    rep.asym.inverted = rep.asym.lower > rep.asym.upper;
    if (light_tail_substitute) rep.asym.asymptotic = true;

    rep.pessimistic_tail =
        regen::pessimistic_tail_lower(x, rep.q, m1, m2, lower_ratio_num / m1m_lower_side);
    return rep;
}

}
