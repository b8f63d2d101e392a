#include "qbound/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qbound/detail/chunks.hpp"
#include "qbound/errors.hpp"
#include "qbound/geomsum.hpp"
#include "qbound/mathutil.hpp"

namespace qbound::sim {

int resolve_threads(const SimOptions& opt) {
    return detail::resolve_threads(opt.threads);
}

namespace {

template <class Acc, class Work>
std::vector<Acc> run_chunks(std::size_t n, RngStream base, const SimOptions& opt,
                            Work work) {
    return detail::run_chunks<Acc>(n, base, opt.threads, work);
}

struct RawCycle {
    double idle = 0.0;
    double busy = 0.0;
    int max_level = 1;
    bool hit = false;
    double t_cont = 0.0;  // from first arrival
    double t_emb = 0.0;
};

// One cycle of the M/G/1 queue.  Arrivals within each service are generated
// sequentially; the level-u check runs at every arrival (continuous clock)
// and the embedded clock closes at the end of the service being run when the
// hit happened.
RawCycle run_cycle(const mg1::Model& m, int u, RngStream& rng,
                   std::size_t event_cap) {
    RawCycle c;
    c.idle = rng.exponential(m.lambda);
    int level = 1;
    bool emb_pending = false;
    if (u <= 1) {
        c.hit = true;
        c.t_cont = 0.0;
        emb_pending = true;
    }
    std::size_t events = 0;
    while (level > 0) {
        const double eta = m.service.sample(rng);
        double t = rng.exponential(m.lambda);
        while (t < eta) {
            ++level;
            if (level > c.max_level) c.max_level = level;
            if (!c.hit && level >= u) {
                c.hit = true;
                c.t_cont = c.busy + t;
                emb_pending = true;
            }
            t += rng.exponential(m.lambda);
            if (++events > event_cap)
                throw ResourceError("simulate_cycles: busy period exceeded event cap");
        }
        c.busy += eta;
        if (emb_pending) {
            c.t_emb = c.busy;
            emb_pending = false;
        }
        --level;
        if (++events > event_cap)
            throw ResourceError("simulate_cycles: busy period exceeded event cap");
    }
    return c;
}

struct CycleAcc {
    std::size_t n = 0, hits = 0;
    long double t1 = 0, t2 = 0, t3 = 0, t4 = 0, t6 = 0;
    long double lo1 = 0, lo2 = 0, lo4 = 0;          // non-hit cycle lengths
    long double hc1 = 0, hc2 = 0;                   // idle + continuous clock
    long double he1 = 0, he2 = 0;                   // idle + embedded clock
    long double hl1 = 0, hl2 = 0;                   // full lengths of hit cycles

    void add(const RawCycle& c) {
        const long double len = c.idle + c.busy;
        const long double l2 = len * len;
        ++n;
        t1 += len;
        t2 += l2;
        t3 += l2 * len;
        t4 += l2 * l2;
        t6 += l2 * l2 * l2;
        if (c.hit) {
            ++hits;
            const long double tc = c.idle + c.t_cont;
            const long double te = c.idle + c.t_emb;
            hc1 += tc;
            hc2 += tc * tc;
            he1 += te;
            he2 += te * te;
            hl1 += len;
            hl2 += l2;
        } else {
            lo1 += len;
            lo2 += l2;
            lo4 += l2 * l2;
        }
    }

    void merge(const CycleAcc& o) {
        n += o.n; hits += o.hits;
        t1 += o.t1; t2 += o.t2; t3 += o.t3; t4 += o.t4; t6 += o.t6;
        lo1 += o.lo1; lo2 += o.lo2; lo4 += o.lo4;
        hc1 += o.hc1; hc2 += o.hc2; he1 += o.he1; he2 += o.he2;
        hl1 += o.hl1; hl2 += o.hl2;
    }
};

SimEstimate moment_estimate(long double sum, long double sumsq, std::size_t n) {
    SimEstimate e;
    e.n = n;
    if (n == 0) return e;
    e.value = static_cast<double>(sum / n);
    if (n >= 2) {
        long double var = (sumsq - sum * sum / static_cast<long double>(n)) / (n - 1);
        e.se = std::sqrt(std::max<long double>(var, 0.0L) / n);
    }
    return e;
}

}

CycleStats simulate_cycles(const mg1::Model& model, int u, std::size_t n,
                           RngStream base, const SimOptions& opt,
                           const CycleSink& sink) {
    if (n < 1) throw DomainError("simulate_cycles: n must be >= 1");

    CycleAcc total;
    if (sink) {
        // streaming records keeps execution single-threaded and in order
        RngStream rng(base.seed(), base.stream());
        for (std::size_t i = 0; i < n; ++i) {
            RawCycle c = run_cycle(model, u, rng, opt.event_cap);
            total.add(c);
            CycleRecord rec{c.idle + c.busy, c.idle,    c.max_level,
                            c.hit,           c.t_cont,  c.t_emb};
            sink(rec);
        }
    } else {
        auto accs = run_chunks<CycleAcc>(
            n, base, opt, [&](CycleAcc& acc, RngStream& rng, std::size_t count) {
                for (std::size_t i = 0; i < count; ++i)
                    acc.add(run_cycle(model, u, rng, opt.event_cap));
            });
        for (const auto& a : accs) total.merge(a);
    }

    CycleStats s;
    s.n = total.n;
    s.hits = total.hits;
    const double qh = static_cast<double>(total.hits) / total.n;
    s.q_hat = {qh, std::sqrt(qh * (1.0 - qh) / total.n), total.n};
    s.m1 = moment_estimate(total.t1, total.t2, total.n);
    s.m2 = moment_estimate(total.t2, total.t4, total.n);
    s.m3 = moment_estimate(total.t3, total.t6, total.n);
    s.m1_minus = moment_estimate(total.lo1, total.lo2, total.n - total.hits);
    s.m2_minus = moment_estimate(total.lo2, total.lo4, total.n - total.hits);
    s.m1_plus_cont = moment_estimate(total.hc1, total.hc2, total.hits);
    s.m1_plus_emb = moment_estimate(total.he1, total.he2, total.hits);
    s.m1_plus_full = moment_estimate(total.hl1, total.hl2, total.hits);
    return s;
}

namespace {

struct HitAcc {
    std::vector<std::size_t> counts;
    long double sum_t = 0;
    std::size_t n = 0;
};

}

HittingCdf hitting_cdf(const mg1::Model& model, int u, std::size_t n,
                       std::span<const double> xs, double m1_minus, double q,
                       RngStream base, const SimOptions& opt, Engine engine) {
    const double qs = geomsum::q_star(q);
    std::vector<double> ts;
    for (double x : xs) ts.push_back(x * m1_minus / qs);
    HittingCdf out = hitting_cdf_at_times(model, u, n, ts, base, opt, engine);
    out.x.assign(xs.begin(), xs.end());
    for (std::size_t j = 0; j < out.x.size(); ++j)
        out.delta[j] = 1.0 - std::exp(-out.x[j]) - out.cdf[j];
    return out;
}

HittingCdf hitting_cdf_at_times(const mg1::Model& model, int u, std::size_t n,
                                std::span<const double> t_points, RngStream base,
                                const SimOptions& opt, Engine engine) {
    if (n < 1) throw DomainError("hitting_cdf: n must be >= 1");

    HittingCdf out;
    out.n = n;
    out.x.assign(t_points.begin(), t_points.end());
    out.t.assign(t_points.begin(), t_points.end());

    const std::vector<double>& tpts = out.t;
    const std::size_t npts = tpts.size();

    auto record = [&](HitAcc& acc, double T) {
        for (std::size_t j = 0; j < npts; ++j)
            if (T <= tpts[j]) ++acc.counts[j];
        acc.sum_t += T;
        ++acc.n;
    };

    std::vector<HitAcc> accs;
    if (engine == Engine::mm1_walk) {
        if (model.service.kind() != DistKind::Exponential)
            throw DomainError("hitting_cdf: walk engine requires exponential service");
        const double lam = model.lambda;
        const double mu = model.service.rate();
        const double p = lam / (lam + mu);
        accs = run_chunks<HitAcc>(
            n, base, opt, [&](HitAcc& acc, RngStream& rng, std::size_t count) {
                acc.counts.assign(npts, 0);
                for (std::size_t i = 0; i < count; ++i) {
                    // jump chain only; holding times are exchanged for two
                    // gamma draws at the end (exact for exponential service)
                    std::uint64_t idles = 0, steps_total = 0;
                    bool hit = false;
                    while (!hit) {
                        ++idles;
                        if (u <= 1) { hit = true; break; }
                        int level = 1;
                        std::uint64_t steps = 0;
                        while (level > 0) {
                            ++steps;
                            if (rng.u01() < p) {
                                if (++level >= u) {
                                    hit = true;
                                    break;
                                }
                            } else {
                                --level;
                            }
                            if (steps > opt.event_cap)
                                throw ResourceError("hitting_cdf: busy period exceeded event cap");
                        }
                        steps_total += steps;
                    }
                    double T = rng.gamma(static_cast<double>(idles)) / lam;
                    if (steps_total > 0)
                        T += rng.gamma(static_cast<double>(steps_total)) / (lam + mu);
                    record(acc, T);
                }
            });
    } else {
        accs = run_chunks<HitAcc>(
            n, base, opt, [&](HitAcc& acc, RngStream& rng, std::size_t count) {
                acc.counts.assign(npts, 0);
                for (std::size_t i = 0; i < count; ++i) {
                    double elapsed = 0.0;
                    for (;;) {
                        const double idle = rng.exponential(model.lambda);
                        if (u <= 1) {
                            record(acc, elapsed + idle);
                            break;
                        }
                        int level = 1;
                        double busy = 0.0;
                        bool hit = false;
                        double t_hit = 0.0;
                        std::size_t events = 0;
                        while (level > 0 && !hit) {
                            const double eta = model.service.sample(rng);
                            double t = rng.exponential(model.lambda);
                            while (t < eta) {
                                if (++level >= u) {
                                    hit = true;
                                    t_hit = busy + t;
                                    break;
                                }
                                t += rng.exponential(model.lambda);
                                if (++events > opt.event_cap)
                                    throw ResourceError(
                                        "hitting_cdf: busy period exceeded event cap");
                            }
                            busy += eta;
                            --level;
                            if (++events > opt.event_cap)
                                throw ResourceError(
                                    "hitting_cdf: busy period exceeded event cap");
                        }
                        if (hit) {
                            record(acc, elapsed + idle + t_hit);
                            break;
                        }
                        elapsed += idle + busy;
                    }
                }
            });
    }

    std::vector<std::size_t> counts(npts, 0);
    long double sum_t = 0;
    for (const auto& a : accs) {
        for (std::size_t j = 0; j < npts; ++j) counts[j] += a.counts[j];
        sum_t += a.sum_t;
    }
    for (std::size_t j = 0; j < npts; ++j) {
        double g = static_cast<double>(counts[j]) / n;
        out.cdf.push_back(g);
        out.se.push_back(std::sqrt(g * (1.0 - g) / n));
        out.delta.push_back(1.0 - std::exp(-out.x[j]) - g);
    }
    out.mean_passage = static_cast<double>(sum_t / n);
    return out;
}

namespace {

struct RenewalAcc {
    std::vector<long double> sum, sumsq;
    std::size_t n = 0;
};

}

RenewalEstimate empirical_renewal(const ServiceDistribution& summand,
                                  const ServiceDistribution* delay,
                                  std::span<const double> t_grid, std::size_t n,
                                  RngStream base, const SimOptions& opt) {
    if (n < 1) throw DomainError("empirical_renewal: n must be >= 1");
    std::vector<double> grid(t_grid.begin(), t_grid.end());
    std::sort(grid.begin(), grid.end());
    const std::size_t G = grid.size();

    auto accs = run_chunks<RenewalAcc>(
        n, base, opt, [&](RenewalAcc& acc, RngStream& rng, std::size_t count) {
            acc.sum.assign(G, 0.0L);
            acc.sumsq.assign(G, 0.0L);
            acc.n = count;
            for (std::size_t i = 0; i < count; ++i) {
                double s = 0.0;
                std::size_t k = 0, gi = 0;
                while (gi < G) {
                    s += (k == 0 && delay) ? delay->sample(rng) : summand.sample(rng);
                    while (gi < G && s > grid[gi]) {
                        acc.sum[gi] += static_cast<long double>(k);
                        acc.sumsq[gi] += static_cast<long double>(k) * k;
                        ++gi;
                    }
                    ++k;
                }
            }
        });

    RenewalEstimate out;
    out.n = n;
    out.t = grid;
    for (std::size_t j = 0; j < G; ++j) {
        long double sum = 0, sumsq = 0;
        for (const auto& a : accs) {
            sum += a.sum[j];
            sumsq += a.sumsq[j];
        }
        double mean = static_cast<double>(sum / n);
        long double var = (sumsq - sum * sum / static_cast<long double>(n)) /
                          (static_cast<long double>(n) - 1);
        out.h.push_back(mean);
        out.se.push_back(std::sqrt(std::max<long double>(var, 0.0L) / n));
    }
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::uninformative: return "uninformative";
    }
    return "?";
}

Verdict verify_report(std::span<const regen::BoundReport> reports,
                      const HittingCdf& empirical, double n_sigma) {
    if (reports.size() != empirical.x.size())
        throw DomainError("verify_report: grids do not match");
    bool any_uninformative = false;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (std::fabs(reports[i].x - empirical.x[i]) > 1e-12)
            throw DomainError("verify_report: grids do not match");
        if (!reports[i].informative) {
            any_uninformative = true;
            continue;
        }
        const double band = n_sigma * empirical.se[i];
        const double d = empirical.delta[i];
        if (d < reports[i].lower - band || d > reports[i].upper + band)
            return Verdict::fail;
    }
    return any_uninformative ? Verdict::uninformative : Verdict::pass;
}

TailSlope busy_period_tail_slope(const mg1::Model& model, std::size_t n,
                                 RngStream base, const SimOptions& opt) {
    struct Acc {
        std::vector<double> lengths;
    };
    auto accs = run_chunks<Acc>(
        n, base, opt, [&](Acc& acc, RngStream& rng, std::size_t count) {
            acc.lengths.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                RawCycle c = run_cycle(model, 1 << 30, rng, opt.event_cap);
                acc.lengths.push_back(c.busy);
            }
        });
    std::vector<double> lengths;
    lengths.reserve(n);
    for (auto& a : accs)
        lengths.insert(lengths.end(), a.lengths.begin(), a.lengths.end());
    std::sort(lengths.begin(), lengths.end());

    // survival between the 1e-3 and 3e-6 quantiles of the tail, corrected by
    // the known t^{3/2} prefactor; slope of the corrected log-survival -> -alpha
    // (shallower windows carry a visible 1/t curvature bias)
    TailSlope out;
    std::vector<double> ts, ys;
    for (double frac = 1e-3; frac >= 3e-6 * 1.0000001; frac /= std::pow(10.0, 0.125)) {
        std::size_t k = static_cast<std::size_t>(frac * n);
        if (k < 30) break;
        double t = lengths[n - k];
        double surv = static_cast<double>(k) / n;
        ts.push_back(t);
        ys.push_back(std::log(surv * std::pow(t, 1.5)));
    }
    if (ts.size() < 3) throw DomainError("busy_period_tail_slope: too few tail points");
    out.slope = ls_slope(ts.data(), ys.data(), ts.size());
    out.points = ts.size();
    return out;
}

}
