#ifndef QBOUND_MATHUTIL_HPP
#define QBOUND_MATHUTIL_HPP

#include <cmath>
#include <cstddef>
#include <functional>

#include "qbound/errors.hpp"

namespace qbound {

// P(Erlang(shape, rate) < x), integer shape.
inline double erlang_cdf(int shape, double rate, double x) {
    if (x <= 0.0) return 0.0;
    double z = rate * x;
    if (z > 700.0) return 1.0;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < shape; ++j) {
        term *= z / j;
        sum += term;
    }
    double v = 1.0 - std::exp(-z) * sum;
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// P(Poisson(mean) <= k).
inline double poisson_cdf(int k, double mean) {
    if (k < 0) return 0.0;
    if (mean <= 0.0) return 1.0;
    if (mean > 700.0) {
        // log-space tail sum; only used by test oracles with moderate k
        double lp = -mean, sum = 0.0;
        for (int j = 0; j <= k; ++j) {
            sum += std::exp(lp);
            lp += std::log(mean) - std::log1p(j);
        }
        return sum > 1.0 ? 1.0 : sum;
    }
    double term = std::exp(-mean), sum = term;
    for (int j = 1; j <= k; ++j) {
        term *= mean / j;
        sum += term;
    }
    return sum > 1.0 ? 1.0 : sum;
}

// P(Poisson(mean) > k), accurate in relative terms deep into the right tail.
inline double poisson_survival(int k, double mean) {
    if (k < 0) return 1.0;
    if (mean <= 0.0) return 0.0;
    if (mean > k + 1.0) return 1.0 - poisson_cdf(k, mean);
    double term = std::exp((k + 1) * std::log(mean) - mean - std::lgamma(k + 2.0));
    double sum = 0.0;
    for (int j = k + 1; j < k + 1000000; ++j) {
        sum += term;
        term *= mean / (j + 1);
        if (term <= sum * 1e-18) break;
    }
    return sum;
}

// Adaptive Simpson quadrature on [a,b] to absolute tolerance tol.
namespace detail {
inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureError("adaptive quadrature: tolerance unreachable");
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 50) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = detail::simpson(a, fa, b, fb, fm);
    return detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Least-squares slope of y against x.
inline double ls_slope(const double* x, const double* y, std::size_t n) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double d = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / d;
}

}

#endif
