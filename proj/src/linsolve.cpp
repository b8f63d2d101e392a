#include "qbound/linsolve.hpp"

#include <cmath>
#include <cstring>

#include "qbound/errors.hpp"

namespace qbound {

namespace {

constexpr double kPivotFloor = 1e-13;

// LU with partial pivoting, in place; perm holds row order.
void factor(std::vector<double>& lu, std::vector<std::size_t>& perm, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(lu[perm[k] * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::fabs(lu[perm[i] * n + k]);
            if (v > best) { best = v; piv = i; }
        }
        if (!(best > kPivotFloor))
            throw SingularError("linsolve: pivot below threshold at column " +
                                    std::to_string(k),
                                static_cast<int>(k));
        std::swap(perm[k], perm[piv]);
        const std::size_t rk = perm[k] * n;
        const double pivot = lu[rk + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const std::size_t ri = perm[i] * n;
            double m = lu[ri + k] / pivot;
            lu[ri + k] = m;
            if (m != 0.0)
                for (std::size_t j = k + 1; j < n; ++j) lu[ri + j] -= m * lu[rk + j];
        }
    }
}

void back_substitute(const std::vector<double>& lu, const std::vector<std::size_t>& perm,
                     std::size_t n, const std::vector<double>& rhs, std::vector<double>& x) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[perm[i]];
        const std::size_t ri = perm[i] * n;
        for (std::size_t j = 0; j < i; ++j) s -= lu[ri + j] * y[j];
        y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        const std::size_t ri = perm[ii] * n;
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu[ri + j] * x[j];
        x[ii] = s / lu[ri + ii];
    }
}

double residual_inf(const DenseSystem& sys, const std::vector<double>& x,
                    std::vector<double>& r) {
    double worst = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) {
        double s = sys.b[i];
        const double* row = sys.a.data() + i * sys.n;
        for (std::size_t j = 0; j < sys.n; ++j) s -= row[j] * x[j];
        r[i] = s;
        worst = std::max(worst, std::fabs(s));
    }
    return worst;
}

}

LinearSolution solve(const DenseSystem& sys) {
    const std::size_t n = sys.n;
    if (n == 0 || sys.a.size() != n * n || sys.b.size() != n)
        throw DomainError("linsolve: inconsistent system dimensions");

    std::vector<double> lu = sys.a;
    std::vector<std::size_t> perm(n);
    factor(lu, perm, n);

    LinearSolution sol;
    sol.x.assign(n, 0.0);
    back_substitute(lu, perm, n, sys.b, sol.x);

    double bnorm = 0.0;
    for (double v : sys.b) bnorm = std::max(bnorm, std::fabs(v));
    const double tol = 1e-9 * (1.0 + bnorm);

    std::vector<double> r(n), dx(n);
    sol.residual_inf = residual_inf(sys, sol.x, r);
    if (sol.residual_inf > tol) {
        back_substitute(lu, perm, n, r, dx);
        for (std::size_t i = 0; i < n; ++i) sol.x[i] += dx[i];
        sol.refinement_steps = 1;
        sol.residual_inf = residual_inf(sys, sol.x, r);
        if (sol.residual_inf > tol)
            throw SingularError("linsolve: residual above tolerance after refinement", -1);
    }
    return sol;
}

}
