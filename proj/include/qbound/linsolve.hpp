#ifndef QBOUND_LINSOLVE_HPP
#define QBOUND_LINSOLVE_HPP

#include <cstddef>
#include <vector>

namespace qbound {

// Small dense square system A x = b, row-major storage.
struct DenseSystem {
    std::size_t n = 0;
    std::vector<double> a;  // n*n
    std::vector<double> b;  // n
};

struct LinearSolution {
    std::vector<double> x;
    double residual_inf = 0.0;  // ||Ax - b||_inf after any refinement
    int refinement_steps = 0;
};

// Gaussian elimination with partial pivoting; one step of iterative
// refinement when the residual exceeds 1e-9 * (1 + ||b||_inf).
// Throws SingularError (with the failing pivot index) when a pivot
// falls to 1e-13 or below.
LinearSolution solve(const DenseSystem& system);

}

#endif
