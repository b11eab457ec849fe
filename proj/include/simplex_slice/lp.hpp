#pragma once

#include "simplex_slice/geometry.hpp"

namespace sslice {

struct LpSolution {
    Vector x;
    double objective = 0.0;
};

/// maximize c.x subject to A x <= b with every x_j free. Dense two-phase
/// simplex with Bland's rule; meant for the few-hundred-variable programs of
/// the inscribed-ball problems. Throws Infeasible when the program has no
/// feasible point or is unbounded.
LpSolution maximize_lp(const Vector& c, const Matrix& A, const Vector& b);

}  // namespace sslice
