#pragma once

#include "hinfland/matrix_util.hpp"

#include <optional>

namespace hinfland {

// Feasibility problem: find x such that the two affinely parameterized
// symmetric matrices
//   S_lo(x) = smat(lo0 + l_lo x)   and   S_hi(x) = smat(hi0 + l_hi x)
// satisfy lambda_min(S_lo) >= floor_min and lambda_max(S_hi) <= cap_max.
// Acceptance is checked against the (slightly relaxed) accept_* thresholds.
struct AffineConePair {
    Matrix l_lo;
    Vector lo0;
    int n_lo = 0;
    Matrix l_hi;
    Vector hi0;
    int n_hi = 0;
    double floor_min = 0.0;
    double cap_max = 0.0;
    double accept_floor = 0.0; // accept when lambda_min(S_lo) >= accept_floor
    double accept_cap = 0.0;   // accept when lambda_max(S_hi) <= accept_cap
};

struct AffineConeOutcome {
    std::optional<Vector> x;  // accepted parameter vector
    double residual = 0.0;    // final cone violation of the affine shadow
    bool budget_exhausted = false; // ran out of iterations while still progressing
};

// Douglas-Rachford iteration between the affine graph and the cone product,
// aiming at an adaptively shrinking interior shift of the cones so that the
// tangential approach of plain alternating projections is avoided. Stalls at
// the smallest shift are reported as (conservative) infeasibility.
AffineConeOutcome solve_affine_cone_pair(const AffineConePair& problem, const Vector& x0, int max_iter);

} // namespace hinfland
