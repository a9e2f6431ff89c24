#pragma once

#include "hinfland/lift.hpp"

#include <optional>
#include <string>
#include <utility>

namespace hinfland {

struct FeasibilityResult {
    std::optional<LiftedTuple> tuple; // feasible point when found
    double residual = 0.0;            // final cone-distance when not
    bool undetermined = false;        // budget ran out without a verdict
    explicit operator bool() const { return tuple.has_value(); }
};

// Searches the convex lifted set at level gamma by alternating projections
// between its affine parameterization and the two eigenvalue cones, with
// [[X,I],[I,Y]] >= strict_floor * I enforced. An optional warm start speeds up
// gamma ladders; accept_tol overrides the scale-aware acceptance threshold on
// lambda_max of the LMI matrix (negative selects the default). "Undetermined"
// outcomes are failures the caller may treat as infeasible.
FeasibilityResult feasibility_F(const Plant& plant, double gamma, double strict_floor = 1e-8,
                                int max_iter = 50000, const LiftedTuple* warm_start = nullptr,
                                double accept_tol = -1.0);

struct SynthesisResult {
    double gamma_star = 0.0;   // certified upper bound on the optimal cost
    Controller k_star;         // recovered controller (Xi = I)
    Certificate cert;          // bounded-real certificate at gamma_star
    std::pair<double, double> bracket{0.0, 0.0}; // final (infeasible, feasible) levels
    double j_k_star = 0.0;     // independently computed norm of k_star
};

// Minimizes gamma over the convex lifted set by bisection on feasibility_F,
// then recovers the controller through the inverse lifting with Xi = I and
// cross-validates with the norm computation.
SynthesisResult min_gamma(const Plant& plant, double rel_tol = 1e-4, double strict_floor = 1e-8,
                          int max_iter = 50000);

} // namespace hinfland
