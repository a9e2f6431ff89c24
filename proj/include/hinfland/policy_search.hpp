#pragma once

#include "hinfland/hinf_norm.hpp"
#include "hinfland/state_space.hpp"

#include <cstdint>
#include <vector>

namespace hinfland {

struct SearchParams {
    int n_samples = 0;                 // 0 selects 2*dim(K)+1
    std::vector<double> radius_ladder{1e-2, 1e-3, 1e-4}; // scaled by (1 + ||K||)
    double armijo_c = 1e-4;            // sufficient-decrease constant
    double tol_stat = 1e-5;            // stationarity target at the final radius
    double norm_rel_tol = 1e-8;        // tolerance for the norm evaluations
    int max_backtracks = 40;
    int workers = 1;                   // gradient evaluations per iteration
};

struct SearchIterate {
    Controller k;
    double j = 0.0;
    double measure = 0.0; // min-norm hull element at the active radius
    double step = 0.0;    // accepted step length (0 on radius shrinks)
};

enum class SearchStatus { Converged, Stalled, BudgetExhausted };

struct SearchTrace {
    std::vector<SearchIterate> iterates;
    SearchStatus status = SearchStatus::BudgetExhausted;
    std::uint64_t seed = 0;
};

// Gradient-sampling estimate of dist(0, dJ(k)): the norm of the minimum-norm
// element of the convex hull of gradients sampled uniformly in the radius
// ball, nonsmooth hits resampled. Throws when the sampled ball leaves the
// stabilizing set.
double stationarity_measure(const Plant& plant, const Controller& k, double radius, int n_samples,
                            std::uint64_t seed, double norm_rel_tol = 1e-8);

// Gradient-sampling descent with Armijo backtracking and a stability barrier;
// the radius ladder shrinks once the sampled hull flattens at each level.
SearchTrace search(const Plant& plant, const Controller& k0, int budget, std::uint64_t seed,
                   const SearchParams& params = {});

// Rejection-samples controller entries uniformly in [box_lo, box_hi]
// (entrywise) until the closed loop is stable. Deterministic per seed.
Controller random_stabilizing(const Plant& plant, std::uint64_t seed, const Matrix& box_lo,
                              const Matrix& box_hi, int max_attempts = 10000);

} // namespace hinfland
