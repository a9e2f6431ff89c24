#pragma once

#include "hinfland/state_space.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace hinfland {

// Sentinel frequency for a supremum approached as omega -> infinity (norm
// attained by the feedthrough term).
inline constexpr double kOmegaInfinity = std::numeric_limits<double>::infinity();

struct NormResult {
    double gamma = 0.0;                // H-infinity norm estimate
    std::vector<double> peak_omegas;   // frequencies attaining the supremum (sorted, deduplicated)
    double rel_tol = 0.0;              // achieved relative tolerance
    double gamma_lo = 0.0;             // final bisection bracket
    double gamma_hi = 0.0;
};

struct LevelTest {
    bool norm_ge_gamma = false;
    std::vector<double> crossing_omegas; // nonnegative, sorted
};

// gamma-level Hamiltonian of the closed loop; defined for gamma > sigma_max(D).
Matrix bounded_real_hamiltonian(const ClosedLoop& cl, double gamma);

// Spectral test: the norm is >= gamma iff the Hamiltonian has an eigenvalue
// within axis_tol*(1+|lambda|) of the imaginary axis. gamma <= sigma_max(D)
// reports "above level" without crossings.
LevelTest hamiltonian_level_test(const ClosedLoop& cl, double gamma, double axis_tol = 1e-7);

// Hamiltonian bisection with midpoint-frequency refinement between the
// imaginary-axis crossings of each failed level test.
NormResult hinf_norm(const ClosedLoop& cl, double rel_tol = 1e-9);

// Brute-force lower bound: max of sigma_max over a log-spaced grid
// [1e-4*rho, 1e4*rho] plus omega = 0, followed by golden-section refinement
// around the grid argmax. Test oracle; independent of the Hamiltonian path.
double hinf_norm_grid_oracle(const ClosedLoop& cl, int n_points);

struct GradientResult {
    std::optional<Matrix> gradient; // controller-shaped, when J is smooth here
    enum class Nonsmooth { None, MultiplePeaks, RepeatedSigma } reason = Nonsmooth::None;
    bool smooth() const { return gradient.has_value(); }
};

inline constexpr double kSigmaGapTol = 1e-6;

// Gradient of J at k when the norm result shows a single peak frequency with a
// simple top singular value; the nonsmooth marker otherwise.
GradientResult hinf_gradient(const Plant& plant, const Controller& k, const NormResult& norm);

struct DirectionalDerivative {
    double estimate = 0.0;          // Richardson-extrapolated one-sided derivative
    std::vector<double> quotients;  // raw difference quotients per step
};

// One-sided difference quotients of J along V over a decreasing step ladder.
// Every probed controller must remain stabilizing.
DirectionalDerivative directional_derivative_fd(const Plant& plant, const Controller& k, const Matrix& v,
                                                const std::vector<double>& steps,
                                                double rel_tol = 1e-10);

} // namespace hinfland
