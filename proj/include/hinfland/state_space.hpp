#pragma once

#include "hinfland/matrix_util.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace hinfland {

// Continuous-time plant
//   x' = A x + B1 w + B2 u
//   z  = C1 x + D11 w + D12 u
//   y  = C2 x + D21 w
// All eight matrices are validated for mutual dimension consistency on
// construction.
struct Plant {
    Matrix A, B1, B2, C1, D11, D12, C2, D21;

    Plant(Matrix a, Matrix b1, Matrix b2, Matrix c1, Matrix d11, Matrix d12, Matrix c2, Matrix d21);

    int nx() const { return static_cast<int>(A.rows()); }
    int nw() const { return static_cast<int>(B1.cols()); }
    int nu() const { return static_cast<int>(B2.cols()); }
    int nz() const { return static_cast<int>(C1.rows()); }
    int ny() const { return static_cast<int>(C2.rows()); }

    // Diagnostic rank check of (A,B1), (A,B2) controllability and (C1,A),
    // (C2,A) observability at the given singular-value tolerance. Purely
    // informational; nothing downstream depends on it.
    bool check_minimality(double tol = 1e-9) const;
    std::optional<bool> minimality_checked; // set by callers that ran the check
};

// The plant used throughout the worked examples: scalar state, two-channel
// disturbance, z = [x; u], y = x + [0 1] w.
Plant example_plant();

// Full-order dynamic output-feedback controller, stored as the single block
// matrix [DK CK; BK AK] of shape (nu+nx) x (ny+nx).
struct Controller {
    Controller(Matrix block, int nu, int ny);
    static Controller from_parts(const Matrix& dk, const Matrix& ck, const Matrix& bk, const Matrix& ak);

    const Matrix& block() const { return block_; }
    int nu() const { return nu_; }
    int ny() const { return ny_; }
    int nx() const { return static_cast<int>(block_.rows()) - nu_; }

    Matrix DK() const { return block_.topLeftCorner(nu_, ny_); }
    Matrix CK() const { return block_.topRightCorner(nu_, nx()); }
    Matrix BK() const { return block_.bottomLeftCorner(nx(), ny_); }
    Matrix AK() const { return block_.bottomRightCorner(nx(), nx()); }

    // Same split sizes, different entries.
    Controller with_block(const Matrix& block) const { return Controller(block, nu_, ny_); }

private:
    Matrix block_;
    int nu_;
    int ny_;
};

struct ClosedLoop {
    Matrix A, B, C, D;
    int nx() const { return static_cast<int>(A.rows()); }
    int nw() const { return static_cast<int>(B.cols()); }
    int nz() const { return static_cast<int>(C.rows()); }
};

// Closed-loop realization of the transfer function from w to z.
ClosedLoop assemble_closed_loop(const Plant& plant, const Controller& k);

// Classification slack applied on top of the requested margin so that grid
// scans classify near-marginal spectra deterministically.
inline constexpr double kStabilitySlack = 1e-10;

// True iff the closed-loop spectral abscissa is < -margin - kStabilitySlack.
bool is_stabilizing(const Plant& plant, const Controller& k, double margin = 0.0);

// T_zw(j*omega) by solving (j*omega*I - A) X = B.
ComplexMatrix eval_transfer(const ClosedLoop& cl, double omega);

// Largest singular value of T_zw(j*omega).
double sigma_max_at(const ClosedLoop& cl, double omega);

// Grid estimate of the first-order resolvent expansion remainder
//   max_omega || (s-A-Delta)^{-1} - (s-A)^{-1} - (s-A)^{-1} Delta (s-A)^{-1} ||_2,
// s = j*omega over the given frequencies. Both A and A+Delta must be stable.
double frechet_remainder(const Matrix& a, const Matrix& delta, const std::vector<double>& omegas);

} // namespace hinfland
