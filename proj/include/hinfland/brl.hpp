#pragma once

#include "hinfland/hinf_norm.hpp"
#include "hinfland/state_space.hpp"

#include <optional>
#include <string>

namespace hinfland {

// Feasibility witness for the non-strict bounded-real LMI at level gamma.
struct Certificate {
    Matrix P;              // symmetric positive definite, 2nx x 2nx
    double gamma = 0.0;
    double lambda_min_P = 0.0;
    double lmi_max_eig = 0.0;   // largest eigenvalue of the certified LMI matrix
    double p12_sigma_min = 0.0; // smallest singular value of the off-diagonal block
};

enum class CertMethod { Riccati, Lmi, None };

struct CertifyResult {
    std::optional<Certificate> certificate;
    std::string failure; // cause when no certificate was produced
    explicit operator bool() const { return certificate.has_value(); }
};

// Scale-aware default acceptance tolerance for lambda_max of the LMI matrix.
double default_lmi_tol(const Matrix& n_matrix);

// The (2nx+nw+nz)-sized symmetric block matrix
//   [ Acl'P + P Acl   P Bcl    Ccl' ]
//   [ Bcl' P          -g I     Dcl' ]
//   [ Ccl             Dcl      -g I ]
// Symmetric by construction (exact element equality).
Matrix assemble_N(const Plant& plant, const Controller& k, const Matrix& p, double gamma);
Matrix assemble_N(const ClosedLoop& cl, const Matrix& p, double gamma);

// Accepts iff lambda_min(P) > 0 and lambda_max(N) <= lmi_tol; a negative
// lmi_tol requests the scale-aware default.
CertifyResult check_certificate(const Plant& plant, const Controller& k, const Matrix& p, double gamma,
                                double lmi_tol = -1.0);

// Certificate via the bounded-real Riccati equation at level gamma*(1+slack),
// solved through the stable invariant subspace of the level Hamiltonian.
// Failure (ill-posed equation, rank-deficient subspace, indefinite solution)
// is a value; callers fall back to certify_lmi.
CertifyResult certify_riccati(const Plant& plant, const Controller& k, double gamma, double slack = 0.0);

// Certificate via alternating projections between the affine set
// {(P, N(P)) : P symmetric} and the cone product {P >= mu*I} x {N <= 0}.
CertifyResult certify_lmi(const Plant& plant, const Controller& k, double gamma, int max_iter = 50000,
                          double lmi_tol = -1.0, double mu = 1e-6);

struct NondegeneracyResult {
    bool nondegenerate = false;
    std::optional<Certificate> certificate;
    CertMethod method = CertMethod::None;
    double gamma_hat = 0.0; // computed norm estimate
};

// Computes J(k) at rel_tol, certifies at gamma_hat/(1-rel_tol) (Riccati first,
// LMI fallback), then requires lambda_min(P) >= eig_floor and
// sigma_min(P12) >= p12_floor.
NondegeneracyResult is_nondegenerate(const Plant& plant, const Controller& k, double rel_tol = 1e-9,
                                     double p12_floor = 0.0, double eig_floor = 1e-4);

} // namespace hinfland
