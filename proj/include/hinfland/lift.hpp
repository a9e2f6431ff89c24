#pragma once

#include "hinfland/brl.hpp"
#include "hinfland/state_space.hpp"

namespace hinfland {

// Point of the convex LMI-defined set (without the invertible factor Xi).
struct LiftedTuple {
    Matrix X; // symmetric nx x nx
    Matrix Y; // symmetric nx x nx
    Matrix M; // nx x nx
    Matrix H; // nx x ny
    Matrix F; // nu x nx
    Matrix G; // nu x ny
    double gamma = 0.0;
};

// Full lifted point: an invertible Xi paired with a tuple in the convex set.
struct LiftedPoint {
    Matrix Xi; // invertible nx x nx
    LiftedTuple Z;
};

// Controller with a positive definite certificate whose off-diagonal block is
// invertible, at level gamma.
struct CertifiedTriple {
    Controller k;
    Matrix P; // 2nx x 2nx
    double gamma = 0.0;
};

inline constexpr double kCouplingFloor = 1e-10; // strict floor for [[X,I],[I,Y]]

// The 4x4-block affine LMI matrix of the lifted feasibility set, of size
// (2nx + nw + nz); symmetric by construction and affine in every argument.
Matrix assemble_M(const LiftedTuple& z, const Plant& plant);

// Membership in the convex set: [[X,I],[I,Y]] > 0 and M(Z) <= lmi_tol * I.
// A negative lmi_tol requests the scale-aware default.
bool in_F(const LiftedTuple& z, const Plant& plant, double lmi_tol = -1.0);

// Forward map: certified triple -> (P12, (P^{-1})_11, P11, M, H, F, DK, gamma).
LiftedPoint phi(const CertifiedTriple& t, const Plant& plant);

// Inverse map: reconstructs the controller and certificate from a lifted
// point. Requires Y - X^{-1} > 0 and Xi invertible.
CertifiedTriple psi(const Matrix& xi, const LiftedTuple& z, const Plant& plant);

// Residuals of the congruence identities tying the two LMI matrices together
// through T = [[(P^{-1})_11, I], [(P^{-1})_21, 0]].
struct CongruenceReport {
    double congruence = 0.0;  // || M(phi(t)) - blkdiag(T,I,I)' N blkdiag(T,I,I) ||_max
    double pt_identity = 0.0; // || P T - [[I, P11],[0, P12']] ||_max
    double tpt = 0.0;         // || T' P T - [[X, I],[I, Y]] ||_max
    double a_identity = 0.0;  // || T' P Acl T - stated closed form ||_max
    double b_identity = 0.0;  // || T' P Bcl - stated closed form ||_max
    double c_identity = 0.0;  // || Ccl T - stated closed form ||_max
    double max() const;
};
CongruenceReport congruence_check(const CertifiedTriple& t, const Plant& plant);

// Point s on the descent curve psi(s) = Psi(Xi, Z + s (Z' - Z)) between the
// lifts of two certified triples, holding Xi at the current triple's value.
// The gamma component is exactly (1-s) gamma + s gamma'.
CertifiedTriple descent_curve(const CertifiedTriple& t, const CertifiedTriple& t_better, const Plant& plant,
                              double s);

// Finite-difference tangent of the controller projection of the descent curve
// at s = 0; a strictly descending direction for J at non-optimal triples.
Matrix descent_direction(const CertifiedTriple& t, const CertifiedTriple& t_better, const Plant& plant,
                         double h = 1e-6);

} // namespace hinfland
