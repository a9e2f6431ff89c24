#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace hinfland {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Largest real part over the spectrum of a square matrix.
double spectral_abscissa(const Matrix& a);

// Largest modulus over the spectrum.
double spectral_radius(const Matrix& a);

double sigma_max(const Matrix& m);
double sigma_min(const Matrix& m);
double sigma_max(const ComplexMatrix& m);

// Top singular value via the Gram matrix of the smaller side. Cheaper than a
// full SVD inside frequency sweeps; accuracy ~sqrt(eps)*scale is ample there.
double sigma_max_gram(const ComplexMatrix& m);

// Eigenvalue range of a symmetric matrix (symmetrized before the solve).
std::pair<double, double> symmetric_eig_range(const Matrix& s);
double lambda_min(const Matrix& s);
double lambda_max(const Matrix& s);

inline Matrix symmetrize(const Matrix& s) { return 0.5 * (s + s.transpose()); }

// Nearest symmetric matrix with all eigenvalues >= floor (resp. <= cap).
Matrix clip_eigenvalues_below(const Matrix& s, double floor);
Matrix clip_eigenvalues_above(const Matrix& s, double cap);

// svec with sqrt(2)-scaled off-diagonals: <A,B>_F == svec(A).dot(svec(B)).
Vector svec(const Matrix& s);
Matrix smat(const Vector& v, int n);
int svec_size(int n);

// For a real 2n x 2n matrix with n-dimensional stable invariant subspace
// spanned by [X1; X2], returns the real matrix X2*X1^{-1}, computed through a
// reordered complex Schur form. Fails (nullopt) when an eigenvalue lies within
// axis_tol*(1+|lambda|) of the imaginary axis, the stable count is not n, or
// X1 is numerically rank-deficient.
std::optional<Matrix> stable_subspace_solution(const Matrix& h, double axis_tol);

// Runs fn(i) for i in [0, count) on `workers` threads. Results must be written
// to disjoint slots so the outcome is independent of scheduling. workers <= 1
// runs inline.
void parallel_for_index(int count, int workers, const std::function<void(int)>& fn);

} // namespace hinfland
