#include "hinfland/matrix_util.hpp"

#include "hinfland/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <complex>
#include <thread>

namespace hinfland {

double spectral_abscissa(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double sigma_max(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double sigma_min(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    return sv(sv.size() - 1);
}

double sigma_max(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0);
}

double sigma_max_gram(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    ComplexMatrix gram;
    if (m.rows() <= m.cols())
        gram = m * m.adjoint();
    else
        gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

std::pair<double, double> symmetric_eig_range(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev(0), ev(ev.size() - 1)};
}

double lambda_min(const Matrix& s) { return symmetric_eig_range(s).first; }
double lambda_max(const Matrix& s) { return symmetric_eig_range(s).second; }

Matrix clip_eigenvalues_below(const Matrix& s, double floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
    Vector ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix clip_eigenvalues_above(const Matrix& s, double cap) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
    Vector ev = es.eigenvalues().cwiseMin(cap);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

int svec_size(int n) { return n * (n + 1) / 2; }

Vector svec(const Matrix& s) {
    const int n = static_cast<int>(s.rows());
    Vector v(svec_size(n));
    const double rt2 = std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) v(k++) = (i == j) ? s(i, j) : rt2 * s(i, j);
    return v;
}

Matrix smat(const Vector& v, int n) {
    Matrix s(n, n);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            const double x = (i == j) ? v(k) : inv_rt2 * v(k);
            s(i, j) = x;
            s(j, i) = x;
            ++k;
        }
    return s;
}

namespace {

// Swaps the diagonal entries at positions (p, p+1) of a complex Schur form T,
// applying the same unitary to U. Standard eigenvector-based exchange.
void swap_schur_diagonal(ComplexMatrix& t, ComplexMatrix& u, int p) {
    using C = std::complex<double>;
    const C t11 = t(p, p), t12 = t(p, p + 1), t22 = t(p + 1, p + 1);
    Eigen::Matrix2cd q;
    const C v0 = t12, v1 = t22 - t11;
    const double nv = std::sqrt(std::norm(v0) + std::norm(v1));
    if (nv == 0.0) {
        q << C(0), C(1), C(1), C(0); // decoupled equal eigenvalues: permute
    } else {
        q.col(0) << v0 / nv, v1 / nv;
        q.col(1) << -std::conj(v1 / nv), std::conj(v0 / nv);
    }
    t.middleCols(p, 2) = t.middleCols(p, 2) * q;
    t.middleRows(p, 2) = q.adjoint() * t.middleRows(p, 2);
    u.middleCols(p, 2) = u.middleCols(p, 2) * q;
    t(p + 1, p) = C(0);
}

} // namespace

std::optional<Matrix> stable_subspace_solution(const Matrix& h, double axis_tol) {
    const int m = static_cast<int>(h.rows());
    if (m % 2 != 0 || h.cols() != m) throw DimensionError("stable_subspace_solution: matrix must be square with even size");
    const int n = m / 2;

    ComplexMatrix hc = h.cast<std::complex<double>>();
    Eigen::ComplexSchur<ComplexMatrix> schur(hc);
    if (schur.info() != Eigen::Success) throw NumericalError("complex Schur decomposition failed");
    ComplexMatrix t = schur.matrixT();
    ComplexMatrix u = schur.matrixU();

    for (int i = 0; i < m; ++i) {
        const auto lam = t(i, i);
        if (std::abs(lam.real()) <= axis_tol * (1.0 + std::abs(lam))) return std::nullopt;
    }

    // Bubble eigenvalues with negative real part to the leading positions.
    int front = 0;
    for (int j = 0; j < m; ++j) {
        if (t(j, j).real() < 0.0) {
            for (int k = j; k > front; --k) swap_schur_diagonal(t, u, k - 1);
            ++front;
        }
    }
    if (front != n) return std::nullopt;

    // Basis [X1; X2] of the subspace; the product X2*X1^{-1} is real for a
    // real input matrix, up to rounding.
    const ComplexMatrix x1 = u.topLeftCorner(n, n);
    const ComplexMatrix x2 = u.bottomLeftCorner(n, n);
    Eigen::JacobiSVD<ComplexMatrix> svd(x1);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(n - 1) / sv(0) < 1e-13) return std::nullopt;
    const ComplexMatrix q = x1.transpose().fullPivLu().solve(x2.transpose()).transpose();
    return q.real();
}

void parallel_for_index(int count, int workers, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    int n_threads = workers;
    if (n_threads <= 0) n_threads = hw > 0 ? hw : 1;
    n_threads = std::min(n_threads, count);
    if (n_threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace hinfland
