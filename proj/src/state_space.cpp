#include "hinfland/state_space.hpp"

#include "hinfland/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace hinfland {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

} // namespace

Plant::Plant(Matrix a, Matrix b1, Matrix b2, Matrix c1, Matrix d11, Matrix d12, Matrix c2, Matrix d21)
    : A(std::move(a)), B1(std::move(b1)), B2(std::move(b2)), C1(std::move(c1)), D11(std::move(d11)),
      D12(std::move(d12)), C2(std::move(c2)), D21(std::move(d21)) {
    require(A.rows() >= 1 && A.rows() == A.cols(), "plant block A must be square with n_x >= 1");
    const auto n_x = A.rows();
    require(B1.rows() == n_x, "plant block B1 row count must equal n_x");
    require(B2.rows() == n_x, "plant block B2 row count must equal n_x");
    require(C1.cols() == n_x, "plant block C1 column count must equal n_x");
    require(C2.cols() == n_x, "plant block C2 column count must equal n_x");
    require(D11.rows() == C1.rows() && D11.cols() == B1.cols(), "plant block D11 must be n_z x n_w");
    require(D12.rows() == C1.rows() && D12.cols() == B2.cols(), "plant block D12 must be n_z x n_u");
    require(D21.rows() == C2.rows() && D21.cols() == B1.cols(), "plant block D21 must be n_y x n_w");
}

bool Plant::check_minimality(double tol) const {
    const int n = nx();
    auto full_rank = [&](const Matrix& m) {
        Eigen::JacobiSVD<Matrix> svd(m);
        const auto& sv = svd.singularValues();
        return sv(0) > 0.0 && sv(std::min(m.rows(), m.cols()) - 1) > tol * sv(0);
    };
    auto ctrb = [&](const Matrix& b) {
        Matrix m(n, n * b.cols());
        Matrix term = b;
        for (int i = 0; i < n; ++i) {
            m.middleCols(i * b.cols(), b.cols()) = term;
            term = A * term;
        }
        return m;
    };
    auto obsv = [&](const Matrix& c) {
        Matrix m(n * c.rows(), n);
        Matrix term = c;
        for (int i = 0; i < n; ++i) {
            m.middleRows(i * c.rows(), c.rows()) = term;
            term = term * A;
        }
        return m;
    };
    return full_rank(ctrb(B1)) && full_rank(ctrb(B2)) && full_rank(obsv(C1)) && full_rank(obsv(C2));
}

Plant example_plant() {
    Matrix a(1, 1), b1(1, 2), b2(1, 1), c1(2, 1), d11(2, 2), d12(2, 1), c2(1, 1), d21(1, 2);
    a << -1.0;
    b1 << 1.0, 0.0;
    b2 << 1.0;
    c1 << 1.0, 0.0;
    d11.setZero();
    d12 << 0.0, 1.0;
    c2 << 1.0;
    d21 << 0.0, 1.0;
    return Plant(a, b1, b2, c1, d11, d12, c2, d21);
}

Controller::Controller(Matrix block, int nu, int ny) : block_(std::move(block)), nu_(nu), ny_(ny) {
    require(nu >= 0 && ny >= 0, "controller split sizes must be nonnegative");
    require(block_.rows() > nu, "controller block must have n_x >= 1 state rows");
    const int n_x = static_cast<int>(block_.rows()) - nu;
    require(block_.cols() == ny + n_x, "controller block must be (n_u+n_x) x (n_y+n_x)");
}

Controller Controller::from_parts(const Matrix& dk, const Matrix& ck, const Matrix& bk, const Matrix& ak) {
    require(ak.rows() == ak.cols(), "controller block AK must be square");
    require(dk.rows() == ck.rows(), "controller blocks DK and CK must have equal row counts");
    require(bk.rows() == ak.rows() && ck.cols() == ak.cols(), "controller blocks BK/CK must match AK size");
    require(dk.cols() == bk.cols(), "controller blocks DK and BK must have equal column counts");
    Matrix block(dk.rows() + ak.rows(), dk.cols() + ak.cols());
    block.topLeftCorner(dk.rows(), dk.cols()) = dk;
    block.topRightCorner(ck.rows(), ck.cols()) = ck;
    block.bottomLeftCorner(bk.rows(), bk.cols()) = bk;
    block.bottomRightCorner(ak.rows(), ak.cols()) = ak;
    return Controller(block, static_cast<int>(dk.rows()), static_cast<int>(dk.cols()));
}

ClosedLoop assemble_closed_loop(const Plant& plant, const Controller& k) {
    require(k.ny() == plant.ny(), "controller input width must equal plant n_y");
    require(k.nu() == plant.nu(), "controller output height must equal plant n_u");
    require(k.nx() == plant.nx(), "controller order must equal plant n_x");

    const Matrix dk = k.DK(), ck = k.CK(), bk = k.BK(), ak = k.AK();
    const int n_x = plant.nx();

    ClosedLoop cl;
    cl.A.resize(2 * n_x, 2 * n_x);
    cl.A.topLeftCorner(n_x, n_x) = plant.A + plant.B2 * dk * plant.C2;
    cl.A.topRightCorner(n_x, n_x) = plant.B2 * ck;
    cl.A.bottomLeftCorner(n_x, n_x) = bk * plant.C2;
    cl.A.bottomRightCorner(n_x, n_x) = ak;

    cl.B.resize(2 * n_x, plant.nw());
    cl.B.topRows(n_x) = plant.B1 + plant.B2 * dk * plant.D21;
    cl.B.bottomRows(n_x) = bk * plant.D21;

    cl.C.resize(plant.nz(), 2 * n_x);
    cl.C.leftCols(n_x) = plant.C1 + plant.D12 * dk * plant.C2;
    cl.C.rightCols(n_x) = plant.D12 * ck;

    cl.D = plant.D11 + plant.D12 * dk * plant.D21;
    return cl;
}

bool is_stabilizing(const Plant& plant, const Controller& k, double margin) {
    if (margin < 0.0) throw DomainError("is_stabilizing: margin must be nonnegative");
    const ClosedLoop cl = assemble_closed_loop(plant, k);
    return spectral_abscissa(cl.A) < -margin - kStabilitySlack;
}

ComplexMatrix eval_transfer(const ClosedLoop& cl, double omega) {
    const int n = cl.nx();
    ComplexMatrix m = -cl.A.cast<std::complex<double>>();
    for (int i = 0; i < n; ++i) m(i, i) += std::complex<double>(0.0, omega);
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const double scale = 1.0 + cl.A.cwiseAbs().maxCoeff() + std::abs(omega);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14 * scale)
        throw DomainError("eval_transfer: j*omega is (numerically) a pole of the closed loop");
    return cl.C.cast<std::complex<double>>() * lu.solve(cl.B.cast<std::complex<double>>()) +
           cl.D.cast<std::complex<double>>();
}

double sigma_max_at(const ClosedLoop& cl, double omega) {
    return sigma_max(eval_transfer(cl, omega));
}

double frechet_remainder(const Matrix& a, const Matrix& delta, const std::vector<double>& omegas) {
    if (a.rows() != a.cols() || delta.rows() != a.rows() || delta.cols() != a.cols())
        throw DimensionError("frechet_remainder: A and Delta must be square of equal size");
    if (spectral_abscissa(a) >= 0.0) throw DomainError("frechet_remainder: A must be stable");
    if (spectral_abscissa(a + delta) >= 0.0) throw DomainError("frechet_remainder: A + Delta must be stable");

    const int n = static_cast<int>(a.rows());
    const ComplexMatrix ac = a.cast<std::complex<double>>();
    const ComplexMatrix dc = delta.cast<std::complex<double>>();
    double worst = 0.0;
    for (double omega : omegas) {
        ComplexMatrix s = ComplexMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) s(i, i) = std::complex<double>(0.0, omega);
        const ComplexMatrix r = (s - ac).partialPivLu().solve(ComplexMatrix::Identity(n, n));
        const ComplexMatrix r_pert = (s - ac - dc).partialPivLu().solve(ComplexMatrix::Identity(n, n));
        worst = std::max(worst, sigma_max(ComplexMatrix(r_pert - r - r * dc * r)));
    }
    return worst;
}

} // namespace hinfland
