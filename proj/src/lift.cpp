#include "hinfland/lift.hpp"

#include "hinfland/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hinfland {

namespace {

struct PInverseBlocks {
    Matrix inv11; // (P^{-1})_11
    Matrix inv21; // (P^{-1})_21
};

PInverseBlocks p_inverse_blocks(const Matrix& p, int nx) {
    Eigen::PartialPivLU<Matrix> lu(p);
    const Matrix pinv = lu.solve(Matrix::Identity(p.rows(), p.cols()));
    return {pinv.topLeftCorner(nx, nx), pinv.bottomLeftCorner(nx, nx)};
}

void check_triple(const CertifiedTriple& t, const Plant& plant, const char* where) {
    if (t.k.nx() != plant.nx() || t.k.ny() != plant.ny() || t.k.nu() != plant.nu())
        throw DimensionError(std::string(where) + ": controller does not match the plant");
    if (t.P.rows() != 2 * plant.nx() || t.P.cols() != 2 * plant.nx())
        throw DimensionError(std::string(where) + ": P must be 2nx x 2nx");
    const double p_min = lambda_min(t.P);
    if (p_min <= 0.0) {
        std::ostringstream oss;
        oss << where << ": P is not positive definite (lambda_min = " << p_min << ")";
        throw DomainError(oss.str());
    }
    const double s_min = sigma_min(Matrix(t.P.topRightCorner(plant.nx(), plant.nx())));
    if (s_min <= 0.0) {
        std::ostringstream oss;
        oss << where << ": P12 is singular (sigma_min = " << s_min << ")";
        throw DomainError(oss.str());
    }
}

} // namespace

Matrix assemble_M(const LiftedTuple& z, const Plant& plant) {
    const int nx = plant.nx(), nw = plant.nw(), nu = plant.nu(), nz = plant.nz(), ny = plant.ny();
    if (z.X.rows() != nx || z.X.cols() != nx || z.Y.rows() != nx || z.Y.cols() != nx)
        throw DimensionError("assemble_M: X and Y must be nx x nx");
    if (z.M.rows() != nx || z.M.cols() != nx || z.H.rows() != nx || z.H.cols() != ny)
        throw DimensionError("assemble_M: M must be nx x nx and H nx x ny");
    if (z.F.rows() != nu || z.F.cols() != nx || z.G.rows() != nu || z.G.cols() != ny)
        throw DimensionError("assemble_M: F must be nu x nx and G nu x ny");

    const Matrix ax_b2f = plant.A * z.X + plant.B2 * z.F;
    const Matrix a_b2gc2 = plant.A + plant.B2 * z.G * plant.C2;
    const Matrix ya_hc2 = z.Y * plant.A + z.H * plant.C2;
    const Matrix b1_b2gd21 = plant.B1 + plant.B2 * z.G * plant.D21;
    const Matrix yb1_hd21 = z.Y * plant.B1 + z.H * plant.D21;
    const Matrix c1x_d12f = plant.C1 * z.X + plant.D12 * z.F;
    const Matrix c1_d12gc2 = plant.C1 + plant.D12 * z.G * plant.C2;
    const Matrix d11_d12gd21 = plant.D11 + plant.D12 * z.G * plant.D21;

    const int dim = 2 * nx + nw + nz;
    Matrix m = Matrix::Zero(dim, dim);
    m.block(0, 0, nx, nx) = ax_b2f + ax_b2f.transpose();
    m.block(0, nx, nx, nx) = z.M.transpose() + a_b2gc2;
    m.block(nx, 0, nx, nx) = m.block(0, nx, nx, nx).transpose();
    m.block(0, 2 * nx, nx, nw) = b1_b2gd21;
    m.block(2 * nx, 0, nw, nx) = b1_b2gd21.transpose();
    m.block(0, 2 * nx + nw, nx, nz) = c1x_d12f.transpose();
    m.block(2 * nx + nw, 0, nz, nx) = c1x_d12f;
    m.block(nx, nx, nx, nx) = ya_hc2 + ya_hc2.transpose();
    m.block(nx, 2 * nx, nx, nw) = yb1_hd21;
    m.block(2 * nx, nx, nw, nx) = yb1_hd21.transpose();
    m.block(nx, 2 * nx + nw, nx, nz) = c1_d12gc2.transpose();
    m.block(2 * nx + nw, nx, nz, nx) = c1_d12gc2;
    m.block(2 * nx, 2 * nx, nw, nw) = -z.gamma * Matrix::Identity(nw, nw);
    m.block(2 * nx, 2 * nx + nw, nw, nz) = d11_d12gd21.transpose();
    m.block(2 * nx + nw, 2 * nx, nz, nw) = d11_d12gd21;
    m.block(2 * nx + nw, 2 * nx + nw, nz, nz) = -z.gamma * Matrix::Identity(nz, nz);
    return m;
}

bool in_F(const LiftedTuple& z, const Plant& plant, double lmi_tol) {
    const int nx = plant.nx();
    Matrix coupling(2 * nx, 2 * nx);
    coupling.topLeftCorner(nx, nx) = symmetrize(z.X);
    coupling.topRightCorner(nx, nx) = Matrix::Identity(nx, nx);
    coupling.bottomLeftCorner(nx, nx) = Matrix::Identity(nx, nx);
    coupling.bottomRightCorner(nx, nx) = symmetrize(z.Y);
    if (lambda_min(coupling) < kCouplingFloor) return false;
    const Matrix m = assemble_M(z, plant);
    const double tol = lmi_tol < 0.0 ? default_lmi_tol(m) : lmi_tol;
    return lambda_max(m) <= tol;
}

LiftedPoint phi(const CertifiedTriple& t, const Plant& plant) {
    check_triple(t, plant, "phi");
    const int nx = plant.nx();
    const Matrix p11 = t.P.topLeftCorner(nx, nx);
    const Matrix p12 = t.P.topRightCorner(nx, nx);
    const auto [inv11, inv21] = p_inverse_blocks(t.P, nx);

    const Matrix dk = t.k.DK(), ck = t.k.CK(), bk = t.k.BK(), ak = t.k.AK();

    LiftedPoint out;
    out.Xi = p12;
    out.Z.X = symmetrize(inv11);
    out.Z.Y = symmetrize(p11);
    out.Z.M = p12 * bk * plant.C2 * inv11 + p11 * plant.B2 * ck * inv21 +
              p11 * (plant.A + plant.B2 * dk * plant.C2) * inv11 + p12 * ak * inv21;
    out.Z.H = p11 * plant.B2 * dk + p12 * bk;
    out.Z.F = dk * plant.C2 * inv11 + ck * inv21;
    out.Z.G = dk;
    out.Z.gamma = t.gamma;
    return out;
}

CertifiedTriple psi(const Matrix& xi, const LiftedTuple& z, const Plant& plant) {
    const int nx = plant.nx();
    if (xi.rows() != nx || xi.cols() != nx) throw DimensionError("psi: Xi must be nx x nx");

    const Matrix x = symmetrize(z.X);
    const Matrix y = symmetrize(z.Y);
    Eigen::PartialPivLU<Matrix> lu_x(x);
    if (lambda_min(x) <= 0.0) throw DomainError("psi: X is not positive definite");
    const Matrix x_inv = lu_x.solve(Matrix::Identity(nx, nx));
    const Matrix y_minus = symmetrize(y - x_inv);
    if (lambda_min(y_minus) <= 0.0) throw DomainError("psi: Y - X^{-1} is not positive definite");

    Eigen::PartialPivLU<Matrix> lu_xi(xi);
    const Matrix xi_inv = lu_xi.solve(Matrix::Identity(nx, nx));
    if (!xi_inv.allFinite() || sigma_min(xi) <= 1e-300) throw DomainError("psi: Xi is singular");

    const Matrix pi = -xi_inv * y_minus * x;
    Eigen::PartialPivLU<Matrix> lu_pi(pi);
    if (sigma_min(pi) <= 0.0) throw DomainError("psi: Pi is singular");

    // Psi_K = [[I,0],[Y B2, Xi]]^{-1} [[G, F],[H, M - Y A X]] [[I, C2 X],[0, Pi]]^{-1}
    const int nu = plant.nu(), ny = plant.ny();
    Matrix left(nu + nx, nu + nx);
    left.topLeftCorner(nu, nu) = Matrix::Identity(nu, nu);
    left.topRightCorner(nu, nx).setZero();
    left.bottomLeftCorner(nx, nu) = y * plant.B2;
    left.bottomRightCorner(nx, nx) = xi;

    Matrix mid(nu + nx, ny + nx);
    mid.topLeftCorner(nu, ny) = z.G;
    mid.topRightCorner(nu, nx) = z.F;
    mid.bottomLeftCorner(nx, ny) = z.H;
    mid.bottomRightCorner(nx, nx) = z.M - y * plant.A * x;

    Matrix right(ny + nx, ny + nx);
    right.topLeftCorner(ny, ny) = Matrix::Identity(ny, ny);
    right.topRightCorner(ny, nx) = plant.C2 * x;
    right.bottomLeftCorner(nx, ny).setZero();
    right.bottomRightCorner(nx, nx) = pi;

    const Matrix w = left.partialPivLu().solve(mid);
    const Matrix k_block = right.transpose().partialPivLu().solve(w.transpose()).transpose();

    Matrix p(2 * nx, 2 * nx);
    const Matrix y_minus_inv = y_minus.llt().solve(Matrix::Identity(nx, nx));
    p.topLeftCorner(nx, nx) = y;
    p.topRightCorner(nx, nx) = xi;
    p.bottomLeftCorner(nx, nx) = xi.transpose();
    p.bottomRightCorner(nx, nx) = xi.transpose() * y_minus_inv * xi;

    CertifiedTriple out{Controller(k_block, nu, ny), symmetrize(p), z.gamma};
    return out;
}

double CongruenceReport::max() const {
    return std::max({congruence, pt_identity, tpt, a_identity, b_identity, c_identity});
}

CongruenceReport congruence_check(const CertifiedTriple& t, const Plant& plant) {
    check_triple(t, plant, "congruence_check");
    const int nx = plant.nx(), nw = plant.nw(), nz = plant.nz();
    const auto [inv11, inv21] = p_inverse_blocks(t.P, nx);
    const Matrix p11 = t.P.topLeftCorner(nx, nx);
    const Matrix p12 = t.P.topRightCorner(nx, nx);

    Matrix tmat(2 * nx, 2 * nx);
    tmat.topLeftCorner(nx, nx) = inv11;
    tmat.topRightCorner(nx, nx) = Matrix::Identity(nx, nx);
    tmat.bottomLeftCorner(nx, nx) = inv21;
    tmat.bottomRightCorner(nx, nx).setZero();

    const LiftedPoint lifted = phi(t, plant);
    const ClosedLoop cl = assemble_closed_loop(plant, t.k);

    CongruenceReport report;

    Matrix pt_expected(2 * nx, 2 * nx);
    pt_expected.topLeftCorner(nx, nx) = Matrix::Identity(nx, nx);
    pt_expected.topRightCorner(nx, nx) = p11;
    pt_expected.bottomLeftCorner(nx, nx).setZero();
    pt_expected.bottomRightCorner(nx, nx) = p12.transpose();
    report.pt_identity = (t.P * tmat - pt_expected).cwiseAbs().maxCoeff();

    Matrix coupling(2 * nx, 2 * nx);
    coupling.topLeftCorner(nx, nx) = lifted.Z.X;
    coupling.topRightCorner(nx, nx) = Matrix::Identity(nx, nx);
    coupling.bottomLeftCorner(nx, nx) = Matrix::Identity(nx, nx);
    coupling.bottomRightCorner(nx, nx) = lifted.Z.Y;
    report.tpt = (tmat.transpose() * t.P * tmat - coupling).cwiseAbs().maxCoeff();

    Matrix a_expected(2 * nx, 2 * nx);
    a_expected.topLeftCorner(nx, nx) = plant.A * lifted.Z.X + plant.B2 * lifted.Z.F;
    a_expected.topRightCorner(nx, nx) = plant.A + plant.B2 * lifted.Z.G * plant.C2;
    a_expected.bottomLeftCorner(nx, nx) = lifted.Z.M;
    a_expected.bottomRightCorner(nx, nx) = lifted.Z.Y * plant.A + lifted.Z.H * plant.C2;
    report.a_identity = (tmat.transpose() * t.P * cl.A * tmat - a_expected).cwiseAbs().maxCoeff();

    Matrix b_expected(2 * nx, nw);
    b_expected.topRows(nx) = plant.B1 + plant.B2 * lifted.Z.G * plant.D21;
    b_expected.bottomRows(nx) = lifted.Z.Y * plant.B1 + lifted.Z.H * plant.D21;
    report.b_identity = (tmat.transpose() * t.P * cl.B - b_expected).cwiseAbs().maxCoeff();

    Matrix c_expected(nz, 2 * nx);
    c_expected.leftCols(nx) = plant.C1 * lifted.Z.X + plant.D12 * lifted.Z.F;
    c_expected.rightCols(nx) = plant.C1 + plant.D12 * lifted.Z.G * plant.C2;
    report.c_identity = (cl.C * tmat - c_expected).cwiseAbs().maxCoeff();

    const int dim = 2 * nx + nw + nz;
    Matrix blk = Matrix::Zero(dim, dim);
    blk.topLeftCorner(2 * nx, 2 * nx) = tmat;
    blk.block(2 * nx, 2 * nx, nw, nw) = Matrix::Identity(nw, nw);
    blk.block(2 * nx + nw, 2 * nx + nw, nz, nz) = Matrix::Identity(nz, nz);
    const Matrix nmat = assemble_N(cl, t.P, t.gamma);
    const Matrix mmat = assemble_M(lifted.Z, plant);
    report.congruence = (blk.transpose() * nmat * blk - mmat).cwiseAbs().maxCoeff();
    return report;
}

CertifiedTriple descent_curve(const CertifiedTriple& t, const CertifiedTriple& t_better, const Plant& plant,
                              double s) {
    if (!(t_better.gamma < t.gamma))
        throw DomainError("descent_curve: the better triple must have strictly smaller gamma");
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("descent_curve: s must lie in [0, 1]");
    const LiftedPoint a = phi(t, plant);
    const LiftedPoint b = phi(t_better, plant);

    LiftedTuple z;
    z.X = a.Z.X + s * (b.Z.X - a.Z.X);
    z.Y = a.Z.Y + s * (b.Z.Y - a.Z.Y);
    z.M = a.Z.M + s * (b.Z.M - a.Z.M);
    z.H = a.Z.H + s * (b.Z.H - a.Z.H);
    z.F = a.Z.F + s * (b.Z.F - a.Z.F);
    z.G = a.Z.G + s * (b.Z.G - a.Z.G);
    z.gamma = (1.0 - s) * a.Z.gamma + s * b.Z.gamma;
    return psi(a.Xi, z, plant);
}

Matrix descent_direction(const CertifiedTriple& t, const CertifiedTriple& t_better, const Plant& plant,
                         double h) {
    if (!(h > 0.0 && h <= 0.5)) throw DomainError("descent_direction: h must lie in (0, 0.5]");
    const CertifiedTriple at_zero = descent_curve(t, t_better, plant, 0.0);
    const CertifiedTriple at_h = descent_curve(t, t_better, plant, h);
    const Matrix v = (at_h.k.block() - at_zero.k.block()) / h;
    if (v.norm() <= 1e-10) {
        throw NumericalError(
            "descent_direction: tangent is numerically zero; try a smaller h or accept near-optimality");
    }
    return v;
}

} // namespace hinfland
