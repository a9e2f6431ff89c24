#include "hinfland/brl.hpp"

#include "hinfland/affine_cone.hpp"
#include "hinfland/errors.hpp"
#include "hinfland/log.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace hinfland {

double default_lmi_tol(const Matrix& n_matrix) {
    return 1e-8 * (1.0 + n_matrix.cwiseAbs().maxCoeff());
}

Matrix assemble_N(const ClosedLoop& cl, const Matrix& p, double gamma) {
    const int n = cl.nx(), nw = cl.nw(), nz = cl.nz();
    if (p.rows() != n || p.cols() != n) throw DimensionError("assemble_N: P must match the closed-loop order");
    if (!(gamma > 0.0)) throw DomainError("assemble_N: gamma must be positive");

    Matrix nmat = Matrix::Zero(n + nw + nz, n + nw + nz);
    // With P symmetric, A'P + PA equals U + U' for U = A'P; writing it that
    // way keeps the (1,1) block symmetric to the last bit.
    const Matrix u = cl.A.transpose() * p;
    nmat.topLeftCorner(n, n) = u + u.transpose();
    const Matrix pb = p * cl.B;
    nmat.block(0, n, n, nw) = pb;
    nmat.block(n, 0, nw, n) = pb.transpose();
    nmat.block(0, n + nw, n, nz) = cl.C.transpose();
    nmat.block(n + nw, 0, nz, n) = cl.C;
    nmat.block(n, n, nw, nw) = -gamma * Matrix::Identity(nw, nw);
    nmat.block(n, n + nw, nw, nz) = cl.D.transpose();
    nmat.block(n + nw, n, nz, nw) = cl.D;
    nmat.block(n + nw, n + nw, nz, nz) = -gamma * Matrix::Identity(nz, nz);
    return nmat;
}

Matrix assemble_N(const Plant& plant, const Controller& k, const Matrix& p, double gamma) {
    return assemble_N(assemble_closed_loop(plant, k), p, gamma);
}

namespace {

Certificate make_certificate(const Matrix& p, double gamma, double lmi_max) {
    Certificate cert;
    cert.P = symmetrize(p);
    cert.gamma = gamma;
    cert.lambda_min_P = lambda_min(cert.P);
    cert.lmi_max_eig = lmi_max;
    const int nx = static_cast<int>(p.rows()) / 2;
    cert.p12_sigma_min = sigma_min(Matrix(cert.P.topRightCorner(nx, nx)));
    return cert;
}

CertifyResult check_certificate_cl(const ClosedLoop& cl, const Matrix& p, double gamma, double lmi_tol) {
    CertifyResult out;
    if (p.rows() != p.cols() || p.rows() != cl.nx()) {
        out.failure = "P has wrong dimensions";
        return out;
    }
    const Matrix ps = symmetrize(p);
    const Matrix nmat = assemble_N(cl, ps, gamma);
    const double tol = lmi_tol < 0.0 ? default_lmi_tol(nmat) : lmi_tol;
    const double p_min = lambda_min(ps);
    const double n_max = lambda_max(nmat);
    if (p_min <= 0.0) {
        std::ostringstream oss;
        oss << "P is not positive definite (lambda_min = " << p_min << ")";
        out.failure = oss.str();
        return out;
    }
    if (n_max > tol) {
        std::ostringstream oss;
        oss << "LMI matrix is not negative semidefinite (lambda_max = " << n_max << " > " << tol << ")";
        out.failure = oss.str();
        return out;
    }
    out.certificate = make_certificate(ps, gamma, n_max);
    return out;
}

} // namespace

CertifyResult check_certificate(const Plant& plant, const Controller& k, const Matrix& p, double gamma,
                                double lmi_tol) {
    return check_certificate_cl(assemble_closed_loop(plant, k), p, gamma, lmi_tol);
}

CertifyResult certify_riccati(const Plant& plant, const Controller& k, double gamma, double slack) {
    CertifyResult out;
    if (!is_stabilizing(plant, k)) throw DomainError("certify_riccati: controller is not stabilizing");
    const ClosedLoop cl = assemble_closed_loop(plant, k);
    const double level = gamma * (1.0 + slack);

    const int nw = cl.nw();
    const Matrix r = level * level * Matrix::Identity(nw, nw) - cl.D.transpose() * cl.D;
    if (lambda_min(r) <= 0.0) {
        out.failure = "ill-posed: gamma^2*I - D'D is not positive definite";
        return out;
    }

    const Matrix h = bounded_real_hamiltonian(cl, level);
    const auto q_opt = stable_subspace_solution(h, 1e-9);
    if (!q_opt) {
        out.failure = "ill-posed: Hamiltonian has imaginary-axis eigenvalues or a rank-deficient stable subspace";
        return out;
    }
    const Matrix q = symmetrize(*q_opt);
    if (lambda_min(q) < 0.0) {
        out.failure = "Riccati solution is not positive semidefinite";
        return out;
    }

    // The textbook equation certifies the gamma^2-scaled inequality; the
    // norm-scaled LMI takes P = Q/gamma. check_certificate revalidates.
    CertifyResult checked = check_certificate_cl(cl, Matrix(q / level), level, -1.0);
    if (!checked) {
        out.failure = "Riccati solution failed certificate validation: " + checked.failure;
        return out;
    }
    return checked;
}

CertifyResult certify_lmi(const Plant& plant, const Controller& k, double gamma, int max_iter, double lmi_tol,
                          double mu) {
    CertifyResult out;
    if (!is_stabilizing(plant, k)) throw DomainError("certify_lmi: controller is not stabilizing");
    const ClosedLoop cl = assemble_closed_loop(plant, k);
    const int n = cl.nx();
    const int m = n + cl.nw() + cl.nz();
    const int np = svec_size(n);
    const int nm = svec_size(m);

    // x = svec(P); the LMI side is the explicit linear image of the basis.
    AffineConePair problem;
    problem.n_lo = n;
    problem.l_lo = Matrix::Identity(np, np);
    problem.lo0 = Vector::Zero(np);
    problem.n_hi = m;
    const Matrix n0 = assemble_N(cl, Matrix::Zero(n, n), gamma);
    problem.hi0 = svec(n0);
    problem.l_hi.resize(nm, np);
    {
        Vector e = Vector::Zero(np);
        for (int j = 0; j < np; ++j) {
            e(j) = 1.0;
            problem.l_hi.col(j) = svec(Matrix(assemble_N(cl, smat(e, n), gamma) - n0));
            e(j) = 0.0;
        }
    }
    problem.floor_min = mu;
    problem.cap_max = 0.0;
    problem.accept_floor = mu * (1.0 - 1e-9);
    problem.accept_cap = lmi_tol < 0.0 ? default_lmi_tol(n0) : lmi_tol;

    const AffineConeOutcome solved =
        solve_affine_cone_pair(problem, svec(Matrix::Identity(n, n)), max_iter);
    if (solved.x) {
        CertifyResult checked = check_certificate_cl(cl, smat(*solved.x, n), gamma, problem.accept_cap);
        if (checked) return checked;
        out.failure = "projected point failed validation: " + checked.failure;
        return out;
    }
    std::ostringstream oss;
    oss << "alternating projections did not reach feasibility (residual " << solved.residual
        << (solved.budget_exhausted ? ", budget exhausted)" : ")");
    out.failure = oss.str();
    return out;
}

NondegeneracyResult is_nondegenerate(const Plant& plant, const Controller& k, double rel_tol, double p12_floor,
                                     double eig_floor) {
    NondegeneracyResult out;
    const NormResult norm = hinf_norm(assemble_closed_loop(plant, k), rel_tol);
    out.gamma_hat = norm.gamma;
    // Certify from the upper bracket end: it is within rel_tol of the norm and
    // never below it, so the level stays above any feedthrough-attained norm
    // and the Riccati equation keeps a positive definite R block.
    const double level = norm.gamma_hi / (1.0 - rel_tol);

    CertifyResult cert = certify_riccati(plant, k, level, 0.0);
    CertMethod method = CertMethod::Riccati;
    bool meets_floor = cert && cert.certificate->lambda_min_P >= eig_floor &&
                       cert.certificate->p12_sigma_min >= p12_floor;
    if (!meets_floor) {
        CertifyResult lmi = certify_lmi(plant, k, level, 50000, -1.0, std::max(1e-6, eig_floor));
        if (lmi) {
            cert = std::move(lmi);
            method = CertMethod::Lmi;
            meets_floor = cert.certificate->lambda_min_P >= eig_floor &&
                          cert.certificate->p12_sigma_min >= p12_floor;
        }
    }

    if (cert) {
        out.certificate = cert.certificate;
        out.method = method;
        out.nondegenerate = meets_floor;
    }
    return out;
}

} // namespace hinfland
