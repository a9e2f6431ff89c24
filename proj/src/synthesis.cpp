#include "hinfland/synthesis.hpp"

#include "hinfland/affine_cone.hpp"
#include "hinfland/errors.hpp"
#include "hinfland/log.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace hinfland {

namespace {

// Flat parameterization of (X, Y, M, H, F, G): svec for the symmetric pair,
// column-major vec for the rest.
struct TupleCodec {
    int nx, ny, nu;
    int sx;    // svec length of an nx x nx symmetric matrix
    int total; // flat dimension

    explicit TupleCodec(const Plant& p)
        : nx(p.nx()), ny(p.ny()), nu(p.nu()), sx(svec_size(p.nx())),
          total(2 * svec_size(p.nx()) + p.nx() * p.nx() + p.nx() * p.ny() + p.nu() * p.nx() +
                p.nu() * p.ny()) {}

    Vector encode(const LiftedTuple& z) const {
        Vector v(total);
        int at = 0;
        v.segment(at, sx) = svec(z.X);
        at += sx;
        v.segment(at, sx) = svec(z.Y);
        at += sx;
        v.segment(at, nx * nx) = Eigen::Map<const Vector>(z.M.data(), nx * nx);
        at += nx * nx;
        v.segment(at, nx * ny) = Eigen::Map<const Vector>(z.H.data(), nx * ny);
        at += nx * ny;
        v.segment(at, nu * nx) = Eigen::Map<const Vector>(z.F.data(), nu * nx);
        at += nu * nx;
        v.segment(at, nu * ny) = Eigen::Map<const Vector>(z.G.data(), nu * ny);
        return v;
    }

    LiftedTuple decode(const Vector& v, double gamma) const {
        LiftedTuple z;
        int at = 0;
        z.X = smat(v.segment(at, sx), nx);
        at += sx;
        z.Y = smat(v.segment(at, sx), nx);
        at += sx;
        z.M = Eigen::Map<const Matrix>(v.segment(at, nx * nx).data(), nx, nx);
        at += nx * nx;
        z.H = Eigen::Map<const Matrix>(v.segment(at, nx * ny).data(), nx, ny);
        at += nx * ny;
        z.F = Eigen::Map<const Matrix>(v.segment(at, nu * nx).data(), nu, nx);
        at += nu * nx;
        z.G = Eigen::Map<const Matrix>(v.segment(at, nu * ny).data(), nu, ny);
        z.gamma = gamma;
        return z;
    }
};

// Acceptance threshold for synthesis probes: the inverse lifting amplifies
// LMI slack by the squared conditioning of the transformation, so probes aim
// several orders below the generic scale-aware default.
double tight_tol(const Plant& plant) {
    double scale = 1.0;
    for (const Matrix* m : {&plant.A, &plant.B1, &plant.B2, &plant.C1, &plant.D11, &plant.D12,
                            &plant.C2, &plant.D21})
        scale = std::max(scale, m->cwiseAbs().maxCoeff());
    return 1e-12 * scale;
}

Matrix coupling_matrix(const LiftedTuple& z) {
    const int nx = static_cast<int>(z.X.rows());
    Matrix w(2 * nx, 2 * nx);
    w.topLeftCorner(nx, nx) = z.X;
    w.topRightCorner(nx, nx) = Matrix::Identity(nx, nx);
    w.bottomLeftCorner(nx, nx) = Matrix::Identity(nx, nx);
    w.bottomRightCorner(nx, nx) = z.Y;
    return w;
}

} // namespace

FeasibilityResult feasibility_F(const Plant& plant, double gamma, double strict_floor, int max_iter,
                                const LiftedTuple* warm_start, double accept_tol) {
    if (!(gamma > 0.0)) throw DomainError("feasibility_F: gamma must be positive");
    const TupleCodec codec(plant);
    const int nx = plant.nx();
    const int dim_m = 2 * nx + plant.nw() + plant.nz();
    const int sw = svec_size(2 * nx);
    const int sm = svec_size(dim_m);

    // Affine maps z -> svec(W) and z -> svec(M), built column by column.
    LiftedTuple zero;
    zero.X = Matrix::Zero(nx, nx);
    zero.Y = Matrix::Zero(nx, nx);
    zero.M = Matrix::Zero(nx, nx);
    zero.H = Matrix::Zero(nx, plant.ny());
    zero.F = Matrix::Zero(plant.nu(), nx);
    zero.G = Matrix::Zero(plant.nu(), plant.ny());
    zero.gamma = gamma;

    AffineConePair problem;
    problem.n_lo = 2 * nx;
    problem.lo0 = svec(coupling_matrix(zero));
    problem.n_hi = dim_m;
    problem.hi0 = svec(assemble_M(zero, plant));
    problem.l_lo.resize(sw, codec.total);
    problem.l_hi.resize(sm, codec.total);
    {
        Vector e = Vector::Zero(codec.total);
        for (int j = 0; j < codec.total; ++j) {
            e(j) = 1.0;
            const LiftedTuple basis = codec.decode(e, gamma);
            problem.l_lo.col(j) = svec(coupling_matrix(basis)) - problem.lo0;
            problem.l_hi.col(j) = svec(assemble_M(basis, plant)) - problem.hi0;
            e(j) = 0.0;
        }
    }
    problem.floor_min = strict_floor;
    problem.cap_max = 0.0;
    problem.accept_floor = strict_floor * (1.0 - 1e-9);
    problem.accept_cap = accept_tol < 0.0 ? default_lmi_tol(smat(problem.hi0, dim_m)) : accept_tol;

    LiftedTuple start = zero;
    if (warm_start != nullptr) {
        start = *warm_start;
        start.gamma = gamma;
    } else {
        start.X = 2.0 * Matrix::Identity(nx, nx);
        start.Y = 2.0 * Matrix::Identity(nx, nx);
    }

    const AffineConeOutcome solved = solve_affine_cone_pair(problem, codec.encode(start), max_iter);
    FeasibilityResult out;
    out.residual = solved.residual;
    out.undetermined = solved.budget_exhausted;
    if (solved.x) {
        LiftedTuple z = codec.decode(*solved.x, gamma);
        if (in_F(z, plant, problem.accept_cap < default_lmi_tol(smat(problem.hi0, dim_m))
                               ? -1.0
                               : problem.accept_cap)) {
            out.tuple = std::move(z);
        } else {
            out.undetermined = true; // accepted numerically but failed the member check
        }
    }
    return out;
}

SynthesisResult min_gamma(const Plant& plant, double rel_tol, double strict_floor, int max_iter) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("min_gamma: rel_tol must lie in (0, 1)");

    double gamma_hi = 1.0;
    FeasibilityResult feasible;
    LiftedTuple best_tuple;
    int guard = 0;
    for (;; ++guard) {
        if (guard > 60) throw NumericalError("min_gamma: no feasible gamma found below the initial cap");
        feasible = feasibility_F(plant, gamma_hi, strict_floor, max_iter, nullptr, tight_tol(plant));
        if (feasible) {
            best_tuple = *feasible.tuple;
            break;
        }
        gamma_hi *= 2.0;
    }

    double gamma_lo = 0.0;
    while (gamma_hi - gamma_lo > rel_tol * gamma_hi) {
        const double mid = gamma_lo > 0.0 ? 0.5 * (gamma_lo + gamma_hi) : gamma_hi / 2.0;
        const FeasibilityResult probe =
            feasibility_F(plant, mid, strict_floor, max_iter, &best_tuple, tight_tol(plant));
        if (probe) {
            gamma_hi = mid;
            best_tuple = *probe.tuple;
        } else {
            gamma_lo = mid;
        }
        std::ostringstream oss;
        oss << "min_gamma bracket [" << gamma_lo << ", " << gamma_hi << "]";
        log_debug(oss.str());
    }

    const int nx = plant.nx();
    CertifiedTriple triple = psi(Matrix::Identity(nx, nx), best_tuple, plant);

    SynthesisResult out{gamma_hi, triple.k, Certificate{}, {gamma_lo, gamma_hi}, 0.0};
    out.j_k_star = hinf_norm(assemble_closed_loop(plant, triple.k), 1e-9).gamma;
    if (out.j_k_star > gamma_hi * (1.0 + 1e-6)) {
        std::ostringstream oss;
        oss << "min_gamma: recovered controller has norm " << out.j_k_star
            << " above the certified level " << gamma_hi;
        throw NumericalError(oss.str());
    }
    // The recovered P witnesses gamma_star; projection round-off is absorbed
    // by a relaxed validation tolerance.
    const Matrix nmat = assemble_N(plant, triple.k, triple.P, gamma_hi);
    CertifyResult checked =
        check_certificate(plant, triple.k, triple.P, gamma_hi, 1e-6 * (1.0 + nmat.cwiseAbs().maxCoeff()));
    if (!checked) throw NumericalError("min_gamma: recovered certificate failed validation: " + checked.failure);
    out.cert = *checked.certificate;
    return out;
}

} // namespace hinfland
