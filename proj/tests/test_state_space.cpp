#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hinfland/errors.hpp"
#include "hinfland/json_io.hpp"
#include "hinfland/state_space.hpp"
#include "test_support.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace hinfland;
using hinfland::testing::random_dims;
using hinfland::testing::random_matrix;
using hinfland::testing::random_plant;
using hinfland::testing::random_stabilizing_controller;

namespace {

Controller controller_2x2(double dk, double ck, double bk, double ak) {
    Matrix block(2, 2);
    block << dk, ck, bk, ak;
    return Controller(block, 1, 1);
}

// Literal transcription of the four closed-loop block formulas, kept separate
// from the library implementation.
ClosedLoop reexpand_closed_loop(const Plant& p, const Controller& k) {
    const Matrix dk = k.DK(), ck = k.CK(), bk = k.BK(), ak = k.AK();
    const int nx = p.nx();
    ClosedLoop cl;
    cl.A.resize(2 * nx, 2 * nx);
    cl.A << p.A + p.B2 * dk * p.C2, p.B2 * ck, bk * p.C2, ak;
    cl.B.resize(2 * nx, p.nw());
    cl.B << p.B1 + p.B2 * dk * p.D21, bk * p.D21;
    cl.C.resize(p.nz(), 2 * nx);
    cl.C << p.C1 + p.D12 * dk * p.C2, p.D12 * ck;
    cl.D = p.D11 + p.D12 * dk * p.D21;
    return cl;
}

} // namespace

TEST_CASE("closed-loop assembly matches the hand-computed example") {
    const Plant plant = example_plant();
    const ClosedLoop cl = assemble_closed_loop(plant, controller_2x2(0, 1, 0, -1));

    Matrix a_expected(2, 2), b_expected(2, 2), c_expected(2, 2);
    a_expected << -1, 1, 0, -1;
    b_expected << 1, 0, 0, 0;
    c_expected << 1, 0, 0, 1;
    CHECK(cl.A.isApprox(a_expected, 0.0));
    CHECK(cl.B.isApprox(b_expected, 0.0));
    CHECK(cl.C.isApprox(c_expected, 0.0));
    CHECK(cl.D.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero controller leaves only the plant blocks") {
    const Plant plant = example_plant();
    const ClosedLoop cl = assemble_closed_loop(plant, controller_2x2(0, 0, 0, 0));
    CHECK(cl.A(0, 0) == plant.A(0, 0));
    CHECK(cl.A(0, 1) == 0.0);
    CHECK(cl.A(1, 0) == 0.0);
    CHECK(cl.A(1, 1) == 0.0);
    CHECK(cl.B.bottomRows(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(cl.B.topRows(1).isApprox(plant.B1, 0.0));
}

TEST_CASE("static gain enters the closed loop through B2 DK C2") {
    const ClosedLoop cl = assemble_closed_loop(example_plant(), controller_2x2(-0.5, 1, 0, -1));
    Matrix a_expected(2, 2);
    a_expected << -1.5, 1, 0, -1;
    CHECK(cl.A.isApprox(a_expected, 0.0));
}

TEST_CASE("assembly rejects mismatched dimensions with the block name") {
    const Plant plant = example_plant();
    Matrix block(3, 3);
    block.setZero();
    block(1, 1) = -1;
    block(2, 2) = -1;
    const Controller k(block, 1, 1); // order 2 against an order-1 plant
    CHECK_THROWS_WITH_AS(static_cast<void>(assemble_closed_loop(plant, k)),
                         "controller order must equal plant n_x", DimensionError);
}

TEST_CASE("block formulas agree with an independent re-expansion") {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 50; ++trial) {
        const Plant plant = random_plant(rng, random_dims(rng));
        const Matrix block =
            random_matrix(rng, plant.nu() + plant.nx(), plant.ny() + plant.nx());
        const Controller k(block, plant.nu(), plant.ny());
        const ClosedLoop got = assemble_closed_loop(plant, k);
        const ClosedLoop expected = reexpand_closed_loop(plant, k);
        CHECK(got.A.isApprox(expected.A, 0.0));
        CHECK(got.B.isApprox(expected.B, 0.0));
        CHECK(got.C.isApprox(expected.C, 0.0));
        CHECK(got.D.isApprox(expected.D, 0.0));
    }
}

TEST_CASE("stability classification on the worked example") {
    const Plant plant = example_plant();
    CHECK(is_stabilizing(plant, controller_2x2(0, 1, 0, -1), 0.0));
    CHECK_FALSE(is_stabilizing(plant, controller_2x2(0, 1, 0, 0), 0.0)); // marginal pole at 0
    CHECK_FALSE(is_stabilizing(plant, controller_2x2(0, 1, 0, -1), 2.0));
    CHECK_THROWS_AS(static_cast<void>(is_stabilizing(plant, controller_2x2(0, 1, 0, -1), -1.0)),
                    DomainError);
}

TEST_CASE("stability is invariant under controller similarity transforms") {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Plant plant = random_plant(rng, random_dims(rng));
        const Matrix block =
            random_matrix(rng, plant.nu() + plant.nx(), plant.ny() + plant.nx());
        const Controller k(block, plant.nu(), plant.ny());
        const double abscissa = spectral_abscissa(assemble_closed_loop(plant, k).A);
        if (std::abs(abscissa) < 1e-6) continue; // skip near-marginal draws

        const int nx = plant.nx();
        Matrix s = Matrix::Identity(nx, nx);
        for (int i = 0; i < nx; ++i) s(i, i) = unif(rng); // well-conditioned diagonal S
        const Matrix s_inv = s.inverse();
        const Controller kt =
            Controller::from_parts(k.DK(), k.CK() * s_inv, s * k.BK(), s * k.AK() * s_inv);
        CHECK(is_stabilizing(plant, k) == is_stabilizing(plant, kt));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("transfer evaluation matches the closed forms") {
    const Plant plant = example_plant();
    const ClosedLoop cl = assemble_closed_loop(plant, controller_2x2(0, 1, 0, -1));

    const ComplexMatrix t0 = eval_transfer(cl, 0.0);
    CHECK(std::abs(t0(0, 0) - std::complex<double>(1, 0)) < 1e-14);
    CHECK(std::abs(t0(0, 1)) < 1e-14);
    CHECK(std::abs(t0(1, 0)) < 1e-14);
    CHECK(std::abs(t0(1, 1)) < 1e-14);
    CHECK(sigma_max_at(cl, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    const ComplexMatrix t1 = eval_transfer(cl, 1.0);
    CHECK(std::abs(t1(0, 0) - 1.0 / std::complex<double>(1, 1)) < 1e-14);
    CHECK(sigma_max_at(cl, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("feedthrough-only loop returns D at every frequency") {
    ClosedLoop cl;
    cl.A = -Matrix::Identity(2, 2);
    cl.B = Matrix::Ones(2, 1);
    cl.C = Matrix::Zero(1, 2);
    cl.D = Matrix::Constant(1, 1, 2.0);
    for (double omega : {0.0, 0.7, 13.0}) {
        const ComplexMatrix t = eval_transfer(cl, omega);
        CHECK(std::abs(t(0, 0) - std::complex<double>(2, 0)) < 1e-15);
    }
    CHECK(sigma_max_at(cl, 3.0) == doctest::Approx(2.0));
}

TEST_CASE("zero transfer has zero gain") {
    ClosedLoop cl;
    cl.A = -Matrix::Identity(2, 2);
    cl.B = Matrix::Ones(2, 1);
    cl.C = Matrix::Zero(1, 2);
    cl.D = Matrix::Zero(1, 1);
    CHECK(sigma_max_at(cl, 0.4) == 0.0);
}

TEST_CASE("evaluation on a pole reports the axis error") {
    ClosedLoop cl;
    cl.A.resize(2, 2);
    cl.A << 0, 1, -1, 0; // eigenvalues +-j
    cl.B = Matrix::Ones(2, 1);
    cl.C = Matrix::Ones(1, 2);
    cl.D = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(static_cast<void>(eval_transfer(cl, 1.0)), DomainError);
}

TEST_CASE("transfer at conjugate frequencies conjugates") {
    std::mt19937_64 rng(1003);
    for (int trial = 0; trial < 20; ++trial) {
        const Plant plant = random_plant(rng, random_dims(rng));
        const Controller k = random_stabilizing_controller(rng, plant);
        const ClosedLoop cl = assemble_closed_loop(plant, k);
        const double omega = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
        const ComplexMatrix plus = eval_transfer(cl, omega);
        const ComplexMatrix minus = eval_transfer(cl, -omega);
        CHECK((minus - plus.conjugate()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + plus.norm()));
    }
}

TEST_CASE("controller block and four-field views round-trip exactly") {
    std::mt19937_64 rng(1004);
    const Matrix block = random_matrix(rng, 3, 4);
    const Controller k(block, 1, 2); // nu=1, ny=2, nx=2
    const Controller k2 = Controller::from_parts(k.DK(), k.CK(), k.BK(), k.AK());
    CHECK(k2.block().isApprox(block, 0.0));
    CHECK(k2.nu() == 1);
    CHECK(k2.ny() == 2);
    CHECK(k2.nx() == 2);
}

TEST_CASE("frechet remainder: zero perturbation") {
    const Matrix a = -Matrix::Identity(3, 3);
    CHECK(frechet_remainder(a, Matrix::Zero(3, 3), {0.0, 1.0, 5.0}) == 0.0);
}

TEST_CASE("frechet remainder: scalar arithmetic case") {
    Matrix a(1, 1), d(1, 1);
    a << -1.0;
    d << 0.1;
    // (1/0.9) - 1 - 0.1 at omega = 0
    CHECK(frechet_remainder(a, d, {0.0}) == doctest::Approx(1.0 / 0.9 - 1.1).epsilon(1e-12));
}

TEST_CASE("frechet remainder rejects destabilizing perturbations") {
    Matrix a(1, 1), d(1, 1);
    a << -1.0;
    d << 2.0;
    CHECK_THROWS_AS(static_cast<void>(frechet_remainder(a, d, {0.0})), DomainError);
}

TEST_CASE("frechet remainder is quadratically small with the predicted constant") {
    std::mt19937_64 rng(1005);
    std::vector<double> omegas;
    for (int i = 0; i <= 60; ++i) omegas.push_back(0.25 * i);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = hinfland::testing::random_stable_matrix(rng, 3);
        Matrix delta = random_matrix(rng, 3, 3);
        // Keep ||R||*||Delta|| < 1 so the series bound applies.
        double resolvent_norm = 0.0;
        const int n = 3;
        for (double omega : omegas) {
            ComplexMatrix s = ComplexMatrix::Zero(n, n);
            for (int i = 0; i < n; ++i) s(i, i) = std::complex<double>(0.0, omega);
            resolvent_norm = std::max(
                resolvent_norm,
                sigma_max(ComplexMatrix(
                    (s - a.cast<std::complex<double>>()).partialPivLu().solve(ComplexMatrix::Identity(n, n)))));
        }
        delta *= 0.1 / (resolvent_norm * sigma_max(delta));

        double prev_ratio = std::numeric_limits<double>::infinity();
        double prev_t = 1.0;
        for (double t : {1e-1, 1e-2, 1e-3}) {
            const double r = frechet_remainder(a, Matrix(t * delta), omegas);
            const double ratio = r / (t * t);
            const double dn = t * sigma_max(delta);
            const double bound = std::pow(resolvent_norm, 3) / (1.0 - resolvent_norm * dn) *
                                 sigma_max(delta) * sigma_max(delta);
            CHECK(ratio <= bound * (1.0 + 1e-9));
            // The ratio converges to its quadratic limit from either side; the
            // neglected cubic tail allows an O(t) band around non-increase.
            const double band = 1.0 + 5.0 * prev_t * resolvent_norm * sigma_max(delta);
            CHECK(ratio <= prev_ratio * band);
            prev_ratio = ratio;
            prev_t = t;
        }
    }
}

TEST_CASE("plant validation names the offending block") {
    Matrix a(1, 1), b1(1, 2), b2(2, 1), c1(2, 1), d11(2, 2), d12(2, 1), c2(1, 1), d21(1, 2);
    a << -1;
    b1.setZero();
    b2.setZero();
    c1.setZero();
    d11.setZero();
    d12.setZero();
    c2.setZero();
    d21.setZero();
    CHECK_THROWS_WITH_AS(Plant(a, b1, b2, c1, d11, d12, c2, d21),
                         "plant block B2 row count must equal n_x", DimensionError);
}

TEST_CASE("worked example satisfies the minimality diagnostic") {
    CHECK(example_plant().check_minimality());
}

TEST_CASE("plant and controller JSON round-trips preserve entries") {
    std::mt19937_64 rng(1006);
    const Plant plant = random_plant(rng, random_dims(rng));
    const Plant back = plant_from_json(plant_to_json(plant));
    CHECK(back.A.isApprox(plant.A, 0.0));
    CHECK(back.D21.isApprox(plant.D21, 0.0));

    const Controller k(random_matrix(rng, plant.nu() + plant.nx(), plant.ny() + plant.nx()),
                       plant.nu(), plant.ny());
    const Controller kb = controller_from_json(controller_to_json(k));
    CHECK(kb.block().isApprox(k.block(), 0.0));

    Json bad = plant_to_json(plant);
    bad["B1"] = Json::array({Json::array({1.0}), Json::array({1.0, 2.0})});
    CHECK_THROWS_AS(static_cast<void>(plant_from_json(bad)), Error);
}
