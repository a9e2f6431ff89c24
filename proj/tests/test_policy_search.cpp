#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hinfland/errors.hpp"
#include "hinfland/policy_search.hpp"
#include "hinfland/synthesis.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace hinfland;

namespace {

Controller controller_2x2(double dk, double ck, double bk, double ak) {
    Matrix block(2, 2);
    block << dk, ck, bk, ak;
    return Controller(block, 1, 1);
}

// The survey box used throughout the worked example: A_K in [-2,2],
// B_K in [-4,4], D_K in [-1.5,1.5], C_K fixed at 1.
void survey_box(Matrix& lo, Matrix& hi) {
    lo.resize(2, 2);
    hi.resize(2, 2);
    lo << -1.5, 1, -4, -2;
    hi << 1.5, 1, 4, 2;
}

} // namespace

TEST_CASE("rejection sampling in the survey box finds stabilizing controllers") {
    const Plant plant = example_plant();
    Matrix lo, hi;
    survey_box(lo, hi);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Controller k = random_stabilizing(plant, seed, lo, hi);
        CHECK(is_stabilizing(plant, k));
        CHECK(k.CK()(0, 0) == 1.0);
    }
}

TEST_CASE("sampling is deterministic per seed") {
    const Plant plant = example_plant();
    Matrix lo, hi;
    survey_box(lo, hi);
    const Controller a = random_stabilizing(plant, 42, lo, hi);
    const Controller b = random_stabilizing(plant, 42, lo, hi);
    CHECK(a.block().isApprox(b.block(), 0.0));
}

TEST_CASE("sampling validates the box") {
    const Plant plant = example_plant();
    Matrix lo, hi;
    survey_box(lo, hi);
    CHECK_THROWS_AS(static_cast<void>(random_stabilizing(plant, 0, hi, lo)), DomainError);
    CHECK_THROWS_AS(static_cast<void>(random_stabilizing(plant, 0, lo.topRows(1), hi.topRows(1))),
                    DimensionError);
}

TEST_CASE("stationarity measure is large away from the optimum") {
    const Plant plant = example_plant();
    const Controller k = controller_2x2(0, 1, 0, -1);
    const double radius = 1e-3 * (1.0 + k.block().norm());
    const double measure = stationarity_measure(plant, k, radius, 9, 7);
    CHECK(measure > 1e-2);
}

TEST_CASE("stationarity measure approaches the gradient norm at smooth points") {
    const Plant plant = example_plant();
    const Controller k = controller_2x2(-0.5, 1, 0.3, -1.2);
    const NormResult norm = hinf_norm(assemble_closed_loop(plant, k), 1e-10);
    const GradientResult grad = hinf_gradient(plant, k, norm);
    REQUIRE(grad.smooth());
    const double gnorm = grad.gradient->norm();
    const double measure = stationarity_measure(plant, k, 1e-4, 9, 11);
    CHECK(std::abs(measure - gnorm) < 0.1 * gnorm);
}

TEST_CASE("stationarity measure is small across the radius ladder at the optimum") {
    // The recovered optimum has stiff dynamics, so the ladder uses absolute
    // radii; the measure stays tiny at every rung.
    const Plant plant = example_plant();
    const SynthesisResult synth = min_gamma(plant, 1e-4);
    const Controller k_star = synth.k_star;
    for (double radius : {1e-2, 1e-3, 1e-4}) {
        const double measure = stationarity_measure(plant, k_star, radius, 17, 3);
        CHECK(measure < 1e-4);
    }
}

TEST_CASE("stationarity measure rejects balls touching the stability boundary") {
    const Plant plant = example_plant();
    const Controller k = controller_2x2(0, 1, 0, -1e-5);
    CHECK_THROWS_AS(static_cast<void>(stationarity_measure(plant, k, 0.3, 9, 5)), DomainError);
}

TEST_CASE("search from the optimum converges immediately") {
    const Plant plant = example_plant();
    const SynthesisResult synth = min_gamma(plant, 1e-4);
    SearchParams params;
    params.tol_stat = 1e-2; // at the optimum the hull collapses quickly
    // Absolute sampling radii sized for the stiff recovered controller.
    const double scale = 1.0 + synth.k_star.block().norm();
    params.radius_ladder = {1e-2 / scale, 1e-3 / scale, 1e-4 / scale};
    const SearchTrace trace = search(plant, synth.k_star, 50, 5, params);
    CHECK(trace.status == SearchStatus::Converged);
    CHECK(trace.iterates.size() <= 3);
}

TEST_CASE("search descends monotonically and reaches the certified optimum") {
    const Plant plant = example_plant();
    const SynthesisResult synth = min_gamma(plant, 1e-4);
    Matrix lo, hi;
    survey_box(lo, hi);

    for (std::uint64_t seed : {1ull, 2ull}) {
        const Controller k0 = random_stabilizing(plant, seed, lo, hi);
        SearchParams params;
        params.tol_stat = 1e-4;
        const SearchTrace trace = search(plant, k0, 400, seed, params);
        REQUIRE(!trace.iterates.empty());
        for (size_t i = 1; i < trace.iterates.size(); ++i)
            CHECK(trace.iterates[i].j <= trace.iterates[i - 1].j + 1e-12);
        const double j_final = trace.iterates.back().j;
        CHECK(std::abs(j_final - synth.gamma_star) <= 0.01 * synth.gamma_star);
    }
}

TEST_CASE("search is deterministic for identical inputs") {
    const Plant plant = example_plant();
    Matrix lo, hi;
    survey_box(lo, hi);
    const Controller k0 = random_stabilizing(plant, 9, lo, hi);
    SearchParams params;
    params.tol_stat = 1e-3;
    const SearchTrace a = search(plant, k0, 60, 17, params);
    const SearchTrace b = search(plant, k0, 60, 17, params);
    REQUIRE(a.iterates.size() == b.iterates.size());
    for (size_t i = 0; i < a.iterates.size(); ++i) {
        CHECK(a.iterates[i].j == b.iterates[i].j);
        CHECK(a.iterates[i].measure == b.iterates[i].measure);
        CHECK(a.iterates[i].k.block().isApprox(b.iterates[i].k.block(), 0.0));
    }
}

TEST_CASE("search requires a stabilizing start") {
    const Plant plant = example_plant();
    CHECK_THROWS_AS(static_cast<void>(search(plant, controller_2x2(0, 1, 0, 1), 10, 0)), DomainError);
}
