#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hinfland/errors.hpp"
#include "hinfland/scan.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace hinfland;

namespace {

ScanConfig tiny_config() {
    ScanConfig config;
    config.ak_n = 5;
    config.bk_n = 5;
    config.dk_n = 3;
    config.workers = 1;
    return config;
}

std::vector<ScanRecord> planted_slice(double theta, double noise, int n_on_line) {
    // Low ln|P12| values sit exactly on the line cos(theta) a + sin(theta) b = 0.
    std::vector<ScanRecord> slice;
    const double ca = std::cos(theta), sa = std::sin(theta);
    for (int i = 0; i < n_on_line; ++i) {
        ScanRecord rec;
        const double s = -2.0 + 4.0 * i / (n_on_line - 1);
        rec.a_k = -sa * s;
        rec.b_k = ca * s;
        rec.d_k = 0.0;
        rec.stabilizing = true;
        rec.gamma = 1.0;
        rec.ln_abs_p12 = -20.0 + noise * i;
        rec.method = CertMethod::Riccati;
        slice.push_back(rec);
    }
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int i = 0; i < 20 * n_on_line; ++i) {
        ScanRecord rec;
        rec.a_k = unif(rng);
        rec.b_k = 2.0 * unif(rng);
        rec.d_k = 0.0;
        rec.stabilizing = true;
        rec.gamma = 1.0;
        rec.ln_abs_p12 = -2.0 + 0.1 * unif(rng);
        rec.method = CertMethod::Riccati;
        slice.push_back(rec);
    }
    return slice;
}

} // namespace

TEST_CASE("scan of a small grid matches stability and certificate expectations") {
    const Plant plant = example_plant();
    ScanConfig config = tiny_config();
    config.ak_n = 3;
    config.bk_n = 3;
    config.dk_n = 3; // aK, bK, dK grids include {-2,0,2}, {-4,0,4}, {-1.5,0,1.5}
    const auto records = run_scan(plant, config);
    REQUIRE(records.size() == 27);

    for (const auto& rec : records) {
        CHECK(rec.gamma.has_value() == rec.stabilizing);
        if (rec.ln_abs_p12) {
            REQUIRE(rec.lambda_min_p.has_value());
            REQUIRE(rec.lmi_max_eig.has_value());
            CHECK(rec.method != CertMethod::None);
            CHECK(*rec.lambda_min_p >= config.eig_floor);
            CHECK(*rec.lmi_max_eig <= 1e-6);
        }
    }

    // A_K = 2, B_K = 0, D_K = 0 leaves an unstable controller pole at +2.
    bool found = false;
    for (const auto& rec : records) {
        if (rec.a_k == 2.0 && rec.b_k == 0.0 && rec.d_k == 0.0) {
            found = true;
            CHECK_FALSE(rec.stabilizing);
            CHECK_FALSE(rec.gamma.has_value());
        }
    }
    CHECK(found);
}

TEST_CASE("scan output is deterministic and independent of worker count") {
    const Plant plant = example_plant();
    ScanConfig config = tiny_config();
    const std::string serial = to_csv(run_scan(plant, config));
    config.workers = 3;
    const std::string parallel = to_csv(run_scan(plant, config));
    CHECK(serial == parallel);
    config.workers = 1;
    CHECK(serial == to_csv(run_scan(plant, config)));
}

TEST_CASE("scan honors the grid validity preconditions") {
    const Plant plant = example_plant();
    ScanConfig config = tiny_config();
    config.ak_n = 1;
    CHECK_THROWS_AS(static_cast<void>(run_scan(plant, config)), DomainError);
    config = tiny_config();
    config.dk_lo = 2.0;
    config.dk_hi = -2.0;
    CHECK_THROWS_AS(static_cast<void>(run_scan(plant, config)), DomainError);
}

TEST_CASE("CSV: header-only for empty input and exact round trip") {
    CHECK(to_csv({}) == std::string(kCsvHeader) + "\n");

    ScanRecord rec;
    rec.a_k = -1.25;
    rec.b_k = 0.5;
    rec.d_k = 0.123456789012;
    rec.stabilizing = true;
    rec.gamma = 0.876543210987;
    rec.ln_abs_p12 = -3.5;
    rec.lambda_min_p = 2e-4;
    rec.method = CertMethod::Lmi;
    rec.lmi_max_eig = -1e-9;
    const auto parsed = parse_csv(to_csv({rec}));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].a_k == rec.a_k);
    CHECK(parsed[0].d_k == rec.d_k);
    CHECK(parsed[0].stabilizing);
    CHECK(*parsed[0].gamma == *rec.gamma);
    CHECK(*parsed[0].ln_abs_p12 == *rec.ln_abs_p12);
    CHECK(parsed[0].method == CertMethod::Lmi);
    CHECK(*parsed[0].lmi_max_eig == *rec.lmi_max_eig);

    ScanRecord bare;
    bare.a_k = 2;
    bare.b_k = 0;
    bare.d_k = 0;
    const auto parsed_bare = parse_csv(to_csv({bare}));
    REQUIRE(parsed_bare.size() == 1);
    CHECK_FALSE(parsed_bare[0].stabilizing);
    CHECK_FALSE(parsed_bare[0].gamma.has_value());
    CHECK(parsed_bare[0].method == CertMethod::None);
}

TEST_CASE("CSV uses LF endings and plain decimal fields") {
    ScanRecord rec;
    rec.a_k = 1.0 / 3.0;
    const std::string text = to_csv({rec});
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.find("0.333333333333") != std::string::npos); // 12 significant digits
}

TEST_CASE("SVG heatmap renders one cell per grid point with axis labels") {
    const Plant plant = example_plant();
    ScanConfig config = tiny_config();
    const auto records = run_scan(plant, config);
    const auto dks = distinct_dk(records);
    REQUIRE(static_cast<int>(dks.size()) == config.dk_n);
    const auto slice = slice_by_dk(records, dks[1]);
    REQUIRE(static_cast<int>(slice.size()) == config.ak_n * config.bk_n);

    const std::string svg = to_svg_heatmap(slice, "ln_abs_p12");
    size_t rects = 0;
    for (size_t at = svg.find("<rect"); at != std::string::npos; at = svg.find("<rect", at + 1)) ++rects;
    CHECK(rects == static_cast<size_t>(config.ak_n * config.bk_n));
    CHECK(svg.find(">A_K<") != std::string::npos);
    CHECK(svg.find(">B_K<") != std::string::npos);

    CHECK_THROWS_AS(static_cast<void>(to_svg_heatmap(slice, "no_such_field")), DomainError);
}

TEST_CASE("line fit recovers a planted degenerate line") {
    for (double theta : {0.3, -0.8, 1.2}) {
        const auto slice = planted_slice(theta, 1e-4, 15);
        const auto fit = fit_degenerate_line(slice, 1.0, 0.03);
        REQUIRE(fit.has_value());
        CHECK(fit->max_perp_dist < 1e-9);
        const double canonical = std::cos(theta) >= 0 ? theta : theta - std::copysign(M_PI, theta);
        CHECK(std::abs(fit->theta - canonical) < 1e-6);
        CHECK(fit->n_low >= 3);
    }
}

TEST_CASE("line fit is rotation-equivariant") {
    const double alpha = 0.25;
    const auto base = planted_slice(0.4, 1e-4, 15);
    std::vector<ScanRecord> rotated = base;
    for (auto& rec : rotated) {
        const double a = rec.a_k, b = rec.b_k;
        rec.a_k = std::cos(alpha) * a - std::sin(alpha) * b;
        rec.b_k = std::sin(alpha) * a + std::cos(alpha) * b;
    }
    const auto f0 = fit_degenerate_line(base, 1.0, 0.03);
    const auto f1 = fit_degenerate_line(rotated, 1.0, 0.03);
    REQUIRE(f0.has_value());
    REQUIRE(f1.has_value());
    CHECK(std::abs(f1->theta - (f0->theta + alpha)) < 1e-6);
}

TEST_CASE("line fit reports insufficient data") {
    std::vector<ScanRecord> slice(2);
    slice[0].ln_abs_p12 = -1.0;
    slice[1].ln_abs_p12 = -2.0;
    CHECK_FALSE(fit_degenerate_line(slice, 1.0, 0.1).has_value());
    CHECK_THROWS_AS(static_cast<void>(fit_degenerate_line(slice, 1.0, 0.7)), DomainError);
}

TEST_CASE("the cost depends on B_K and C_K only through their product") {
    const Plant plant = example_plant();
    std::mt19937_64 rng(607);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    for (int trial = 0; trial < 8; ++trial) {
        std::uniform_real_distribution<double> mild(0.4, 1.1);
        const double bk = mild(rng), ck = mild(rng), s = unif(rng);
        Matrix block(2, 2), scaled(2, 2);
        block << -0.2, ck, bk, -1.1;
        scaled << -0.2, ck / s, bk * s, -1.1;
        const Controller k1(block, 1, 1), k2(scaled, 1, 1);
        REQUIRE(is_stabilizing(plant, k1));
        const double j1 = hinf_norm(assemble_closed_loop(plant, k1), 1e-10).gamma;
        const double j2 = hinf_norm(assemble_closed_loop(plant, k2), 1e-10).gamma;
        CHECK(j1 == doctest::Approx(j2).epsilon(1e-8));
    }
}
