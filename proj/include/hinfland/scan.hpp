#pragma once

#include "hinfland/brl.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hinfland {

// Grid scan over the three free scalar controller parameters with C_K fixed;
// requires nx = nu = ny = 1.
struct ScanConfig {
    double ak_lo = -2.0, ak_hi = 2.0;
    int ak_n = 41;
    double bk_lo = -4.0, bk_hi = 4.0;
    int bk_n = 41;
    double dk_lo = -1.5, dk_hi = 1.5;
    int dk_n = 13;
    double ck = 1.0;
    double rel_tol = 1e-9;   // norm tolerance
    double eps = 1e-9;       // certificate level lift: gamma_hat / (1 - eps)
    double eig_floor = 1e-4; // required lambda_min(P)
    int workers = 0;         // 0 selects hardware concurrency
};

struct ScanRecord {
    double a_k = 0.0, b_k = 0.0, d_k = 0.0;
    bool stabilizing = false;
    std::optional<double> gamma;
    std::optional<double> ln_abs_p12;  // ln sigma_min(P12); ln|P12| when nx = 1
    std::optional<double> lambda_min_p;
    CertMethod method = CertMethod::None;
    std::optional<double> lmi_max_eig;
};

// One record per grid point in row-major (a_k, b_k, d_k) order: for each
// stabilizing point, the norm at rel_tol and a certificate at
// gamma_hat/(1 - rel_tol), Riccati first with LMI fallback. Per-point failures
// leave optional fields empty; the scan never aborts.
std::vector<ScanRecord> run_scan(const Plant& plant, const ScanConfig& config);

// Records of one d_k slice, preserving scan order.
std::vector<ScanRecord> slice_by_dk(const std::vector<ScanRecord>& records, double d_k);
std::vector<double> distinct_dk(const std::vector<ScanRecord>& records);

struct LineFit {
    double theta = 0.0;         // cos(theta)*A_K + sin(theta)*B_K*C_K = 0
    double max_perp_dist = 0.0; // worst perpendicular distance of selected points
    int n_low = 0;              // number of selected low points
};

// Total-least-squares through-origin line in (A_K, B_K*C_K) coordinates fitted
// to the records whose ln|P12| falls below the slice's low quantile. Returns
// nullopt when fewer than 3 low points carry a certificate.
std::optional<LineFit> fit_degenerate_line(const std::vector<ScanRecord>& slice, double ck,
                                           double low_quantile = 0.02);

inline constexpr const char* kCsvHeader =
    "a_k,b_k,d_k,stabilizing,gamma,ln_abs_p12,lambda_min_p,cert_method,lmi_max_eig";

// CSV with the fixed header above, 12 significant digits, LF line endings.
void emit_csv(const std::vector<ScanRecord>& records, const std::string& path);
std::string to_csv(const std::vector<ScanRecord>& records);
std::vector<ScanRecord> parse_csv(const std::string& text);
std::vector<ScanRecord> read_csv(const std::string& path);

// Rectangular-cell SVG heatmap of one d_k slice; field is one of gamma,
// ln_abs_p12, lambda_min_p, lmi_max_eig. Colormap is a monotone five-anchor
// dark-blue-to-yellow ramp over the field's finite range; cells without a
// value render grey.
void emit_svg_heatmap(const std::vector<ScanRecord>& slice, const std::string& field,
                      const std::string& path);
std::string to_svg_heatmap(const std::vector<ScanRecord>& slice, const std::string& field);

} // namespace hinfland
