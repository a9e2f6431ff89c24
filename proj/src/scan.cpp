#include "hinfland/scan.hpp"

#include "hinfland/errors.hpp"
#include "hinfland/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hinfland {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

const char* method_name(CertMethod m) {
    switch (m) {
        case CertMethod::Riccati: return "riccati";
        case CertMethod::Lmi: return "lmi";
        case CertMethod::None: return "none";
    }
    return "none";
}

CertMethod method_from_name(const std::string& s) {
    if (s == "riccati") return CertMethod::Riccati;
    if (s == "lmi") return CertMethod::Lmi;
    return CertMethod::None;
}

} // namespace

std::vector<ScanRecord> run_scan(const Plant& plant, const ScanConfig& config) {
    if (plant.nx() != 1 || plant.nu() != 1 || plant.ny() != 1)
        throw DomainError("run_scan: the parameter grid assumes nx = nu = ny = 1");
    if (config.ak_n < 2 || config.bk_n < 2 || config.dk_n < 2)
        throw DomainError("run_scan: grid counts must be >= 2");
    if (!(config.ak_hi > config.ak_lo && config.bk_hi > config.bk_lo && config.dk_hi > config.dk_lo))
        throw DomainError("run_scan: grid ranges must be nonempty");

    const auto ak = linspace(config.ak_lo, config.ak_hi, config.ak_n);
    const auto bk = linspace(config.bk_lo, config.bk_hi, config.bk_n);
    const auto dk = linspace(config.dk_lo, config.dk_hi, config.dk_n);
    const int total = config.ak_n * config.bk_n * config.dk_n;

    std::vector<ScanRecord> records(static_cast<size_t>(total));
    parallel_for_index(total, config.workers, [&](int idx) {
        const int id = idx % config.dk_n;
        const int ib = (idx / config.dk_n) % config.bk_n;
        const int ia = idx / (config.dk_n * config.bk_n);

        ScanRecord rec;
        rec.a_k = ak[static_cast<size_t>(ia)];
        rec.b_k = bk[static_cast<size_t>(ib)];
        rec.d_k = dk[static_cast<size_t>(id)];
        try {
            Matrix dkm(1, 1), ckm(1, 1), bkm(1, 1), akm(1, 1);
            dkm << rec.d_k;
            ckm << config.ck;
            bkm << rec.b_k;
            akm << rec.a_k;
            const Controller k = Controller::from_parts(dkm, ckm, bkm, akm);
            rec.stabilizing = is_stabilizing(plant, k);
            if (rec.stabilizing) {
                const NormResult norm = hinf_norm(assemble_closed_loop(plant, k), config.rel_tol);
                rec.gamma = norm.gamma;
                // Upper bracket end keeps the level strictly above the norm
                // (see is_nondegenerate), so feedthrough-attained points do
                // not flip between certificate constructions.
                const double level = norm.gamma_hi / (1.0 - config.eps);

                CertifyResult cert = certify_riccati(plant, k, level, 0.0);
                CertMethod method = CertMethod::Riccati;
                if (!cert || cert.certificate->lambda_min_P < config.eig_floor) {
                    CertifyResult lmi = certify_lmi(plant, k, level, 50000, -1.0,
                                                    std::max(1e-6, config.eig_floor));
                    if (lmi) {
                        cert = std::move(lmi);
                        method = CertMethod::Lmi;
                    }
                }
                if (cert) {
                    rec.method = method;
                    rec.lambda_min_p = cert.certificate->lambda_min_P;
                    rec.lmi_max_eig = cert.certificate->lmi_max_eig;
                    rec.ln_abs_p12 = std::log(cert.certificate->p12_sigma_min);
                }
            }
        } catch (const Error& err) {
            log_warn(std::string("scan point failed: ") + err.what());
        }
        records[static_cast<size_t>(idx)] = rec;
    });
    return records;
}

std::vector<ScanRecord> slice_by_dk(const std::vector<ScanRecord>& records, double d_k) {
    std::vector<ScanRecord> out;
    for (const auto& rec : records)
        if (rec.d_k == d_k) out.push_back(rec);
    return out;
}

std::vector<double> distinct_dk(const std::vector<ScanRecord>& records) {
    std::vector<double> out;
    for (const auto& rec : records)
        if (std::find(out.begin(), out.end(), rec.d_k) == out.end()) out.push_back(rec.d_k);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<LineFit> fit_degenerate_line(const std::vector<ScanRecord>& slice, double ck,
                                           double low_quantile) {
    if (!(low_quantile > 0.0 && low_quantile < 0.5))
        throw DomainError("fit_degenerate_line: low_quantile must lie in (0, 0.5)");

    std::vector<double> values;
    for (const auto& rec : slice)
        if (rec.ln_abs_p12) values.push_back(*rec.ln_abs_p12);
    if (values.size() < 3) return std::nullopt;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const size_t q_idx = static_cast<size_t>(std::floor(low_quantile * (sorted.size() - 1)));
    const double threshold = sorted[q_idx];

    std::vector<Eigen::Vector2d> points;
    for (const auto& rec : slice)
        if (rec.ln_abs_p12 && *rec.ln_abs_p12 <= threshold)
            points.emplace_back(rec.a_k, rec.b_k * ck);
    if (points.size() < 3) return std::nullopt;

    Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
    for (const auto& p : points) scatter += p * p.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(scatter);
    Eigen::Vector2d normal = es.eigenvectors().col(0); // smallest eigenvalue
    if (normal(0) < 0.0 || (normal(0) == 0.0 && normal(1) < 0.0)) normal = -normal;

    LineFit fit;
    fit.theta = std::atan2(normal(1), normal(0));
    fit.n_low = static_cast<int>(points.size());
    for (const auto& p : points) fit.max_perp_dist = std::max(fit.max_perp_dist, std::abs(normal.dot(p)));
    return fit;
}

std::string to_csv(const std::vector<ScanRecord>& records) {
    std::ostringstream oss;
    oss << kCsvHeader << "\n";
    for (const auto& rec : records) {
        oss << format_number(rec.a_k) << ',' << format_number(rec.b_k) << ',' << format_number(rec.d_k)
            << ',' << (rec.stabilizing ? "true" : "false") << ','
            << (rec.gamma ? format_number(*rec.gamma) : "") << ','
            << (rec.ln_abs_p12 ? format_number(*rec.ln_abs_p12) : "") << ','
            << (rec.lambda_min_p ? format_number(*rec.lambda_min_p) : "") << ',' << method_name(rec.method)
            << ',' << (rec.lmi_max_eig ? format_number(*rec.lmi_max_eig) : "") << '\n';
    }
    return oss.str();
}

void emit_csv(const std::vector<ScanRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_csv: cannot open " + path);
    out << to_csv(records);
    if (!out) throw Error("emit_csv: write failed for " + path);
}

std::vector<ScanRecord> parse_csv(const std::string& text) {
    std::istringstream iss(text);
    std::string line;
    if (!std::getline(iss, line)) throw Error("parse_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw Error("parse_csv: unexpected header: " + line);

    std::vector<ScanRecord> records;
    while (std::getline(iss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 9) fields.emplace_back();
        ScanRecord rec;
        rec.a_k = std::stod(fields[0]);
        rec.b_k = std::stod(fields[1]);
        rec.d_k = std::stod(fields[2]);
        rec.stabilizing = fields[3] == "true";
        auto opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        rec.gamma = opt(fields[4]);
        rec.ln_abs_p12 = opt(fields[5]);
        rec.lambda_min_p = opt(fields[6]);
        rec.method = method_from_name(fields[7]);
        rec.lmi_max_eig = opt(fields[8]);
        records.push_back(rec);
    }
    return records;
}

std::vector<ScanRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("read_csv: cannot open " + path);
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_csv(oss.str());
}

namespace {

std::optional<double> field_value(const ScanRecord& rec, const std::string& field) {
    if (field == "gamma") return rec.gamma;
    if (field == "ln_abs_p12") return rec.ln_abs_p12;
    if (field == "lambda_min_p") return rec.lambda_min_p;
    if (field == "lmi_max_eig") return rec.lmi_max_eig;
    throw DomainError("svg heatmap: unknown field " + field);
}

// Monotone dark-blue-to-yellow ramp (low values dark).
std::string ramp_color(double t) {
    static const double anchors[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const double x = t * 4.0;
    const int i = std::min(static_cast<int>(x), 3);
    const double f = x - i;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(anchors[i][0] + f * (anchors[i + 1][0] - anchors[i][0]))),
                  static_cast<int>(std::lround(anchors[i][1] + f * (anchors[i + 1][1] - anchors[i][1]))),
                  static_cast<int>(std::lround(anchors[i][2] + f * (anchors[i + 1][2] - anchors[i][2]))));
    return buf;
}

} // namespace

std::string to_svg_heatmap(const std::vector<ScanRecord>& slice, const std::string& field) {
    if (slice.empty()) throw DomainError("svg heatmap: empty slice");

    std::vector<double> as, bs;
    for (const auto& rec : slice) {
        if (std::find(as.begin(), as.end(), rec.a_k) == as.end()) as.push_back(rec.a_k);
        if (std::find(bs.begin(), bs.end(), rec.b_k) == bs.end()) bs.push_back(rec.b_k);
    }
    std::sort(as.begin(), as.end());
    std::sort(bs.begin(), bs.end());
    const int na = static_cast<int>(as.size()), nb = static_cast<int>(bs.size());

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& rec : slice) {
        const auto v = field_value(rec, field);
        if (v && std::isfinite(*v)) {
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
        }
    }
    const bool has_range = std::isfinite(lo) && hi > lo;

    const int cell = 6, margin_left = 58, margin_bottom = 46, margin_top = 30, margin_right = 16;
    const int width = margin_left + na * cell + margin_right;
    const int height = margin_top + nb * cell + margin_bottom;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    svg << "<text x=\"" << margin_left << "\" y=\"18\" font-size=\"12\">" << field
        << " at d_k = " << format_number(slice.front().d_k) << "</text>\n";

    auto a_index = [&](double v) {
        return static_cast<int>(std::find(as.begin(), as.end(), v) - as.begin());
    };
    auto b_index = [&](double v) {
        return static_cast<int>(std::find(bs.begin(), bs.end(), v) - bs.begin());
    };

    for (const auto& rec : slice) {
        const int ia = a_index(rec.a_k);
        const int ib = b_index(rec.b_k);
        const int x = margin_left + ia * cell;
        const int y = margin_top + (nb - 1 - ib) * cell; // b_k grows upward
        const auto v = field_value(rec, field);
        std::string color = "#bbbbbb";
        if (v && std::isfinite(*v)) color = ramp_color(has_range ? (*v - lo) / (hi - lo) : 0.5);
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
            << "\" fill=\"" << color << "\"/>\n";
    }

    const int plot_bottom = margin_top + nb * cell;
    svg << "<text x=\"" << margin_left + na * cell / 2 << "\" y=\"" << plot_bottom + 30
        << "\" font-size=\"12\" text-anchor=\"middle\">A_K</text>\n";
    svg << "<text x=\"16\" y=\"" << margin_top + nb * cell / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << margin_top + nb * cell / 2 << ")\">B_K</text>\n";
    svg << "<text x=\"" << margin_left << "\" y=\"" << plot_bottom + 14 << "\" font-size=\"10\">"
        << format_number(as.front()) << "</text>\n";
    svg << "<text x=\"" << margin_left + na * cell << "\" y=\"" << plot_bottom + 14
        << "\" font-size=\"10\" text-anchor=\"end\">" << format_number(as.back()) << "</text>\n";
    svg << "<text x=\"" << margin_left - 4 << "\" y=\"" << plot_bottom
        << "\" font-size=\"10\" text-anchor=\"end\">" << format_number(bs.front()) << "</text>\n";
    svg << "<text x=\"" << margin_left - 4 << "\" y=\"" << margin_top + 10
        << "\" font-size=\"10\" text-anchor=\"end\">" << format_number(bs.back()) << "</text>\n";
    if (has_range) {
        svg << "<text x=\"" << margin_left << "\" y=\"" << height - 6 << "\" font-size=\"10\">range ["
            << format_number(lo) << ", " << format_number(hi) << "]</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_svg_heatmap(const std::vector<ScanRecord>& slice, const std::string& field,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_svg_heatmap: cannot open " + path);
    out << to_svg_heatmap(slice, field);
    if (!out) throw Error("emit_svg_heatmap: write failed for " + path);
}

} // namespace hinfland
