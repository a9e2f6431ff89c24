// Command-line surface for the hinfland library: norm evaluation, bounded-real
// certification, convex lifting round trips, descent traces, synthesis, and
// the controller-grid scan with CSV/SVG outputs.

#include "hinfland/brl.hpp"
#include "hinfland/errors.hpp"
#include "hinfland/hinf_norm.hpp"
#include "hinfland/json_io.hpp"
#include "hinfland/lift.hpp"
#include "hinfland/log.hpp"
#include "hinfland/policy_search.hpp"
#include "hinfland/scan.hpp"
#include "hinfland/state_space.hpp"
#include "hinfland/synthesis.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace hinfland;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text << std::endl;
    else
        write_text(out_path, text + "\n");
}

void emit_json(const Json& j, const std::string& out_path) { emit(j.dump(2), out_path); }

struct GridAxis {
    double lo = 0.0, hi = 0.0;
    int n = 0;
};

// Parses "aK:lo:hi:n,bK:lo:hi:n,dK:lo:hi:n" into the scan config axes.
void apply_grid_spec(const std::string& spec, ScanConfig& config) {
    std::istringstream iss(spec);
    std::string part;
    while (std::getline(iss, part, ',')) {
        std::istringstream ps(part);
        std::string name, lo, hi, n;
        if (!std::getline(ps, name, ':') || !std::getline(ps, lo, ':') || !std::getline(ps, hi, ':') ||
            !std::getline(ps, n, ':'))
            throw Error("--grid parts must look like aK:lo:hi:n");
        GridAxis axis{std::stod(lo), std::stod(hi), std::stoi(n)};
        if (name == "aK") {
            config.ak_lo = axis.lo;
            config.ak_hi = axis.hi;
            config.ak_n = axis.n;
        } else if (name == "bK") {
            config.bk_lo = axis.lo;
            config.bk_hi = axis.hi;
            config.bk_n = axis.n;
        } else if (name == "dK") {
            config.dk_lo = axis.lo;
            config.dk_hi = axis.hi;
            config.dk_n = axis.n;
        } else {
            throw Error("--grid axis must be one of aK, bK, dK (got " + name + ")");
        }
    }
}

CertifiedTriple certified_triple_at_norm(const Plant& plant, const Controller& k, double rel_tol) {
    const NondegeneracyResult nd = is_nondegenerate(plant, k, rel_tol);
    if (!nd.certificate)
        throw DomainError("no bounded-real certificate found at the computed norm level");
    return CertifiedTriple{k, nd.certificate->P, nd.certificate->gamma};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hinfland: H-infinity policy landscape toolkit"};
    app.require_subcommand(1);

    std::string plant_path, controller_path, out_path;
    double gamma = 1.0;
    double rel_tol = 1e-9;
    double eps = 1e-9;
    double eig_floor = 1e-4;
    double ck = 1.0;
    std::uint64_t seed = 0;
    int budget = 200;
    int workers = 0;

    auto add_plant = [&](CLI::App* cmd) {
        cmd->add_option("--plant", plant_path, "plant JSON file")->required();
    };
    auto add_controller = [&](CLI::App* cmd) {
        cmd->add_option("--controller", controller_path, "controller JSON file")->required();
    };
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "output file (stdout when omitted)");
    };

    CLI::App* cmd_example = app.add_subcommand("example-plant", "emit the worked-example plant as JSON");
    add_out(cmd_example);

    CLI::App* cmd_norm = app.add_subcommand("norm", "closed-loop H-infinity norm and peak frequencies");
    add_plant(cmd_norm);
    add_controller(cmd_norm);
    cmd_norm->add_option("--rel-tol", rel_tol, "relative norm tolerance")->capture_default_str();
    add_out(cmd_norm);

    CLI::App* cmd_certify = app.add_subcommand("certify", "bounded-real certificate at a given level");
    add_plant(cmd_certify);
    add_controller(cmd_certify);
    cmd_certify->add_option("--gamma", gamma, "certification level")->required();
    cmd_certify->add_option("--eps", eps, "level lift: certify at gamma/(1-eps)")->capture_default_str();
    add_out(cmd_certify);

    CLI::App* cmd_lift = app.add_subcommand("lift", "certificate at the norm level and its lifted point");
    add_plant(cmd_lift);
    add_controller(cmd_lift);
    cmd_lift->add_option("--rel-tol", rel_tol, "relative norm tolerance")->capture_default_str();
    add_out(cmd_lift);

    CLI::App* cmd_roundtrip = app.add_subcommand("roundtrip", "lifting round-trip and congruence residuals");
    add_plant(cmd_roundtrip);
    add_controller(cmd_roundtrip);
    cmd_roundtrip->add_option("--rel-tol", rel_tol, "relative norm tolerance")->capture_default_str();
    add_out(cmd_roundtrip);

    CLI::App* cmd_descend = app.add_subcommand("descend", "gradient-sampling descent trace (CSV)");
    add_plant(cmd_descend);
    add_controller(cmd_descend);
    cmd_descend->add_option("--seed", seed, "RNG seed")->capture_default_str();
    cmd_descend->add_option("--budget", budget, "iteration budget")->capture_default_str();
    cmd_descend->add_option("--workers", workers, "parallel gradient evaluations (0 = hardware)")
        ->capture_default_str();
    add_out(cmd_descend);

    CLI::App* cmd_synth = app.add_subcommand("synthesize", "reference optimum over the lifted convex set");
    add_plant(cmd_synth);
    double synth_rel_tol = 1e-4;
    cmd_synth->add_option("--rel-tol", synth_rel_tol, "relative bisection bracket width")
        ->capture_default_str();
    add_out(cmd_synth);

    CLI::App* cmd_scan = app.add_subcommand("scan", "controller-grid scan with certificates (CSV)");
    add_plant(cmd_scan);
    std::string grid_spec;
    std::string svg_dir, svg_field = "ln_abs_p12";
    cmd_scan->add_option("--grid", grid_spec, "axes as aK:lo:hi:n,bK:lo:hi:n,dK:lo:hi:n");
    cmd_scan->add_option("--ck", ck, "fixed C_K value")->capture_default_str();
    cmd_scan->add_option("--rel-tol", rel_tol, "relative norm tolerance")->capture_default_str();
    cmd_scan->add_option("--eps", eps, "certificate level lift gamma/(1-eps)")->capture_default_str();
    cmd_scan->add_option("--eig-floor", eig_floor, "required lambda_min(P)")->capture_default_str();
    cmd_scan->add_option("--workers", workers, "worker threads (0 = hardware)")->capture_default_str();
    cmd_scan->add_option("--svg-dir", svg_dir, "directory for per-slice SVG heatmaps");
    cmd_scan->add_option("--svg-field", svg_field, "field rendered in the heatmaps")->capture_default_str();
    add_out(cmd_scan);

    CLI::App* cmd_fitline = app.add_subcommand("fitline", "through-origin line fit of low-|P12| points");
    std::string in_path;
    double quantile = 0.02;
    cmd_fitline->add_option("--in", in_path, "scan CSV file")->required();
    cmd_fitline->add_option("--quantile", quantile, "low quantile of ln|P12|")->capture_default_str();
    cmd_fitline->add_option("--ck", ck, "fixed C_K value used in the scan")->capture_default_str();
    add_out(cmd_fitline);

    CLI::App* cmd_stat = app.add_subcommand("stationarity", "gradient-sampling stationarity measures");
    add_plant(cmd_stat);
    add_controller(cmd_stat);
    int n_samples = 0;
    cmd_stat->add_option("--seed", seed, "RNG seed")->capture_default_str();
    cmd_stat->add_option("--samples", n_samples, "samples per radius (0 = 2*dim+1)")->capture_default_str();
    add_out(cmd_stat);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_example->parsed()) {
            emit_json(plant_to_json(example_plant()), out_path);
        } else if (cmd_norm->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k = load_controller(controller_path);
            const NormResult norm = hinf_norm(assemble_closed_loop(plant, k), rel_tol);
            emit_json(norm_result_to_json(norm), out_path);
        } else if (cmd_certify->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k = load_controller(controller_path);
            const double level = gamma / (1.0 - eps);
            CertifyResult cert = certify_riccati(plant, k, level, 0.0);
            std::string method = "riccati";
            if (!cert) {
                cert = certify_lmi(plant, k, level);
                method = "lmi";
            }
            if (!cert) throw DomainError("infeasible: " + cert.failure);
            Json j = certificate_to_json(*cert.certificate);
            j["method"] = method;
            emit_json(j, out_path);
        } else if (cmd_lift->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k = load_controller(controller_path);
            const CertifiedTriple triple = certified_triple_at_norm(plant, k, rel_tol);
            const LiftedPoint point = phi(triple, plant);
            Json j{{"triple", certified_triple_to_json(triple)},
                   {"lifted_point", lifted_point_to_json(point)},
                   {"in_F", in_F(point.Z, plant)}};
            emit_json(j, out_path);
        } else if (cmd_roundtrip->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k = load_controller(controller_path);
            const CertifiedTriple triple = certified_triple_at_norm(plant, k, rel_tol);
            const LiftedPoint point = phi(triple, plant);
            const CertifiedTriple back = psi(point.Xi, point.Z, plant);
            const double k_residual = (back.k.block() - triple.k.block()).cwiseAbs().maxCoeff();
            const double p_residual = (back.P - triple.P).cwiseAbs().maxCoeff();
            const CongruenceReport congruence = congruence_check(triple, plant);
            Json j{{"controller_residual", k_residual},
                   {"p_residual", p_residual},
                   {"congruence_residual", congruence.congruence},
                   {"pt_identity_residual", congruence.pt_identity},
                   {"tpt_residual", congruence.tpt},
                   {"max_residual", congruence.max()}};
            emit_json(j, out_path);
        } else if (cmd_descend->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k0 = load_controller(controller_path);
            SearchParams params;
            params.workers = workers;
            const SearchTrace trace = search(plant, k0, budget, seed, params);
            std::ostringstream csv;
            csv << "iter,J,measure,step\n";
            char buf[128];
            for (size_t i = 0; i < trace.iterates.size(); ++i) {
                const auto& it = trace.iterates[i];
                std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", i, it.j, it.measure, it.step);
                csv << buf;
            }
            emit(csv.str(), out_path);
            const char* status = trace.status == SearchStatus::Converged ? "converged"
                                 : trace.status == SearchStatus::Stalled ? "stalled"
                                                                         : "budget_exhausted";
            log_info(std::string("descent status: ") + status);
        } else if (cmd_synth->parsed()) {
            const Plant plant = load_plant(plant_path);
            const SynthesisResult result = min_gamma(plant, synth_rel_tol);
            emit_json(synthesis_result_to_json(result), out_path);
        } else if (cmd_scan->parsed()) {
            const Plant plant = load_plant(plant_path);
            ScanConfig config;
            if (!grid_spec.empty()) apply_grid_spec(grid_spec, config);
            config.ck = ck;
            config.rel_tol = rel_tol;
            config.eps = eps;
            config.eig_floor = eig_floor;
            config.workers = workers;
            const auto records = run_scan(plant, config);
            if (out_path.empty())
                std::cout << to_csv(records);
            else
                write_text(out_path, to_csv(records));
            if (!svg_dir.empty()) {
                std::filesystem::create_directories(svg_dir);
                int index = 0;
                for (double dk : distinct_dk(records)) {
                    std::ostringstream name;
                    name << svg_dir << "/slice_" << index++ << ".svg";
                    emit_svg_heatmap(slice_by_dk(records, dk), svg_field, name.str());
                }
            }
        } else if (cmd_fitline->parsed()) {
            const auto records = read_csv(in_path);
            Json out = Json::array();
            for (double dk : distinct_dk(records)) {
                const auto fit = fit_degenerate_line(slice_by_dk(records, dk), ck, quantile);
                Json entry{{"d_k", dk}};
                if (fit) {
                    entry["theta"] = fit->theta;
                    entry["max_perp_dist"] = fit->max_perp_dist;
                    entry["n_low"] = fit->n_low;
                } else {
                    entry["insufficient_data"] = true;
                }
                out.push_back(entry);
            }
            emit_json(out, out_path);
        } else if (cmd_stat->parsed()) {
            const Plant plant = load_plant(plant_path);
            const Controller k = load_controller(controller_path);
            const int samples = n_samples > 0 ? n_samples : 2 * static_cast<int>(k.block().size()) + 1;
            Json out = Json::array();
            for (double scale : {1e-2, 1e-3, 1e-4}) {
                const double radius = scale * (1.0 + k.block().norm());
                out.push_back(Json{{"radius", radius},
                                   {"measure", stationarity_measure(plant, k, radius, samples, seed)}});
            }
            emit_json(out, out_path);
        }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << std::endl;
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << std::endl;
        return 1;
    }
    return 0;
}
