#include "hinfland/json_io.hpp"

#include "hinfland/errors.hpp"

#include <fstream>
#include <sstream>

namespace hinfland {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw Error("field " + name + " must be a nested array of numbers");
    const auto rows = j.size();
    const auto cols = j[0].size();
    if (cols == 0) throw Error("field " + name + " has empty rows");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw Error("field " + name + " has inconsistent row lengths");
        for (size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw Error("field " + name + " contains a non-numeric entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
        }
    }
    return m;
}

Json plant_to_json(const Plant& plant) {
    return Json{{"A", matrix_to_json(plant.A)},     {"B1", matrix_to_json(plant.B1)},
                {"B2", matrix_to_json(plant.B2)},   {"C1", matrix_to_json(plant.C1)},
                {"D11", matrix_to_json(plant.D11)}, {"D12", matrix_to_json(plant.D12)},
                {"C2", matrix_to_json(plant.C2)},   {"D21", matrix_to_json(plant.D21)}};
}

Plant plant_from_json(const Json& j) {
    auto get = [&](const char* name) {
        if (!j.contains(name)) throw Error(std::string("plant document is missing field ") + name);
        return matrix_from_json(j.at(name), name);
    };
    return Plant(get("A"), get("B1"), get("B2"), get("C1"), get("D11"), get("D12"), get("C2"), get("D21"));
}

Json controller_to_json(const Controller& k) {
    return Json{{"AK", matrix_to_json(k.AK())},
                {"BK", matrix_to_json(k.BK())},
                {"CK", matrix_to_json(k.CK())},
                {"DK", matrix_to_json(k.DK())}};
}

Controller controller_from_json(const Json& j) {
    auto get = [&](const char* name) {
        if (!j.contains(name)) throw Error(std::string("controller document is missing field ") + name);
        return matrix_from_json(j.at(name), name);
    };
    return Controller::from_parts(get("DK"), get("CK"), get("BK"), get("AK"));
}

Json certificate_to_json(const Certificate& cert) {
    return Json{{"gamma", cert.gamma},
                {"P", matrix_to_json(cert.P)},
                {"lambda_min_P", cert.lambda_min_P},
                {"lmi_max_eig", cert.lmi_max_eig},
                {"p12_sigma_min", cert.p12_sigma_min}};
}

Json norm_result_to_json(const NormResult& norm) {
    Json peaks = Json::array();
    for (double omega : norm.peak_omegas) {
        if (std::isinf(omega))
            peaks.push_back("inf");
        else
            peaks.push_back(omega);
    }
    return Json{{"gamma", norm.gamma},
                {"peak_omegas", peaks},
                {"rel_tol", norm.rel_tol},
                {"bracket", Json::array({norm.gamma_lo, norm.gamma_hi})}};
}

Json lifted_point_to_json(const LiftedPoint& point) {
    return Json{{"Xi", matrix_to_json(point.Xi)},  {"X", matrix_to_json(point.Z.X)},
                {"Y", matrix_to_json(point.Z.Y)},  {"M", matrix_to_json(point.Z.M)},
                {"H", matrix_to_json(point.Z.H)},  {"F", matrix_to_json(point.Z.F)},
                {"G", matrix_to_json(point.Z.G)},  {"gamma", point.Z.gamma}};
}

Json certified_triple_to_json(const CertifiedTriple& triple) {
    return Json{{"controller", controller_to_json(triple.k)},
                {"P", matrix_to_json(triple.P)},
                {"gamma", triple.gamma}};
}

Json synthesis_result_to_json(const SynthesisResult& result) {
    return Json{{"gamma_star", result.gamma_star},
                {"k_star", controller_to_json(result.k_star)},
                {"certificate", certificate_to_json(result.cert)},
                {"bracket", Json::array({result.bracket.first, result.bracket.second})},
                {"j_k_star", result.j_k_star}};
}

namespace {

Json load_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(std::string("cannot open ") + what + " file " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& err) {
        throw Error(std::string("cannot parse ") + what + " file " + path + ": " + err.what());
    }
    return j;
}

} // namespace

Plant load_plant(const std::string& path) { return plant_from_json(load_json(path, "plant")); }

Controller load_controller(const std::string& path) {
    return controller_from_json(load_json(path, "controller"));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

} // namespace hinfland
