#pragma once

#include "hinfland/brl.hpp"
#include "hinfland/hinf_norm.hpp"
#include "hinfland/lift.hpp"
#include "hinfland/state_space.hpp"
#include "hinfland/synthesis.hpp"

#include <json.hpp>

#include <string>

namespace hinfland {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);    // row-major nested arrays
Matrix matrix_from_json(const Json& j, const std::string& name);

Json plant_to_json(const Plant& plant);              // fields A,B1,B2,C1,D11,D12,C2,D21
Plant plant_from_json(const Json& j);
Json controller_to_json(const Controller& k);        // fields AK,BK,CK,DK
Controller controller_from_json(const Json& j);

Json certificate_to_json(const Certificate& cert);
Json norm_result_to_json(const NormResult& norm);
Json lifted_point_to_json(const LiftedPoint& point);
Json certified_triple_to_json(const CertifiedTriple& triple);
Json synthesis_result_to_json(const SynthesisResult& result);

Plant load_plant(const std::string& path);
Controller load_controller(const std::string& path);
void write_text(const std::string& path, const std::string& text);

} // namespace hinfland
