#pragma once

// JSON binding of the model, baseline and search configurations. Parsing
// accepts partial documents (missing keys keep their defaults) and rejects
// unknown keys.

#include "json.hpp"

#include "hlsforge/baselines.hpp"
#include "hlsforge/dse.hpp"
#include "hlsforge/gan.hpp"
#include "hlsforge/vae.hpp"

namespace hlsforge {

void to_json(nlohmann::json& j, const MlpVaeConfig& c);
void from_json(const nlohmann::json& j, MlpVaeConfig& c);
void to_json(nlohmann::json& j, const DcganConfig& c);
void from_json(const nlohmann::json& j, DcganConfig& c);
void to_json(nlohmann::json& j, const AbcConfig& c);
void from_json(const nlohmann::json& j, AbcConfig& c);

}  // namespace hlsforge

namespace hlsforge::dse {

void to_json(nlohmann::json& j, const GaConfig& c);
void from_json(const nlohmann::json& j, GaConfig& c);

}  // namespace hlsforge::dse
