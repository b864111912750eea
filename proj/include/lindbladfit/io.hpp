// Copyright 2026 The lindbladfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON documents for models, parameters and networks.

#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "lindbladfit/field.hpp"
#include "lindbladfit/measurement.hpp"

namespace lindbladfit {

using json = nlohmann::json;

json vector_to_json(const RVector& v);
RVector vector_from_json(const json& j);

/// {family, N, geometry{positions[], pairs[]} | edges[], dissipator, R, seed}
json model_to_json(const ModelSpec& spec, std::optional<double> R = std::nullopt, std::uint64_t seed = 0);
ModelSpec model_from_json(const json& j);

/// {theta_H[], gamma[]} in the documented index order.
json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& j);

/// {widths[], layers[{w: row-major, b}]}
json mlp_to_json(const MlpParams& phi);
MlpParams mlp_from_json(const json& j);

/// {theta_H[], theta_L[], gamma[], phi?}
json params_to_json(const GeneratorParams& p);
GeneratorParams params_from_json(const json& j);

json protocol_to_json(const ProtocolConfig& p);
ProtocolConfig protocol_from_json(const json& j);

json integrator_to_json(const IntegratorConfig& c);
IntegratorConfig integrator_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace lindbladfit
