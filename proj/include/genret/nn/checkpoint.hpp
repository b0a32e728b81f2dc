//
// Copyright (C) 2026 The genret Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include "genret/nn/tensor.hpp"

#include <json.hpp>

#include <filesystem>

namespace genret::nn {

inline constexpr int kCheckpointVersion = 1;

/// JSON container: {"format", "version", "meta", "tensors": [{name, rows, cols, data}]}.
/// Doubles are written with round-trip precision.
nlohmann::json checkpoint_to_json(const ParameterList& params, const nlohmann::json& meta);

/// Fills parameters by name and returns the stored meta object. Throws
/// LoadError on missing names, shape mismatches, or newer versions.
nlohmann::json checkpoint_from_json(const nlohmann::json& doc, const ParameterList& params);

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params,
                     const nlohmann::json& meta);

/// Reads just the meta block, so a model can be constructed before loading.
nlohmann::json read_checkpoint_meta(const std::filesystem::path& path);
nlohmann::json load_checkpoint(const std::filesystem::path& path, const ParameterList& params);

/// Parses a JSON file, turning parse failures into LoadError with the byte offset.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace genret::nn
