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

#include "genret/nn/checkpoint.hpp"

#include "genret/error.hpp"

#include <fstream>
#include <unordered_map>

namespace genret::nn {

namespace {
constexpr const char* kFormat = "genret-checkpoint";
}

nlohmann::json checkpoint_to_json(const ParameterList& params, const nlohmann::json& meta) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kCheckpointVersion;
  doc["meta"] = meta;
  auto& tensors = doc["tensors"] = nlohmann::json::array();
  for (const auto* p : params) {
    tensors.push_back({{"name", p->name},
                       {"rows", p->value.rows()},
                       {"cols", p->value.cols()},
                       {"data", std::vector<double>(p->value.data(), p->value.data() + p->value.size())}});
  }
  return doc;
}

nlohmann::json checkpoint_from_json(const nlohmann::json& doc, const ParameterList& params) {
  if (!doc.is_object() || doc.value("format", "") != kFormat) throw LoadError("not a checkpoint document");
  const int version = doc.value("version", 0);
  if (version > kCheckpointVersion) {
    throw LoadError("checkpoint version " + std::to_string(version) + " is newer than supported " +
                    std::to_string(kCheckpointVersion));
  }
  std::unordered_map<std::string, const nlohmann::json*> by_name;
  for (const auto& t : doc.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;

  // Decode everything first so a bad tensor leaves the parameters untouched.
  std::vector<Tensor2> decoded;
  for (const auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw LoadError("checkpoint is missing tensor '" + p->name + "'");
    const auto& t = *it->second;
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw LoadError("tensor '" + p->name + "' has shape " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", model expects " + std::to_string(p->value.rows()) +
                      "x" + std::to_string(p->value.cols()));
    }
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw LoadError("tensor '" + p->name + "' data length does not match its shape");
    }
    decoded.emplace_back(Eigen::Map<const Tensor2>(data.data(), rows, cols));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = std::move(decoded[i]);
    params[i]->zero_grad();
  }
  return doc.value("meta", nlohmann::json::object());
}

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params,
                     const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(params, meta).dump();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path.string() + ": parse error at byte offset " + std::to_string(e.byte) + ": " +
                    e.what());
  }
}

nlohmann::json read_checkpoint_meta(const std::filesystem::path& path) {
  auto doc = read_json_file(path);
  if (!doc.is_object() || doc.value("format", "") != kFormat) throw LoadError(path.string() + ": not a checkpoint");
  return doc.value("meta", nlohmann::json::object());
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  return checkpoint_from_json(read_json_file(path), params);
}

}  // namespace genret::nn
