/*
 * Copyright 2026 The wfad Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wfad/backend.hpp"

#include <fstream>

#include "wfad/adapter.hpp"
#include "wfad/baseline.hpp"
#include "wfad/icl.hpp"
#include "wfad/mock_backend.hpp"
#include "wfad/rng.hpp"

namespace wfad {

std::vector<Prediction> ClassifierBackend::predict_batch(
    std::span<const Sentence> sentences) const {
  std::vector<Prediction> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) out.push_back(predict(s));
  return out;
}

std::unique_ptr<ClassifierBackend> ClassifierBackend::clone() const {
  return backend_from_container(model_container(*this));
}

nlohmann::json model_container(const ClassifierBackend& backend) {
  return {{"format", kModelFormatId},
          {"format_version", kModelFormatVersion},
          {"kind", backend.kind()},
          {"schema_hash", backend.schema_digest()},
          {"params", backend.to_model_json()}};
}

std::unique_ptr<ClassifierBackend> backend_from_container(const nlohmann::json& container) {
  std::string format;
  int version = -1;
  std::string kind;
  nlohmann::json params;
  try {
    format = container.at("format").get<std::string>();
    version = container.at("format_version").get<int>();
    kind = container.at("kind").get<std::string>();
    params = container.at("params");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::artifact, std::string("model container is malformed: ") + e.what());
  }
  if (format != kModelFormatId)
    throw Error(ErrorKind::artifact, "not a model container (format '" + format + "')");
  if (version != kModelFormatVersion)
    throw Error(ErrorKind::artifact, "unsupported model format version " +
                                         std::to_string(version) + ", expected " +
                                         std::to_string(kModelFormatVersion));
  try {
    if (kind == "mock") return MockBackend::from_model_json(params);
    if (kind == "baseline") return BaselineClassifier::from_model_json(params);
    if (kind == "sft-http") return HttpClassifierAdapter::from_model_json(params);
    if (kind == "icl") return IclClassifier::from_model_json(params);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::artifact, std::string("model parameters are corrupted: ") + e.what());
  }
  throw Error(ErrorKind::artifact, "unknown backend kind '" + kind + "'");
}

void save_model(const ClassifierBackend& backend, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::input, "cannot write model file '" + path.string() + "'");
  out << model_container(backend).dump(2) << '\n';
}

std::unique_ptr<ClassifierBackend> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, "cannot open model file '" + path.string() + "'");
  nlohmann::json container;
  try {
    in >> container;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::artifact, std::string("model file is not valid JSON: ") + e.what());
  }
  return backend_from_container(container);
}

}  // namespace wfad
