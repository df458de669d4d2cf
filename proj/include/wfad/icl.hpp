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

#pragma once

#include "wfad/backend.hpp"
#include "wfad/prompt.hpp"

namespace wfad {

/// Classifier built from a generative backend and a prompt recipe: predict
/// renders the prompt around the query sentence, asks the backend for a
/// completion, and parses the category out of it. fit is the remote
/// fine-tuning pass-through of the underlying generative adapter.
class IclClassifier : public ClassifierBackend {
 public:
  IclClassifier(std::unique_ptr<GenerativeBackend> generative, PromptSpec spec,
                std::vector<LabeledExample> examples);

  /// Selects the in-context examples from `pool` under the spec's policy.
  static std::unique_ptr<IclClassifier> with_pool(
      std::unique_ptr<GenerativeBackend> generative, PromptSpec spec,
      const std::vector<LabeledExample>& pool);

  std::string kind() const override { return "icl"; }
  bool ready() const override { return generative_ != nullptr; }

  TrainReport fit(const std::vector<LabeledExample>& train,
                  const std::vector<LabeledExample>& val,
                  const TrainConfig& config) override;
  Prediction predict(const Sentence& sentence) const override;
  bool set_sampling(bool enabled, std::uint64_t seed) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<IclClassifier> from_model_json(const nlohmann::json& params);

  std::string schema_digest() const override;

  const std::vector<LabeledExample>& examples() const { return examples_; }
  const PromptSpec& spec() const { return spec_; }

 private:
  std::unique_ptr<GenerativeBackend> generative_;
  PromptSpec spec_;
  std::vector<LabeledExample> examples_;
};

nlohmann::json prompt_spec_to_json(const PromptSpec& spec);
PromptSpec prompt_spec_from_json(const nlohmann::json& j);

std::unique_ptr<GenerativeBackend> generative_from_json(const nlohmann::json& j);
nlohmann::json generative_to_json(const GenerativeBackend& backend);

}  // namespace wfad
