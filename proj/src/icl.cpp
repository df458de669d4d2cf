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

#include "wfad/icl.hpp"

#include "wfad/adapter.hpp"
#include "wfad/digest.hpp"
#include "wfad/mock_backend.hpp"

namespace wfad {

IclClassifier::IclClassifier(std::unique_ptr<GenerativeBackend> generative, PromptSpec spec,
                             std::vector<LabeledExample> examples)
    : generative_(std::move(generative)),
      spec_(std::move(spec)),
      examples_(std::move(examples)) {
  if (!generative_) throw Error(ErrorKind::state, "icl classifier needs a generative backend");
}

std::unique_ptr<IclClassifier> IclClassifier::with_pool(
    std::unique_ptr<GenerativeBackend> generative, PromptSpec spec,
    const std::vector<LabeledExample>& pool) {
  std::vector<LabeledExample> examples = select_examples(pool, spec);
  return std::make_unique<IclClassifier>(std::move(generative), std::move(spec),
                                         std::move(examples));
}

TrainReport IclClassifier::fit(const std::vector<LabeledExample>& train,
                               const std::vector<LabeledExample>& val,
                               const TrainConfig& config) {
  return generative_->fine_tune(train, val, config);
}

Prediction IclClassifier::predict(const Sentence& sentence) const {
  std::string prompt = build_prompt(spec_, examples_, sentence);
  std::string completion = generative_->complete(prompt);
  ParsedResponse parsed = parse_response(completion, spec_.mode, spec_.vocabulary);

  Prediction pred;
  pred.label = parsed.label;
  pred.score = 1.0;  // completions assert a category, not a calibrated probability
  pred.raw_output = completion;
  return pred;
}

bool IclClassifier::set_sampling(bool enabled, std::uint64_t seed) {
  return generative_->set_sampling(enabled, seed);
}

std::string IclClassifier::schema_digest() const {
  std::uint64_t h = kFnvOffset;
  for (const Feature& f : spec_.schema.features()) {
    h = fnv1a64(f.name.data(), f.name.size(), h);
    h = fnv1a64("\n", 1, h);
  }
  return hex64(h);
}

nlohmann::json prompt_spec_to_json(const PromptSpec& spec) {
  nlohmann::json features = nlohmann::json::array();
  for (const Feature& f : spec.schema.features())
    features.push_back({{"name", f.name}, {"kind", feature_kind_name(f.kind)}});
  return {{"schema", {{"features", features}, {"render_policy", spec.schema.render_policy()}}},
          {"policy", selection_policy_name(spec.policy)},
          {"shots", spec.shots},
          {"seed", spec.seed},
          {"mode", prompt_mode_name(spec.mode)},
          {"normal_token", spec.vocabulary.normal_token},
          {"anomalous_token", spec.vocabulary.anomalous_token},
          {"step_by_step", spec.step_by_step},
          {"order", spec.order == ExampleOrder::sampled ? "sampled" : "grouped_by_label"}};
}

PromptSpec prompt_spec_from_json(const nlohmann::json& j) {
  PromptSpec spec;
  std::vector<Feature> features;
  for (const nlohmann::json& f : j.at("schema").at("features"))
    features.push_back(
        {f.at("name").get<std::string>(), parse_feature_kind(f.value("kind", "count"))});
  spec.schema = FeatureSchema(std::move(features),
                              j.at("schema").value("render_policy", "default"));
  spec.policy = parse_selection_policy(j.value("policy", "mixed"));
  spec.shots = j.value("shots", std::size_t{0});
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.mode = parse_prompt_mode(j.value("mode", "category_only"));
  spec.vocabulary.normal_token = j.value("normal_token", "Normal");
  spec.vocabulary.anomalous_token = j.value("anomalous_token", "Abnormal");
  spec.step_by_step = j.value("step_by_step", "Let's think about it step-by-step.");
  spec.order = j.value("order", "sampled") == std::string("grouped_by_label")
                   ? ExampleOrder::grouped_by_label
                   : ExampleOrder::sampled;
  return spec;
}

nlohmann::json generative_to_json(const GenerativeBackend& backend) {
  return {{"kind", backend.kind()}, {"params", backend.to_model_json()}};
}

std::unique_ptr<GenerativeBackend> generative_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json& params = j.at("params");
  if (kind == "mock-generative") return MockGenerative::from_model_json(params);
  if (kind == "icl-http") return HttpGenerativeAdapter::from_model_json(params);
  if (kind == "icl-command") return CommandGenerativeAdapter::from_model_json(params);
  throw Error(ErrorKind::artifact, "unknown generative backend kind '" + kind + "'");
}

nlohmann::json IclClassifier::to_model_json() const {
  nlohmann::json examples = nlohmann::json::array();
  for (const LabeledExample& ex : examples_)
    examples.push_back({{"sentence", ex.sentence.text},
                        {"job_id", ex.sentence.job_id},
                        {"prefix_len", ex.sentence.prefix_len},
                        {"workflow_id", ex.workflow_id},
                        {"label", label_name(ex.label)}});
  return {{"generative", generative_to_json(*generative_)},
          {"spec", prompt_spec_to_json(spec_)},
          {"examples", examples}};
}

std::unique_ptr<IclClassifier> IclClassifier::from_model_json(const nlohmann::json& params) {
  std::vector<LabeledExample> examples;
  for (const nlohmann::json& e : params.at("examples")) {
    LabeledExample ex;
    ex.sentence.text = e.at("sentence").get<std::string>();
    ex.sentence.job_id = e.value("job_id", "");
    ex.sentence.prefix_len = e.value("prefix_len", clause_count(ex.sentence.text));
    ex.workflow_id = e.value("workflow_id", "");
    ex.label = parse_label(e.at("label").get<std::string>());
    examples.push_back(std::move(ex));
  }
  return std::make_unique<IclClassifier>(generative_from_json(params.at("generative")),
                                         prompt_spec_from_json(params.at("spec")),
                                         std::move(examples));
}

}  // namespace wfad
