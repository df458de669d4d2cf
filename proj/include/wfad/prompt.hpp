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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfad/dataset.hpp"
#include "wfad/ingest.hpp"

namespace wfad {

enum class SelectionPolicy { neg_only, pos_only, mixed };
enum class PromptMode { category_only, chain_of_thought };
enum class ExampleOrder { sampled, grouped_by_label };

SelectionPolicy parse_selection_policy(const std::string& name);
const char* selection_policy_name(SelectionPolicy policy);
PromptMode parse_prompt_mode(const std::string& name);
const char* prompt_mode_name(PromptMode mode);

struct LabelVocabulary {
  std::string normal_token = "Normal";
  std::string anomalous_token = "Abnormal";

  const std::string& token_for(Label label) const {
    return label == Label::normal ? normal_token : anomalous_token;
  }
};

/// Full recipe for one in-context-learning prompt.
struct PromptSpec {
  FeatureSchema schema;
  SelectionPolicy policy = SelectionPolicy::mixed;
  std::size_t shots = 0;  // 0 = zero-shot; policy is then irrelevant
  std::uint64_t seed = 0;
  PromptMode mode = PromptMode::category_only;
  LabelVocabulary vocabulary;
  std::string step_by_step = "Let's think about it step-by-step.";
  ExampleOrder order = ExampleOrder::sampled;
};

/// Task-description block. In category_only mode it carries the
/// respond-with-the-category-only instructions; in chain_of_thought mode
/// those are replaced by the step-by-step line.
std::string build_task_header(const PromptSpec& spec);

/// Draws `shots` examples without replacement under the policy:
/// neg_only all normal, pos_only all anomalous, mixed balanced with any odd
/// extra going to the anomalous class. Presentation order is the sampled
/// order (mixed interleaves anomalous/normal draws) unless the spec asks
/// for grouping by label. Deterministic under (pool, seed).
std::vector<LabeledExample> select_examples(const std::vector<LabeledExample>& pool,
                                            const PromptSpec& spec);

/// Header, one "Instruct:/Category:" block per example, then the query as a
/// trailing block whose Category is left for the model to complete.
std::string build_prompt(const PromptSpec& spec, const std::vector<LabeledExample>& examples,
                         const Sentence& query);

struct ParsedResponse {
  Label label = Label::normal;
  std::optional<std::string> rationale;  // chain_of_thought mode only
};

/// category_only: trims, strips an optional leading "Category:", and
/// matches the vocabulary case-insensitively. chain_of_thought: the last
/// word-boundary occurrence of a vocabulary token wins and the text before
/// it becomes the rationale. Raises Error(unparseable) when no token occurs.
ParsedResponse parse_response(const std::string& text, PromptMode mode,
                              const LabelVocabulary& vocabulary = {});

}  // namespace wfad
