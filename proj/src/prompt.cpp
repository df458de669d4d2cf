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

#include "wfad/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "wfad/rng.hpp"

namespace wfad {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool ci_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Position of the last case-insensitive occurrence of `token` in `text`
/// bounded by non-word characters, or npos.
std::size_t rfind_token(const std::string& text, const std::string& token) {
  if (token.empty() || text.size() < token.size()) return std::string::npos;
  for (std::size_t start = text.size() - token.size() + 1; start-- > 0;) {
    if (!ci_equal(std::string_view(text).substr(start, token.size()), token)) continue;
    if (start > 0 && is_word_char(text[start - 1])) continue;
    std::size_t after = start + token.size();
    if (after < text.size() && is_word_char(text[after])) continue;
    return start;
  }
  return std::string::npos;
}

}  // namespace

SelectionPolicy parse_selection_policy(const std::string& name) {
  if (name == "neg_only" || name == "neg") return SelectionPolicy::neg_only;
  if (name == "pos_only" || name == "pos") return SelectionPolicy::pos_only;
  if (name == "mixed") return SelectionPolicy::mixed;
  throw Error(ErrorKind::config, "unknown selection policy '" + name + "'");
}

const char* selection_policy_name(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::neg_only: return "neg_only";
    case SelectionPolicy::pos_only: return "pos_only";
    case SelectionPolicy::mixed: return "mixed";
  }
  return "mixed";
}

PromptMode parse_prompt_mode(const std::string& name) {
  if (name == "category_only" || name == "category") return PromptMode::category_only;
  if (name == "chain_of_thought" || name == "cot") return PromptMode::chain_of_thought;
  throw Error(ErrorKind::config, "unknown prompt mode '" + name + "'");
}

const char* prompt_mode_name(PromptMode mode) {
  return mode == PromptMode::category_only ? "category_only" : "chain_of_thought";
}

std::string build_task_header(const PromptSpec& spec) {
  if (spec.schema.size() == 0)
    throw Error(ErrorKind::config, "prompt schema must list at least one feature");

  std::string header = "You are a system administration bot.\n";
  header += "Your task is to assess a job description with a couple of features into "
            "one of the following categories: ";
  header += spec.vocabulary.normal_token;
  header += " and ";
  header += spec.vocabulary.anomalous_token;
  header += "\n\n";

  if (spec.mode == PromptMode::category_only) {
    header += "You will only respond with the category.\n";
    header += "Do not include the word \"Category\".\n";
    header += "Do not provide explanations or notes.\n";
  } else {
    header += spec.step_by_step;
    header += "\n";
  }

  header += "A single job includes ";
  for (std::size_t i = 0; i < spec.schema.size(); ++i) {
    if (i > 0) header += ", ";
    header += spec.schema.at(i).name;
  }
  return header;
}

std::vector<LabeledExample> select_examples(const std::vector<LabeledExample>& pool,
                                            const PromptSpec& spec) {
  if (spec.shots == 0) return {};

  std::vector<std::size_t> normal_pool, anomalous_pool;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (pool[i].label == Label::normal ? normal_pool : anomalous_pool).push_back(i);

  std::size_t want_normal = 0, want_anomalous = 0;
  switch (spec.policy) {
    case SelectionPolicy::neg_only:
      want_normal = spec.shots;
      break;
    case SelectionPolicy::pos_only:
      want_anomalous = spec.shots;
      break;
    case SelectionPolicy::mixed:
      // Odd shot counts favor the anomalous class.
      want_anomalous = spec.shots / 2 + spec.shots % 2;
      want_normal = spec.shots / 2;
      break;
  }

  if (normal_pool.size() < want_normal || anomalous_pool.size() < want_anomalous)
    throw Error(ErrorKind::pool,
                "pool has " + std::to_string(normal_pool.size()) + " normal / " +
                    std::to_string(anomalous_pool.size()) + " anomalous examples; policy " +
                    selection_policy_name(spec.policy) + " with " +
                    std::to_string(spec.shots) + " shots needs " +
                    std::to_string(want_normal) + " / " + std::to_string(want_anomalous));

  // Anomalous indices are drawn first, then normal, from one seeded stream;
  // mixed presentation interleaves the two draw lists starting anomalous.
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> anomalous_draws =
      sample_without_replacement(anomalous_pool.size(), want_anomalous, rng);
  std::vector<std::size_t> normal_draws =
      sample_without_replacement(normal_pool.size(), want_normal, rng);

  std::vector<LabeledExample> out;
  out.reserve(spec.shots);
  if (spec.order == ExampleOrder::grouped_by_label) {
    for (std::size_t i : normal_draws) out.push_back(pool[normal_pool[i]]);
    for (std::size_t i : anomalous_draws) out.push_back(pool[anomalous_pool[i]]);
  } else {
    std::size_t a = 0, m = 0;
    while (a < anomalous_draws.size() || m < normal_draws.size()) {
      if (a < anomalous_draws.size()) out.push_back(pool[anomalous_pool[anomalous_draws[a++]]]);
      if (m < normal_draws.size()) out.push_back(pool[normal_pool[normal_draws[m++]]]);
    }
  }
  return out;
}

std::string build_prompt(const PromptSpec& spec, const std::vector<LabeledExample>& examples,
                         const Sentence& query) {
  std::string prompt = build_task_header(spec);
  prompt += "\n\n";
  for (const LabeledExample& ex : examples) {
    prompt += "Instruct: ";
    prompt += ex.sentence.text;
    prompt += "\nCategory: ";
    prompt += spec.vocabulary.token_for(ex.label);
    prompt += "\n";
  }
  prompt += "Instruct: ";
  prompt += query.text;
  prompt += "\nCategory:";
  return prompt;
}

ParsedResponse parse_response(const std::string& text, PromptMode mode,
                              const LabelVocabulary& vocabulary) {
  ParsedResponse out;

  if (mode == PromptMode::category_only) {
    std::string body = trim(text);
    const std::string prefix = "Category:";
    if (body.size() >= prefix.size() &&
        ci_equal(std::string_view(body).substr(0, prefix.size()), prefix))
      body = trim(body.substr(prefix.size()));
    while (!body.empty() && (body.back() == '.' || body.back() == '!')) body.pop_back();
    body = trim(body);
    if (ci_equal(body, vocabulary.normal_token)) {
      out.label = Label::normal;
      return out;
    }
    if (ci_equal(body, vocabulary.anomalous_token)) {
      out.label = Label::anomalous;
      return out;
    }
    throw Error(ErrorKind::unparseable,
                "response '" + text + "' is not a bare category token");
  }

  std::size_t normal_at = rfind_token(text, vocabulary.normal_token);
  std::size_t anomalous_at = rfind_token(text, vocabulary.anomalous_token);
  if (normal_at == std::string::npos && anomalous_at == std::string::npos)
    throw Error(ErrorKind::unparseable, "response contains no category token");

  std::size_t cut;
  if (anomalous_at == std::string::npos ||
      (normal_at != std::string::npos && normal_at > anomalous_at)) {
    out.label = Label::normal;
    cut = normal_at;
  } else {
    out.label = Label::anomalous;
    cut = anomalous_at;
  }
  out.rationale = trim(text.substr(0, cut));
  return out;
}

}  // namespace wfad
