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

#include "wfad/mock_backend.hpp"

#include <charconv>

#include "wfad/rng.hpp"

namespace wfad {

namespace {

double parse_rendered_value(const std::string& text) {
  double out = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc())
    throw Error(ErrorKind::parse, "bad numeric clause value '" + text + "'");
  return out;
}

bool compare(double lhs, const std::string& op, double rhs) {
  if (op == ">") return lhs > rhs;
  if (op == "<") return lhs < rhs;
  if (op == ">=") return lhs >= rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == "==") return lhs == rhs;
  throw Error(ErrorKind::config, "unknown mock rule operator '" + op + "'");
}

MockRule rule_from_json(const nlohmann::json& j) {
  MockRule rule;
  if (j.contains("contains")) {
    rule.kind = MockRule::Kind::contains;
    rule.contains = j.at("contains").get<std::string>();
  } else {
    rule.kind = MockRule::Kind::threshold;
    rule.feature = j.at("feature").get<std::string>();
    rule.op = j.value("op", ">");
    rule.value = j.at("value").get<double>();
  }
  rule.label = parse_label(j.at("label").get<std::string>());
  rule.score = j.value("score", 1.0);
  if (rule.score < 0.0 || rule.score > 1.0)
    throw Error(ErrorKind::config, "mock rule score must be in [0,1]");
  return rule;
}

nlohmann::json rule_to_json(const MockRule& rule) {
  nlohmann::json j;
  if (rule.kind == MockRule::Kind::contains) {
    j["contains"] = rule.contains;
  } else {
    j["feature"] = rule.feature;
    j["op"] = rule.op;
    j["value"] = rule.value;
  }
  j["label"] = label_name(rule.label);
  j["score"] = rule.score;
  return j;
}

}  // namespace

MockBackend::MockBackend(std::vector<MockRule> rules, double p_normal_fallback)
    : rules_(std::move(rules)), p_normal_fallback_(p_normal_fallback) {
  if (p_normal_fallback_ < 0.0 || p_normal_fallback_ > 1.0)
    throw Error(ErrorKind::config, "mock fallback probability must be in [0,1]");
}

TrainReport MockBackend::fit(const std::vector<LabeledExample>&,
                             const std::vector<LabeledExample>&, const TrainConfig&) {
  TrainReport report;
  report.epochs_trained = 0;
  report.trainable_parameters = 0;
  return report;
}

double MockBackend::anomaly_probability(const std::string& text) const {
  if (!text.empty()) {
    for (const MockRule& rule : rules_) {
      bool hit = false;
      if (rule.kind == MockRule::Kind::contains) {
        hit = text.find(rule.contains) != std::string::npos;
      } else {
        for (const auto& [name, value] : parse_clauses(text)) {
          if (name != rule.feature) continue;
          hit = compare(parse_rendered_value(value), rule.op, rule.value);
          break;
        }
      }
      if (hit) return rule.label == Label::anomalous ? rule.score : 1.0 - rule.score;
    }
  }
  return 1.0 - p_normal_fallback_;
}

Prediction MockBackend::predict(const Sentence& sentence) const {
  double p_anomalous = anomaly_probability(sentence.text);

  Prediction pred;
  if (stochastic_) {
    std::lock_guard<std::mutex> lock(rng_mutex_);
    bool anomalous = unit_draw(rng_) < p_anomalous;
    pred.label = anomalous ? Label::anomalous : Label::normal;
    pred.score = anomalous ? p_anomalous : 1.0 - p_anomalous;
  } else {
    pred.label = p_anomalous > 0.5 ? Label::anomalous : Label::normal;
    pred.score = std::max(p_anomalous, 1.0 - p_anomalous);
  }
  return pred;
}

bool MockBackend::set_sampling(bool enabled, std::uint64_t seed) {
  std::lock_guard<std::mutex> lock(rng_mutex_);
  stochastic_ = enabled;
  rng_.seed(seed);
  return true;
}

nlohmann::json MockBackend::to_model_json() const {
  nlohmann::json rules = nlohmann::json::array();
  for (const MockRule& rule : rules_) rules.push_back(rule_to_json(rule));
  return {{"rules", rules}, {"p_normal_fallback", p_normal_fallback_}};
}

std::unique_ptr<MockBackend> MockBackend::from_model_json(const nlohmann::json& params) {
  std::vector<MockRule> rules;
  for (const nlohmann::json& j : params.at("rules")) rules.push_back(rule_from_json(j));
  return std::make_unique<MockBackend>(std::move(rules),
                                       params.value("p_normal_fallback", 0.5));
}

MockGenerative::MockGenerative(std::vector<MockRule> rules, Style style,
                               std::string normal_token, std::string anomalous_token)
    : classifier_(std::move(rules)),
      style_(style),
      normal_token_(std::move(normal_token)),
      anomalous_token_(std::move(anomalous_token)) {}

std::string MockGenerative::complete(const std::string& prompt) {
  // The query is the text of the last "Instruct: ..." line.
  std::size_t instruct = prompt.rfind("Instruct: ");
  if (instruct == std::string::npos)
    throw Error(ErrorKind::adapter, "prompt has no Instruct block");
  std::size_t start = instruct + 10;
  std::size_t end = prompt.find('\n', start);
  std::string query =
      end == std::string::npos ? prompt.substr(start) : prompt.substr(start, end - start);

  Sentence sentence{query, "query", clause_count(query)};
  Prediction pred = classifier_.predict(sentence);
  const std::string& token = pred.label == Label::normal ? normal_token_ : anomalous_token_;

  switch (style_) {
    case Style::plain:
      return token;
    case Style::prefixed:
      return "Category: " + token;
    case Style::chain_of_thought:
      return "Each reported value stays close to the levels seen in the examples, "
             "so the job is " + token;
  }
  return token;
}

nlohmann::json MockGenerative::to_model_json() const {
  const char* style = style_ == Style::plain      ? "plain"
                      : style_ == Style::prefixed ? "prefixed"
                                                  : "chain_of_thought";
  return {{"classifier", classifier_.to_model_json()},
          {"style", style},
          {"normal_token", normal_token_},
          {"anomalous_token", anomalous_token_}};
}

std::unique_ptr<MockGenerative> MockGenerative::from_model_json(const nlohmann::json& params) {
  auto inner = MockBackend::from_model_json(params.at("classifier"));
  std::string style_name = params.value("style", "plain");
  Style style = style_name == "prefixed"           ? Style::prefixed
                : style_name == "chain_of_thought" ? Style::chain_of_thought
                                                   : Style::plain;
  auto out = std::make_unique<MockGenerative>(
      inner->rules(), style, params.value("normal_token", "Normal"),
      params.value("anomalous_token", "Abnormal"));
  return out;
}

}  // namespace wfad
