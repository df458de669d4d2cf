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

#include <atomic>
#include <mutex>
#include <random>

#include "wfad/backend.hpp"

namespace wfad {

/// One mock decision rule. Either a substring match on the sentence text or
/// a numeric comparison against a named clause value.
struct MockRule {
  enum class Kind { contains, threshold };
  Kind kind = Kind::contains;
  std::string contains;   // substring, when kind == contains
  std::string feature;    // clause name, when kind == threshold
  std::string op = ">";   // one of > < >= <= ==
  double value = 0.0;
  Label label = Label::anomalous;
  double score = 1.0;
};

/// Deterministic rule-table classifier. Rules are evaluated in order; the
/// first match wins. Sentences with no match (including the empty sentence)
/// fall back to a configurable normal-probability, which is where the bias
/// probe hooks in: deterministic mode reports the argmax with max(p, 1-p),
/// stochastic mode samples the label from seeded uniform draws.
class MockBackend : public ClassifierBackend {
 public:
  MockBackend() = default;
  explicit MockBackend(std::vector<MockRule> rules, double p_normal_fallback = 0.5);

  std::string kind() const override { return "mock"; }
  bool ready() const override { return true; }

  /// The mock never trains: fit is a no-op reporting zero epochs.
  TrainReport fit(const std::vector<LabeledExample>& train,
                  const std::vector<LabeledExample>& val,
                  const TrainConfig& config) override;

  Prediction predict(const Sentence& sentence) const override;

  bool set_sampling(bool enabled, std::uint64_t seed) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<MockBackend> from_model_json(const nlohmann::json& params);

  const std::vector<MockRule>& rules() const { return rules_; }
  double p_normal_fallback() const { return p_normal_fallback_; }

 private:
  double anomaly_probability(const std::string& text) const;

  std::vector<MockRule> rules_;
  double p_normal_fallback_ = 0.5;
  std::atomic<bool> stochastic_{false};
  mutable std::mt19937_64 rng_{0};
  mutable std::mutex rng_mutex_;
};

/// Scripted stand-in for a generative endpoint: extracts the query sentence
/// from the final Instruct block, classifies it with a rule table, and
/// renders the configured response style.
class MockGenerative : public GenerativeBackend {
 public:
  enum class Style { plain, prefixed, chain_of_thought };

  MockGenerative() = default;
  MockGenerative(std::vector<MockRule> rules, Style style,
                 std::string normal_token = "Normal",
                 std::string anomalous_token = "Abnormal");

  std::string kind() const override { return "mock-generative"; }
  std::string complete(const std::string& prompt) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<MockGenerative> from_model_json(const nlohmann::json& params);

 private:
  MockBackend classifier_;
  Style style_ = Style::plain;
  std::string normal_token_ = "Normal";
  std::string anomalous_token_ = "Abnormal";
};

}  // namespace wfad
