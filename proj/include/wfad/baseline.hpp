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

/// Desk-scale trainable classifier. Parses numeric values back out of the
/// sentence clauses, standardizes them, feeds them through a small tanh
/// encoder, and trains a logistic head with full-batch gradient descent.
///
/// Parameter groups mirror the freezing contract:
///   - "standardizer": per-feature mean/scale, fitted once at initialization
///   - "encoder":      hidden-layer weights (absent when hidden_units = 0)
///   - "head":         the linear classification layer
/// Under FreezePolicy::head_only the standardizer and encoder are left
/// byte-identical and only the head receives updates; because the encoder
/// activations are then constant, they are computed once per fit rather
/// than once per epoch.
///
/// fit on an already-fitted backend warm-starts from the current
/// parameters, which is what the incremental transfer runs rely on.
class BaselineClassifier : public ClassifierBackend {
 public:
  BaselineClassifier() = default;

  std::string kind() const override { return "baseline"; }
  bool ready() const override { return fitted_; }

  TrainReport fit(const std::vector<LabeledExample>& train,
                  const std::vector<LabeledExample>& val,
                  const TrainConfig& config) override;

  Prediction predict(const Sentence& sentence) const override;

  bool set_sampling(bool enabled, std::uint64_t seed) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<BaselineClassifier> from_model_json(const nlohmann::json& params);

  /// Digest over the learned clause vocabulary.
  std::string schema_digest() const override;

  /// Probability of the anomalous class for a sentence.
  double anomaly_probability(const Sentence& sentence) const;

  /// FNV-1a digest over the raw bytes of one parameter group
  /// ("standardizer", "encoder", or "head"); lets callers assert the
  /// freezing contract without reaching into the weights.
  std::string parameter_digest(const std::string& group) const;

  const std::vector<std::string>& feature_names() const { return feature_names_; }

 private:
  std::vector<double> featurize(const std::string& text) const;
  double forward(const std::vector<double>& x) const;
  void initialize(const std::vector<LabeledExample>& train, const TrainConfig& config);
  void load_params(const nlohmann::json& params);

  bool fitted_ = false;
  int hidden_units_ = 0;

  std::vector<std::string> feature_names_;  // sorted clause vocabulary
  std::vector<double> feature_mean_;
  std::vector<double> feature_scale_;

  // encoder: row-major [hidden][input]; empty when hidden_units_ == 0
  std::vector<double> encoder_weight_;
  std::vector<double> encoder_bias_;
  // head: one weight per encoder unit (or per input when no encoder)
  std::vector<double> head_weight_;
  double head_bias_ = 0.0;

  std::atomic<bool> stochastic_{false};
  mutable std::mt19937_64 rng_{0};
  mutable std::mutex rng_mutex_;
};

}  // namespace wfad
