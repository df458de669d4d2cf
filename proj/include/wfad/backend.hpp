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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfad/dataset.hpp"
#include "wfad/ingest.hpp"

namespace wfad {

/// A classifier verdict. `score` is the probability assigned to the
/// returned label, so argmax backends always report >= 0.5.
struct Prediction {
  Label label = Label::normal;
  double score = 1.0;
  std::optional<std::string> raw_output;  // generative backends only
};

enum class FreezePolicy { all_parameters, head_only };

const char* freeze_policy_name(FreezePolicy policy);
FreezePolicy parse_freeze_policy(const std::string& name);

/// Pass-through settings for external adapter runtimes. Never interpreted
/// locally; defaults follow the usual rank-64 / scaling-128 / dropout-0.05
/// adapter configuration.
struct AdapterParams {
  int lora_rank = 64;
  int lora_scaling = 128;
  double lora_dropout = 0.05;
  bool quantize_4bit = true;
};

struct TrainConfig {
  int epochs = 20;
  std::uint64_t seed = 1;
  FreezePolicy freeze = FreezePolicy::all_parameters;
  // Debiasing copies appended by the training CLI; kAutoDebiasCopies means
  // 1% of the train size per label.
  int debias_copies = 0;
  static constexpr int kAutoDebiasCopies = -1;

  // Baseline knobs.
  double learning_rate = 0.5;
  double l2 = 1e-4;
  int hidden_units = 16;
  bool keep_best_epoch = false;

  AdapterParams adapter;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;     // one row per completed epoch
  int epochs_trained = 0;
  double wall_seconds = 0.0;            // kept out of report files; see cli
  long trainable_parameters = 0;
  std::vector<std::string> touched_parameters;  // descriptor of updated groups
  int best_epoch = 0;                   // 1-based; 0 when no validation rows
};

/// The classifier contract shared by the mock, the trainable baseline, and
/// the external adapters. `predict` on a ready backend is safe for
/// concurrent callers; `fit` requires exclusive ownership.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual std::string kind() const = 0;
  virtual bool ready() const = 0;

  virtual TrainReport fit(const std::vector<LabeledExample>& train,
                          const std::vector<LabeledExample>& val,
                          const TrainConfig& config) = 0;

  virtual Prediction predict(const Sentence& sentence) const = 0;

  /// Element-wise predict, order preserved.
  virtual std::vector<Prediction> predict_batch(std::span<const Sentence> sentences) const;

  /// Switches label sampling on (seeded) or off. Returns false when the
  /// backend has no stochastic mode; deterministic mode is the default.
  virtual bool set_sampling(bool enabled, std::uint64_t seed) {
    (void)enabled;
    (void)seed;
    return false;
  }

  /// Parameters under the versioned model container's "params" key.
  virtual nlohmann::json to_model_json() const = 0;

  /// Digest of the feature vocabulary the backend was built against, for
  /// the model container; empty when the backend is schema-free.
  virtual std::string schema_digest() const { return ""; }

  virtual std::unique_ptr<ClassifierBackend> clone() const;
};

/// Text-completion contract for generative runtimes driven by prompts.
class GenerativeBackend {
 public:
  virtual ~GenerativeBackend() = default;

  virtual std::string kind() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;

  /// Remote fine-tuning pass-through. Backends without one return a
  /// zero-epoch report.
  virtual TrainReport fine_tune(const std::vector<LabeledExample>& train,
                                const std::vector<LabeledExample>& val,
                                const TrainConfig& config) {
    (void)train;
    (void)val;
    (void)config;
    return {};
  }

  virtual bool set_sampling(bool enabled, std::uint64_t seed) {
    (void)enabled;
    (void)seed;
    return false;
  }

  virtual nlohmann::json to_model_json() const = 0;
};

// Model artifacts are single-file JSON containers:
//   {"format": "wfad-model", "format_version": 1, "kind": ..., "params": ...}
// Loading never partially constructs: any mismatch or corruption raises
// Error(artifact).

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatId = "wfad-model";

void save_model(const ClassifierBackend& backend, const std::filesystem::path& path);
std::unique_ptr<ClassifierBackend> load_model(const std::filesystem::path& path);

nlohmann::json model_container(const ClassifierBackend& backend);
std::unique_ptr<ClassifierBackend> backend_from_container(const nlohmann::json& container);

}  // namespace wfad
