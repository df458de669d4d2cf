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

#include "wfad/baseline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <set>

#include "wfad/digest.hpp"
#include "wfad/rng.hpp"

namespace wfad {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double parse_rendered(const std::string& text) {
  double out = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc())
    throw Error(ErrorKind::parse, "bad numeric clause value '" + text + "'");
  return out;
}

EpochMetrics epoch_row(int epoch, const std::vector<Label>& preds,
                       const std::vector<Label>& truth) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bool pa = preds[i] == Label::anomalous;
    bool ta = truth[i] == Label::anomalous;
    if (pa && ta) ++tp;
    else if (pa && !ta) ++fp;
    else if (!pa && ta) ++fn;
    else ++tn;
  }
  EpochMetrics row;
  row.epoch = epoch;
  std::size_t n = preds.size();
  row.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
  row.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  row.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  row.f1 = (row.precision + row.recall) > 0
               ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
               : 0.0;
  return row;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::config, "epochs must be >= 1");
  if (learning_rate <= 0) throw Error(ErrorKind::config, "learning rate must be positive");
  if (l2 < 0) throw Error(ErrorKind::config, "l2 must be non-negative");
  if (hidden_units < 0) throw Error(ErrorKind::config, "hidden_units must be >= 0");
  if (debias_copies < 0 && debias_copies != kAutoDebiasCopies)
    throw Error(ErrorKind::config, "debias copies must be >= 0 (or auto)");
  if (adapter.lora_dropout < 0.0 || adapter.lora_dropout >= 1.0)
    throw Error(ErrorKind::config, "lora dropout must be in [0,1)");
  if (adapter.lora_rank < 1 || adapter.lora_scaling < 1)
    throw Error(ErrorKind::config, "lora rank and scaling must be >= 1");
}

const char* freeze_policy_name(FreezePolicy policy) {
  return policy == FreezePolicy::all_parameters ? "all-parameters" : "head-only";
}

FreezePolicy parse_freeze_policy(const std::string& name) {
  if (name == "all-parameters" || name == "all") return FreezePolicy::all_parameters;
  if (name == "head-only" || name == "head") return FreezePolicy::head_only;
  throw Error(ErrorKind::config, "unknown freeze policy '" + name + "'");
}

std::vector<double> BaselineClassifier::featurize(const std::string& text) const {
  std::vector<double> x(feature_names_.size(), 0.0);
  if (text.empty()) return x;  // all-missing imputes to the standardized mean
  for (const auto& [name, value] : parse_clauses(text)) {
    auto it = std::lower_bound(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end() || *it != name) continue;  // unseen feature
    std::size_t k = static_cast<std::size_t>(it - feature_names_.begin());
    x[k] = (parse_rendered(value) - feature_mean_[k]) / feature_scale_[k];
  }
  return x;
}

double BaselineClassifier::forward(const std::vector<double>& x) const {
  const std::size_t d = feature_names_.size();
  double logit = head_bias_;
  if (hidden_units_ > 0) {
    for (int j = 0; j < hidden_units_; ++j) {
      double z = encoder_bias_[j];
      const double* row = encoder_weight_.data() + static_cast<std::size_t>(j) * d;
      for (std::size_t k = 0; k < d; ++k) z += row[k] * x[k];
      logit += head_weight_[j] * std::tanh(z);
    }
  } else {
    for (std::size_t k = 0; k < d; ++k) logit += head_weight_[k] * x[k];
  }
  return sigmoid(logit);
}

void BaselineClassifier::initialize(const std::vector<LabeledExample>& train,
                                    const TrainConfig& config) {
  std::set<std::string> vocab;
  for (const LabeledExample& ex : train)
    for (const auto& [name, value] : parse_clauses(ex.sentence.text)) vocab.insert(name);
  if (vocab.empty())
    throw Error(ErrorKind::degenerate_data, "no feature clauses in the training sentences");

  feature_names_.assign(vocab.begin(), vocab.end());
  const std::size_t d = feature_names_.size();

  feature_mean_.assign(d, 0.0);
  feature_scale_.assign(d, 1.0);
  std::vector<double> sums(d, 0.0), sq(d, 0.0);
  std::vector<std::size_t> counts(d, 0);
  for (const LabeledExample& ex : train) {
    for (const auto& [name, value] : parse_clauses(ex.sentence.text)) {
      auto it = std::lower_bound(feature_names_.begin(), feature_names_.end(), name);
      std::size_t k = static_cast<std::size_t>(it - feature_names_.begin());
      double v = parse_rendered(value);
      sums[k] += v;
      sq[k] += v * v;
      ++counts[k];
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (counts[k] == 0) continue;
    feature_mean_[k] = sums[k] / static_cast<double>(counts[k]);
    double var = sq[k] / static_cast<double>(counts[k]) - feature_mean_[k] * feature_mean_[k];
    feature_scale_[k] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }

  hidden_units_ = config.hidden_units;
  std::mt19937_64 rng(config.seed);
  auto draw = [&rng](double scale) { return (2.0 * unit_draw(rng) - 1.0) * scale; };

  if (hidden_units_ > 0) {
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
    encoder_weight_.resize(static_cast<std::size_t>(hidden_units_) * d);
    for (double& w : encoder_weight_) w = draw(in_scale);
    encoder_bias_.assign(hidden_units_, 0.0);
    const double head_scale = 1.0 / std::sqrt(static_cast<double>(hidden_units_));
    head_weight_.resize(hidden_units_);
    for (double& w : head_weight_) w = draw(head_scale);
  } else {
    encoder_weight_.clear();
    encoder_bias_.clear();
    head_weight_.assign(d, 0.0);
  }
  head_bias_ = 0.0;
}

TrainReport BaselineClassifier::fit(const std::vector<LabeledExample>& train,
                                    const std::vector<LabeledExample>& val,
                                    const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::input, "training set is empty");
  SplitStats stats = compute_stats(train);
  if (stats.count_normal == 0 || stats.count_anomalous == 0)
    throw Error(ErrorKind::degenerate_data, "training set contains a single class");

  const auto start = std::chrono::steady_clock::now();

  TrainReport report;
  const bool fresh = !fitted_;
  if (fresh) initialize(train, config);

  const bool train_body = config.freeze == FreezePolicy::all_parameters;
  const std::size_t d = feature_names_.size();
  const std::size_t h = static_cast<std::size_t>(hidden_units_);
  const std::size_t n = train.size();

  if (train_body) {
    report.touched_parameters = fresh
        ? std::vector<std::string>{"standardizer", "encoder", "head"}
        : std::vector<std::string>{"encoder", "head"};
    if (h == 0) {
      report.touched_parameters.erase(
          std::remove(report.touched_parameters.begin(), report.touched_parameters.end(),
                      std::string("encoder")),
          report.touched_parameters.end());
    }
    report.trainable_parameters =
        static_cast<long>((fresh ? 2 * d : 0) + h * d + h + head_weight_.size() + 1);
  } else {
    report.touched_parameters = {"head"};
    report.trainable_parameters = static_cast<long>(head_weight_.size() + 1);
  }

  std::vector<std::vector<double>> inputs;
  inputs.reserve(n);
  std::vector<double> targets(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    inputs.push_back(featurize(train[i].sentence.text));
    targets[i] = train[i].label == Label::anomalous ? 1.0 : 0.0;
  }

  // With a frozen encoder the hidden activations never change, so compute
  // them once; this is also what makes head-only training measurably
  // cheaper per epoch.
  std::vector<std::vector<double>> frozen_hidden;
  if (!train_body && h > 0) {
    frozen_hidden.reserve(n);
    for (const std::vector<double>& x : inputs) {
      std::vector<double> a(h);
      for (std::size_t j = 0; j < h; ++j) {
        double z = encoder_bias_[j];
        const double* row = encoder_weight_.data() + j * d;
        for (std::size_t k = 0; k < d; ++k) z += row[k] * x[k];
        a[j] = std::tanh(z);
      }
      frozen_hidden.push_back(std::move(a));
    }
  }

  std::vector<Label> val_truth;
  val_truth.reserve(val.size());
  for (const LabeledExample& ex : val) val_truth.push_back(ex.label);

  double best_accuracy = -1.0;
  nlohmann::json best_params;

  fitted_ = true;
  const double lr = config.learning_rate;
  const double lambda = config.l2;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<double> grad_head(head_weight_.size(), 0.0);
    double grad_head_bias = 0.0;
    std::vector<double> grad_enc_w, grad_enc_b;
    if (train_body && h > 0) {
      grad_enc_w.assign(h * d, 0.0);
      grad_enc_b.assign(h, 0.0);
    }

    std::vector<double> hidden(h);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double>& x = inputs[i];
      double logit = head_bias_;
      const double* act = nullptr;
      if (h > 0) {
        if (!train_body) {
          act = frozen_hidden[i].data();
        } else {
          for (std::size_t j = 0; j < h; ++j) {
            double z = encoder_bias_[j];
            const double* row = encoder_weight_.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) z += row[k] * x[k];
            hidden[j] = std::tanh(z);
          }
          act = hidden.data();
        }
        for (std::size_t j = 0; j < h; ++j) logit += head_weight_[j] * act[j];
      } else {
        for (std::size_t k = 0; k < d; ++k) logit += head_weight_[k] * x[k];
      }

      double g = (sigmoid(logit) - targets[i]) / static_cast<double>(n);
      grad_head_bias += g;
      if (h > 0) {
        for (std::size_t j = 0; j < h; ++j) {
          grad_head[j] += g * act[j];
          if (train_body) {
            double dz = g * head_weight_[j] * (1.0 - act[j] * act[j]);
            grad_enc_b[j] += dz;
            double* grow = grad_enc_w.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) grow[k] += dz * x[k];
          }
        }
      } else {
        for (std::size_t k = 0; k < d; ++k) grad_head[k] += g * x[k];
      }
    }

    for (std::size_t j = 0; j < head_weight_.size(); ++j)
      head_weight_[j] -= lr * (grad_head[j] + lambda * head_weight_[j]);
    head_bias_ -= lr * grad_head_bias;
    if (train_body && h > 0) {
      for (std::size_t j = 0; j < h * d; ++j)
        encoder_weight_[j] -= lr * (grad_enc_w[j] + lambda * encoder_weight_[j]);
      for (std::size_t j = 0; j < h; ++j) encoder_bias_[j] -= lr * grad_enc_b[j];
    }

    if (!val.empty()) {
      std::vector<Label> preds;
      preds.reserve(val.size());
      for (const LabeledExample& ex : val) {
        double p = forward(featurize(ex.sentence.text));
        preds.push_back(p > 0.5 ? Label::anomalous : Label::normal);
      }
      EpochMetrics row = epoch_row(epoch, preds, val_truth);
      report.epochs.push_back(row);
      if (row.accuracy > best_accuracy) {
        best_accuracy = row.accuracy;
        report.best_epoch = epoch;
        if (config.keep_best_epoch) best_params = to_model_json();
      }
    } else {
      EpochMetrics row;
      row.epoch = epoch;
      report.epochs.push_back(row);
    }
  }

  if (config.keep_best_epoch && !best_params.is_null()) load_params(best_params);

  report.epochs_trained = config.epochs;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double BaselineClassifier::anomaly_probability(const Sentence& sentence) const {
  if (!fitted_) throw Error(ErrorKind::state, "baseline backend is not fitted");
  return forward(featurize(sentence.text));
}

Prediction BaselineClassifier::predict(const Sentence& sentence) const {
  double p = anomaly_probability(sentence);
  Prediction pred;
  if (stochastic_) {
    std::lock_guard<std::mutex> lock(rng_mutex_);
    bool anomalous = unit_draw(rng_) < p;
    pred.label = anomalous ? Label::anomalous : Label::normal;
    pred.score = anomalous ? p : 1.0 - p;
  } else {
    pred.label = p > 0.5 ? Label::anomalous : Label::normal;
    pred.score = std::max(p, 1.0 - p);
  }
  return pred;
}

bool BaselineClassifier::set_sampling(bool enabled, std::uint64_t seed) {
  std::lock_guard<std::mutex> lock(rng_mutex_);
  stochastic_ = enabled;
  rng_.seed(seed);
  return true;
}

std::string BaselineClassifier::schema_digest() const {
  std::uint64_t h = kFnvOffset;
  for (const std::string& name : feature_names_) {
    h = fnv1a64(name.data(), name.size(), h);
    h = fnv1a64("\n", 1, h);
  }
  return hex64(h);
}

std::string BaselineClassifier::parameter_digest(const std::string& group) const {
  std::uint64_t h = kFnvOffset;
  auto mix = [&h](const std::vector<double>& v) {
    h = fnv1a64(v.data(), v.size() * sizeof(double), h);
  };
  if (group == "standardizer") {
    mix(feature_mean_);
    mix(feature_scale_);
  } else if (group == "encoder") {
    mix(encoder_weight_);
    mix(encoder_bias_);
  } else if (group == "head") {
    mix(head_weight_);
    h = fnv1a64(&head_bias_, sizeof head_bias_, h);
  } else {
    throw Error(ErrorKind::input, "unknown parameter group '" + group + "'");
  }
  return hex64(h);
}

nlohmann::json BaselineClassifier::to_model_json() const {
  return {{"fitted", fitted_},
          {"hidden_units", hidden_units_},
          {"feature_names", feature_names_},
          {"feature_mean", feature_mean_},
          {"feature_scale", feature_scale_},
          {"encoder_weight", encoder_weight_},
          {"encoder_bias", encoder_bias_},
          {"head_weight", head_weight_},
          {"head_bias", head_bias_}};
}

void BaselineClassifier::load_params(const nlohmann::json& params) {
  fitted_ = params.at("fitted").get<bool>();
  hidden_units_ = params.at("hidden_units").get<int>();
  feature_names_ = params.at("feature_names").get<std::vector<std::string>>();
  feature_mean_ = params.at("feature_mean").get<std::vector<double>>();
  feature_scale_ = params.at("feature_scale").get<std::vector<double>>();
  encoder_weight_ = params.at("encoder_weight").get<std::vector<double>>();
  encoder_bias_ = params.at("encoder_bias").get<std::vector<double>>();
  head_weight_ = params.at("head_weight").get<std::vector<double>>();
  head_bias_ = params.at("head_bias").get<double>();
  const std::size_t d = feature_names_.size();
  if (feature_mean_.size() != d || feature_scale_.size() != d)
    throw Error(ErrorKind::artifact, "baseline parameter shapes are inconsistent");
}

std::unique_ptr<BaselineClassifier> BaselineClassifier::from_model_json(
    const nlohmann::json& params) {
  auto out = std::make_unique<BaselineClassifier>();
  out->load_params(params);
  return out;
}

}  // namespace wfad
