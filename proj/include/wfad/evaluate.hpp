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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wfad/backend.hpp"
#include "wfad/dataset.hpp"

namespace wfad {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct RankingMetrics {
  double roc_auc = 0.0;
  double average_precision = 0.0;
  double precision_at_k = 0.0;
  std::size_t k = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  bool degenerate_precision = false;  // no positive predictions at all
  std::size_t n = 0;
  std::optional<RankingMetrics> ranking;
};

/// Standard binary metrics with anomalous as the positive class. Zero
/// positive predictions report precision 0 with the degenerate flag set
/// instead of raising, so epoch curves never abort.
EvalReport classification_metrics(const std::vector<Label>& predictions,
                                  const std::vector<Label>& truth);

/// Rank metrics over anomaly scores (higher = more anomalous).
/// ROC-AUC is the probability that a random anomalous item outranks a
/// random normal one, ties counting one half. AP and precision@k rank by
/// descending score with ties broken by input position; k defaults to the
/// number of true anomalies.
RankingMetrics ranking_metrics(const std::vector<double>& scores,
                               const std::vector<Label>& truth,
                               std::optional<std::size_t> k = {});

struct BiasProbeReport {
  int runs = 0;
  std::vector<Prediction> predictions;  // one per run
  std::size_t count_normal = 0;
  std::size_t count_anomalous = 0;
  double gap = 0.0;  // |freq(normal) - freq(anomalous)| in [0,1]
};

/// Classifies the empty sentence `runs` times, in stochastic mode when the
/// backend has one, and reports the label-frequency gap.
BiasProbeReport bias_probe(ClassifierBackend& backend, int runs, std::uint64_t seed = 17);

struct TransferDataset {
  std::string id;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

struct TransferMatrix {
  std::vector<std::string> dataset_ids;
  std::vector<std::vector<double>> cells;  // accuracy; valid where ok
  std::vector<std::vector<bool>> ok;
  std::vector<std::string> row_errors;  // empty when the row trained fine
};

/// Produces a fresh backend for one matrix row (the row index lets
/// prompt-based backends draw their shots from that row's train split).
using BackendFactory = std::function<std::unique_ptr<ClassifierBackend>(std::size_t row)>;

/// Cell (i, j) = accuracy of a fresh backend trained on dataset i's train
/// split and evaluated on dataset j's test split. A factory or fit failure
/// marks the whole row with error cells and moves on.
TransferMatrix transfer_matrix(const std::vector<TransferDataset>& datasets,
                               const BackendFactory& factory, const TrainConfig& config);

struct TransferCurvePoint {
  double portion = 0.0;
  double accuracy = 0.0;
  std::vector<std::string> touched_parameters;
};

/// Trains on the source dataset, then continues training on growing
/// prefixes of the target train split (one independently continued run per
/// portion), evaluating each on the target test split. Portion 0 is the
/// pure-transfer point. The continuation honors config.freeze.
std::vector<TransferCurvePoint> incremental_transfer(const TransferDataset& source,
                                                     const TransferDataset& target,
                                                     const BackendFactory& factory,
                                                     const TrainConfig& config,
                                                     const std::vector<double>& portions);

double accuracy_on(const ClassifierBackend& backend,
                   const std::vector<LabeledExample>& examples);

}  // namespace wfad
