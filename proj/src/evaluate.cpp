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

#include "wfad/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wfad {

EvalReport classification_metrics(const std::vector<Label>& predictions,
                                  const std::vector<Label>& truth) {
  if (predictions.size() != truth.size())
    throw Error(ErrorKind::input, "predictions and truth have different lengths");
  if (predictions.empty())
    throw Error(ErrorKind::input, "cannot compute metrics over zero examples");

  EvalReport report;
  report.n = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool predicted_anomalous = predictions[i] == Label::anomalous;
    bool truly_anomalous = truth[i] == Label::anomalous;
    if (predicted_anomalous && truly_anomalous) ++report.counts.tp;
    else if (predicted_anomalous && !truly_anomalous) ++report.counts.fp;
    else if (!predicted_anomalous && truly_anomalous) ++report.counts.fn;
    else ++report.counts.tn;
  }

  const auto& c = report.counts;
  report.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(report.n);
  if (c.tp + c.fp == 0) {
    report.precision = 0.0;
    report.degenerate_precision = true;
  } else {
    report.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  report.recall =
      (c.tp + c.fn) == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  report.f1 = (report.precision + report.recall) > 0
                  ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                  : 0.0;
  return report;
}

RankingMetrics ranking_metrics(const std::vector<double>& scores,
                               const std::vector<Label>& truth,
                               std::optional<std::size_t> k) {
  if (scores.size() != truth.size())
    throw Error(ErrorKind::input, "scores and truth have different lengths");
  if (scores.empty()) throw Error(ErrorKind::input, "cannot rank zero examples");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(ErrorKind::input, "scores must be finite");

  std::size_t positives = 0;
  for (Label l : truth)
    if (l == Label::anomalous) ++positives;
  std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0)
    throw Error(ErrorKind::undefined_metric,
                "ranking metrics need both classes in the truth labels");

  RankingMetrics out;
  out.k = k.value_or(positives);
  if (out.k == 0 || out.k > scores.size())
    throw Error(ErrorKind::bounds, "precision@k needs 1 <= k <= N");

  // ROC-AUC via average ranks, which matches pair counting with half
  // credit for ties.
  std::vector<std::size_t> by_score(scores.size());
  std::iota(by_score.begin(), by_score.end(), 0);
  std::sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < by_score.size();) {
    std::size_t j = i;
    while (j < by_score.size() && scores[by_score[j]] == scores[by_score[i]]) ++j;
    double average_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (truth[by_score[t]] == Label::anomalous) positive_rank_sum += average_rank;
    i = j;
  }
  double p = static_cast<double>(positives);
  out.roc_auc = (positive_rank_sum - p * (p + 1.0) / 2.0) /
                (p * static_cast<double>(negatives));

  // AP and precision@k rank by descending score, ties by input position.
  std::vector<std::size_t> ranked(scores.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (truth[ranked[r]] == Label::anomalous) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  out.average_precision = ap / p;

  std::size_t top_hits = 0;
  for (std::size_t r = 0; r < out.k; ++r)
    if (truth[ranked[r]] == Label::anomalous) ++top_hits;
  out.precision_at_k = static_cast<double>(top_hits) / static_cast<double>(out.k);
  return out;
}

BiasProbeReport bias_probe(ClassifierBackend& backend, int runs, std::uint64_t seed) {
  if (runs < 1) throw Error(ErrorKind::input, "bias probe needs at least one run");

  BiasProbeReport report;
  report.runs = runs;
  report.predictions.reserve(static_cast<std::size_t>(runs));

  Sentence empty;
  empty.job_id = "bias-probe";

  bool sampling = backend.set_sampling(true, seed);
  try {
    for (int i = 0; i < runs; ++i) {
      Prediction pred = backend.predict(empty);
      if (pred.label == Label::normal)
        ++report.count_normal;
      else
        ++report.count_anomalous;
      report.predictions.push_back(std::move(pred));
    }
  } catch (const Error& e) {
    if (sampling) backend.set_sampling(false, seed);
    throw Error(ErrorKind::probe, std::string("backend rejected the empty sentence: ") +
                                      e.what());
  }
  if (sampling) backend.set_sampling(false, seed);

  report.gap = std::abs(static_cast<double>(report.count_normal) -
                        static_cast<double>(report.count_anomalous)) /
               static_cast<double>(runs);
  return report;
}

double accuracy_on(const ClassifierBackend& backend,
                   const std::vector<LabeledExample>& examples) {
  if (examples.empty()) throw Error(ErrorKind::input, "cannot evaluate zero examples");
  std::vector<Sentence> sentences;
  sentences.reserve(examples.size());
  for (const LabeledExample& ex : examples) sentences.push_back(ex.sentence);
  std::vector<Prediction> preds = backend.predict_batch(sentences);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (preds[i].label == examples[i].label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

TransferMatrix transfer_matrix(const std::vector<TransferDataset>& datasets,
                               const BackendFactory& factory, const TrainConfig& config) {
  if (datasets.size() < 2)
    throw Error(ErrorKind::input, "transfer matrix needs at least two datasets");

  TransferMatrix matrix;
  for (const TransferDataset& d : datasets) matrix.dataset_ids.push_back(d.id);
  const std::size_t n = datasets.size();
  matrix.cells.assign(n, std::vector<double>(n, 0.0));
  matrix.ok.assign(n, std::vector<bool>(n, false));
  matrix.row_errors.assign(n, "");

  for (std::size_t i = 0; i < n; ++i) {
    std::unique_ptr<ClassifierBackend> backend;
    try {
      backend = factory(i);
      if (!backend) throw Error(ErrorKind::state, "backend factory returned null");
      backend->fit(datasets[i].train, {}, config);
    } catch (const std::exception& e) {
      matrix.row_errors[i] = e.what();
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      matrix.cells[i][j] = accuracy_on(*backend, datasets[j].test);
      matrix.ok[i][j] = true;
    }
  }
  return matrix;
}

std::vector<TransferCurvePoint> incremental_transfer(const TransferDataset& source,
                                                     const TransferDataset& target,
                                                     const BackendFactory& factory,
                                                     const TrainConfig& config,
                                                     const std::vector<double>& portions) {
  if (portions.empty()) throw Error(ErrorKind::config, "portion schedule is empty");
  for (std::size_t i = 0; i < portions.size(); ++i) {
    if (portions[i] < 0.0 || portions[i] > 1.0)
      throw Error(ErrorKind::config, "portions must lie in [0,1]");
    if (i > 0 && portions[i] <= portions[i - 1])
      throw Error(ErrorKind::config, "portion schedule must be strictly increasing");
  }

  std::unique_ptr<ClassifierBackend> base = factory(0);
  if (!base) throw Error(ErrorKind::state, "backend factory returned null");
  TrainConfig source_config = config;
  source_config.freeze = FreezePolicy::all_parameters;
  base->fit(source.train, {}, source_config);

  std::vector<TransferCurvePoint> curve;
  for (double portion : portions) {
    TransferCurvePoint point;
    point.portion = portion;
    std::unique_ptr<ClassifierBackend> continued = base->clone();
    std::size_t take = static_cast<std::size_t>(
        std::floor(portion * static_cast<double>(target.train.size())));
    if (take > 0) {
      std::vector<LabeledExample> slice(target.train.begin(),
                                        target.train.begin() + static_cast<long>(take));
      TrainReport report = continued->fit(slice, {}, config);
      point.touched_parameters = report.touched_parameters;
    }
    point.accuracy = accuracy_on(*continued, target.test);
    curve.push_back(std::move(point));
  }
  return curve;
}

}  // namespace wfad
