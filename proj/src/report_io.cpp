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

#include "wfad/report_io.hpp"

#include <fstream>

namespace wfad {

nlohmann::json eval_report_json(const EvalReport& report) {
  nlohmann::json j{{"accuracy", report.accuracy},
                   {"precision", report.precision},
                   {"recall", report.recall},
                   {"f1", report.f1},
                   {"degenerate_precision", report.degenerate_precision},
                   {"n", report.n},
                   {"counts",
                    {{"tp", report.counts.tp},
                     {"fp", report.counts.fp},
                     {"tn", report.counts.tn},
                     {"fn", report.counts.fn}}}};
  if (report.ranking) {
    j["ranking"] = {{"roc_auc", report.ranking->roc_auc},
                    {"average_precision", report.ranking->average_precision},
                    {"precision_at_k", report.ranking->precision_at_k},
                    {"k", report.ranking->k}};
  } else {
    j["ranking"] = nullptr;
  }
  return j;
}

nlohmann::json train_report_json(const TrainReport& report) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochMetrics& m : report.epochs)
    epochs.push_back({{"epoch", m.epoch},
                      {"accuracy", m.accuracy},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1}});
  return {{"epochs", epochs},
          {"epochs_trained", report.epochs_trained},
          {"trainable_parameters", report.trainable_parameters},
          {"touched_parameters", report.touched_parameters},
          {"best_epoch", report.best_epoch}};
}

nlohmann::json bias_probe_json(const BiasProbeReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const Prediction& p : report.predictions)
    runs.push_back({{"label", label_name(p.label)}, {"score", p.score}});
  return {{"runs", report.runs},
          {"count_normal", report.count_normal},
          {"count_anomalous", report.count_anomalous},
          {"gap", report.gap},
          {"predictions", runs}};
}

nlohmann::json transfer_matrix_json(const TransferMatrix& matrix) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < matrix.cells.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < matrix.cells[i].size(); ++j) {
      if (matrix.ok[i][j])
        row.push_back(matrix.cells[i][j]);
      else
        row.push_back(nullptr);
    }
    cells.push_back(row);
  }
  nlohmann::json errors = nlohmann::json::object();
  for (std::size_t i = 0; i < matrix.row_errors.size(); ++i)
    if (!matrix.row_errors[i].empty())
      errors[matrix.dataset_ids[i]] = matrix.row_errors[i];
  return {{"datasets", matrix.dataset_ids}, {"cells", cells}, {"errors", errors}};
}

nlohmann::json transfer_curve_json(const std::vector<TransferCurvePoint>& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const TransferCurvePoint& p : curve)
    points.push_back({{"portion", p.portion},
                      {"accuracy", p.accuracy},
                      {"touched_parameters", p.touched_parameters}});
  return {{"curve", points}};
}

nlohmann::json detection_trace_json(const DetectionTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const DetectionStep& s : trace.steps)
    steps.push_back({{"prefix_len", s.prefix_len},
                     {"sentence", s.sentence},
                     {"label", label_name(s.prediction.label)},
                     {"score", s.prediction.score}});
  nlohmann::json j{{"job_id", trace.job_id}, {"steps", steps}, {"alerts", trace.alerts}};
  if (trace.truth)
    j["truth"] = label_name(*trace.truth);
  else
    j["truth"] = nullptr;
  return j;
}

nlohmann::json early_stats_json(const EarlyDetectionStats& stats) {
  nlohmann::json histogram = nlohmann::json::object();
  for (const auto& [position, count] : stats.histogram)
    histogram[std::to_string(position)] = count;
  return {{"histogram", histogram}, {"undetected", stats.undetected}, {"jobs", stats.jobs}};
}

nlohmann::json split_stats_json(const DatasetSplit& split) {
  auto stats = [](const SplitStats& s) {
    return nlohmann::json{{"normal", s.count_normal},
                          {"anomalous", s.count_anomalous},
                          {"anomaly_fraction", s.anomaly_fraction}};
  };
  return {{"train", stats(split.train_stats)},
          {"validation", stats(split.validation_stats)},
          {"test", stats(split.test_stats)}};
}

void write_report(const nlohmann::json& body, const std::string& config_hash,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::input, "cannot write report file '" + path.string() + "'");
  nlohmann::json doc{{"config_hash", config_hash}, {"report", body}};
  out << doc.dump(2) << '\n';
}

}  // namespace wfad
