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

#include <filesystem>

#include <json.hpp>

#include "wfad/detect.hpp"
#include "wfad/evaluate.hpp"

namespace wfad {

// Report documents are JSON with lexicographically ordered keys, so a rerun
// with identical inputs and seeds produces identical bytes. Timing never
// goes into a report file; the CLI keeps it in a sidecar log.

nlohmann::json eval_report_json(const EvalReport& report);
nlohmann::json train_report_json(const TrainReport& report);
nlohmann::json bias_probe_json(const BiasProbeReport& report);
nlohmann::json transfer_matrix_json(const TransferMatrix& matrix);
nlohmann::json transfer_curve_json(const std::vector<TransferCurvePoint>& curve);
nlohmann::json detection_trace_json(const DetectionTrace& trace);
nlohmann::json early_stats_json(const EarlyDetectionStats& stats);
nlohmann::json split_stats_json(const DatasetSplit& split);

/// Writes `body` under {"config_hash": ..., "report": body} with a stable
/// key order and a trailing newline.
void write_report(const nlohmann::json& body, const std::string& config_hash,
                  const std::filesystem::path& path);

}  // namespace wfad
