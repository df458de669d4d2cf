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

#include <iosfwd>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "wfad/backend.hpp"
#include "wfad/ingest.hpp"

namespace wfad {

struct DetectionStep {
  std::size_t prefix_len = 0;
  std::string sentence;
  Prediction prediction;
};

struct DetectionTrace {
  std::string job_id;
  std::vector<DetectionStep> steps;  // prefix_len strictly increasing by 1
  std::optional<Label> truth;
  std::vector<std::size_t> alerts;  // step positions where the alert rule fired
};

struct EarlyDetectionStats {
  // prefix position -> number of jobs first correctly classified there
  std::map<std::size_t, std::size_t> histogram;
  std::size_t undetected = 0;
  std::size_t jobs = 0;
};

struct DetectOptions {
  // strict: each feature must be the next schema position for its job;
  // skip-tolerant only requires monotone forward arrival.
  bool strict_order = true;
  // an alert record fires when this many consecutive steps are anomalous
  std::size_t alert_threshold = 1;
};

/// Feeds features as they arrive, re-serializes each growing prefix, and
/// classifies it. One logical writer per job id; distinct jobs may be
/// observed concurrently (the engine serializes backend calls).
class OnlineDetector {
 public:
  OnlineDetector(FeatureSchema schema, const ClassifierBackend& backend,
                 DetectOptions options = {});

  Prediction observe(const std::string& job_id, const std::string& feature_name,
                     double value);

  /// Seals the job and returns its trace; further observes for the id fail.
  DetectionTrace finalize(const std::string& job_id, std::optional<Label> truth = {});

  /// Open job ids in first-seen order.
  std::vector<std::string> open_jobs() const;

 private:
  struct JobState {
    JobRecord record;
    DetectionTrace trace;
    std::size_t next_position = 0;
    std::size_t consecutive_anomalous = 0;
  };

  FeatureSchema schema_;
  const ClassifierBackend* backend_;
  DetectOptions options_;
  std::map<std::string, JobState> jobs_;
  std::vector<std::string> arrival_order_;
  std::set<std::string> sealed_;
  mutable std::mutex mutex_;
};

/// First prefix position whose prediction matches the job's ground-truth
/// label, per job; jobs that are never correct count as undetected.
EarlyDetectionStats early_detection_stats(const std::vector<DetectionTrace>& traces);

struct FeatureEvent {
  std::string job_id;
  std::string feature_name;
  double value = 0.0;
};

/// Line-delimited "job_id,feature_name,value" records.
std::vector<FeatureEvent> read_events(std::istream& in);

}  // namespace wfad
