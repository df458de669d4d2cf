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

#include "wfad/detect.hpp"

#include <charconv>
#include <istream>

namespace wfad {

OnlineDetector::OnlineDetector(FeatureSchema schema, const ClassifierBackend& backend,
                               DetectOptions options)
    : schema_(std::move(schema)), backend_(&backend), options_(options) {
  if (!backend.ready())
    throw Error(ErrorKind::state, "online detector needs a ready backend");
  if (options_.alert_threshold == 0)
    throw Error(ErrorKind::config, "alert threshold must be >= 1");
}

Prediction OnlineDetector::observe(const std::string& job_id,
                                   const std::string& feature_name, double value) {
  std::lock_guard<std::mutex> lock(mutex_);

  if (sealed_.count(job_id))
    throw Error(ErrorKind::lifecycle, "job '" + job_id + "' is already finalized");

  auto position = schema_.index_of(feature_name);
  if (!position)
    throw Error(ErrorKind::input, "feature '" + feature_name + "' is not in the schema");

  auto [it, inserted] = jobs_.try_emplace(job_id);
  JobState& state = it->second;
  if (inserted) {
    state.record.job_id = job_id;
    state.trace.job_id = job_id;
    arrival_order_.push_back(job_id);
  }

  if (*position < state.next_position)
    throw Error(ErrorKind::sequencing,
                "feature '" + feature_name + "' arrived behind position " +
                    std::to_string(state.next_position) + " for job '" + job_id + "'");
  if (options_.strict_order && *position != state.next_position)
    throw Error(ErrorKind::sequencing,
                "expected schema position " + std::to_string(state.next_position) +
                    " for job '" + job_id + "', got '" + feature_name + "'");

  state.record.values[feature_name] = value;
  state.next_position = *position + 1;

  Sentence sentence = serialize(state.record, schema_, state.next_position);
  Prediction prediction = backend_->predict(sentence);

  DetectionStep step;
  step.prefix_len = sentence.prefix_len;
  step.sentence = sentence.text;
  step.prediction = prediction;
  state.trace.steps.push_back(std::move(step));

  if (prediction.label == Label::anomalous) {
    if (++state.consecutive_anomalous == options_.alert_threshold)
      state.trace.alerts.push_back(state.trace.steps.size());
  } else {
    state.consecutive_anomalous = 0;
  }
  return prediction;
}

DetectionTrace OnlineDetector::finalize(const std::string& job_id,
                                        std::optional<Label> truth) {
  std::lock_guard<std::mutex> lock(mutex_);

  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) {
    const char* why = sealed_.count(job_id) ? "' is already finalized" : "' is unknown";
    throw Error(ErrorKind::lifecycle, "job '" + job_id + why);
  }
  if (it->second.trace.steps.empty())
    throw Error(ErrorKind::lifecycle, "job '" + job_id + "' has no observed steps");

  DetectionTrace trace = std::move(it->second.trace);
  trace.truth = truth;
  jobs_.erase(it);
  sealed_.insert(job_id);
  return trace;
}

std::vector<std::string> OnlineDetector::open_jobs() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> out;
  for (const std::string& id : arrival_order_)
    if (jobs_.count(id)) out.push_back(id);
  return out;
}

EarlyDetectionStats early_detection_stats(const std::vector<DetectionTrace>& traces) {
  EarlyDetectionStats stats;
  stats.jobs = traces.size();
  for (const DetectionTrace& trace : traces) {
    if (!trace.truth)
      throw Error(ErrorKind::input, "trace '" + trace.job_id + "' has no ground-truth label");
    std::size_t first_correct = 0;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
      if (trace.steps[k].prediction.label == *trace.truth) {
        first_correct = k + 1;
        break;
      }
    }
    if (first_correct == 0)
      ++stats.undetected;
    else
      ++stats.histogram[first_correct];
  }
  return stats;
}

std::vector<FeatureEvent> read_events(std::istream& in) {
  std::vector<FeatureEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw Error(ErrorKind::parse, "event line " + std::to_string(line_no) +
                                        " is not 'job_id,feature,value'");

    FeatureEvent ev;
    ev.job_id = line.substr(0, c1);
    ev.feature_name = line.substr(c1 + 1, c2 - c1 - 1);
    std::string value = line.substr(c2 + 1);
    auto res = std::from_chars(value.data(), value.data() + value.size(), ev.value);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw Error(ErrorKind::parse,
                  "bad value '" + value + "' on event line " + std::to_string(line_no));
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace wfad
