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

#include <condition_variable>
#include <mutex>

#include "wfad/backend.hpp"

namespace wfad {

/// Where and how to reach an external model runtime. Exactly one of url or
/// command is set; the deterministic flag is forwarded with every request.
struct AdapterEndpoint {
  std::string url;      // e.g. http://127.0.0.1:8490/v1
  std::string command;  // shell command: prompt on stdin, completion on stdout
  int timeout_ms = 5000;
  int retries = 1;  // extra attempts after a transport failure
  int max_in_flight = 1;
  bool deterministic = true;
};

/// Caps the number of simultaneous endpoint requests at max_in_flight.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : limit_(limit < 1 ? 1 : limit) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    released_.wait(lock, [this] { return active_ < limit_; });
    ++active_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      --active_;
    }
    released_.notify_one();
  }

  class Guard {
   public:
    explicit Guard(InFlightLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
    ~Guard() { limiter_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    InFlightLimiter& limiter_;
  };

 private:
  int limit_;
  int active_ = 0;
  std::mutex mutex_;
  std::condition_variable released_;
};

/// Canonicalizes adapter label vocabulary: LABEL_0 -> normal,
/// LABEL_1 -> anomalous, plus the usual label tokens.
Label canonicalize_adapter_label(const std::string& token);

/// Sequence-classification endpoint wrapper. predict posts
/// {"sentence", "deterministic"} to <url>/classify and expects
/// {"label", "score"}; fit posts the labeled examples plus the training
/// configuration (epochs, freeze policy, adapter pass-through) to
/// <url>/train and relays the returned per-epoch report.
class HttpClassifierAdapter : public ClassifierBackend {
 public:
  explicit HttpClassifierAdapter(AdapterEndpoint endpoint);

  std::string kind() const override { return "sft-http"; }
  bool ready() const override { return true; }

  TrainReport fit(const std::vector<LabeledExample>& train,
                  const std::vector<LabeledExample>& val,
                  const TrainConfig& config) override;
  Prediction predict(const Sentence& sentence) const override;
  bool set_sampling(bool enabled, std::uint64_t seed) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<HttpClassifierAdapter> from_model_json(const nlohmann::json& params);

  const AdapterEndpoint& endpoint() const { return endpoint_; }

 private:
  AdapterEndpoint endpoint_;
  mutable InFlightLimiter limiter_{1};
};

/// Text-completion endpoint wrapper: posts {"prompt", "deterministic"} to
/// <url>/complete and expects {"completion"}. fine_tune posts to <url>/train.
class HttpGenerativeAdapter : public GenerativeBackend {
 public:
  explicit HttpGenerativeAdapter(AdapterEndpoint endpoint);

  std::string kind() const override { return "icl-http"; }
  std::string complete(const std::string& prompt) override;
  TrainReport fine_tune(const std::vector<LabeledExample>& train,
                        const std::vector<LabeledExample>& val,
                        const TrainConfig& config) override;
  bool set_sampling(bool enabled, std::uint64_t seed) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<HttpGenerativeAdapter> from_model_json(const nlohmann::json& params);

 private:
  AdapterEndpoint endpoint_;
  mutable InFlightLimiter limiter_{1};
};

/// Runs a local command per completion: prompt on stdin, completion on
/// stdout, WFAD_DETERMINISTIC exported with the deterministic flag.
class CommandGenerativeAdapter : public GenerativeBackend {
 public:
  explicit CommandGenerativeAdapter(AdapterEndpoint endpoint);

  std::string kind() const override { return "icl-command"; }
  std::string complete(const std::string& prompt) override;

  nlohmann::json to_model_json() const override;
  static std::unique_ptr<CommandGenerativeAdapter> from_model_json(
      const nlohmann::json& params);

 private:
  AdapterEndpoint endpoint_;
};

nlohmann::json endpoint_to_json(const AdapterEndpoint& endpoint);
AdapterEndpoint endpoint_from_json(const nlohmann::json& j);

nlohmann::json adapter_train_request(const std::vector<LabeledExample>& train,
                                     const std::vector<LabeledExample>& val,
                                     const TrainConfig& config);
TrainReport train_report_from_json(const nlohmann::json& j);

}  // namespace wfad
