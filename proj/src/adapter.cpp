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

#include "wfad/adapter.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <httplib.h>

namespace wfad {

namespace {

struct UrlParts {
  std::string scheme_host_port;  // handed to httplib::Client
  std::string base_path;         // prefix for routes, may be empty
};

UrlParts parse_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw Error(ErrorKind::config, "adapter url '" + url + "' has no scheme");
  std::size_t path = url.find('/', scheme + 3);
  UrlParts parts;
  if (path == std::string::npos) {
    parts.scheme_host_port = url;
  } else {
    parts.scheme_host_port = url.substr(0, path);
    parts.base_path = url.substr(path);
    while (!parts.base_path.empty() && parts.base_path.back() == '/')
      parts.base_path.pop_back();
  }
  return parts;
}

nlohmann::json post_json(const AdapterEndpoint& endpoint, const std::string& route,
                         const nlohmann::json& body) {
  if (endpoint.url.empty())
    throw Error(ErrorKind::config, "adapter endpoint has no url configured");
  UrlParts parts = parse_url(endpoint.url);

  const std::string payload = body.dump();
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
    httplib::Client client(parts.scheme_host_port);
    client.set_connection_timeout(endpoint.timeout_ms / 1000,
                                  (endpoint.timeout_ms % 1000) * 1000);
    client.set_read_timeout(endpoint.timeout_ms / 1000, (endpoint.timeout_ms % 1000) * 1000);

    httplib::Result res =
        client.Post(parts.base_path + route, payload, "application/json");
    if (!res) {
      last_failure = "transport failure (" + httplib::to_string(res.error()) + ")";
      continue;  // transport errors are retryable
    }
    if (res->status != 200)
      throw Error(ErrorKind::adapter, "endpoint " + endpoint.url + route +
                                          " returned HTTP " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::adapter,
                  std::string("endpoint returned malformed JSON: ") + e.what());
    }
  }
  throw Error(ErrorKind::adapter, "endpoint " + endpoint.url + route +
                                      " unreachable after " +
                                      std::to_string(endpoint.retries + 1) +
                                      " attempts: " + last_failure);
}

}  // namespace

Label canonicalize_adapter_label(const std::string& token) {
  if (token == "LABEL_0") return Label::normal;
  if (token == "LABEL_1") return Label::anomalous;
  if (auto label = try_parse_label(token)) return *label;
  throw Error(ErrorKind::adapter, "endpoint returned unknown label '" + token + "'");
}

nlohmann::json endpoint_to_json(const AdapterEndpoint& endpoint) {
  return {{"url", endpoint.url},
          {"command", endpoint.command},
          {"timeout_ms", endpoint.timeout_ms},
          {"retries", endpoint.retries},
          {"max_in_flight", endpoint.max_in_flight},
          {"deterministic", endpoint.deterministic}};
}

AdapterEndpoint endpoint_from_json(const nlohmann::json& j) {
  AdapterEndpoint endpoint;
  endpoint.url = j.value("url", "");
  endpoint.command = j.value("command", "");
  endpoint.timeout_ms = j.value("timeout_ms", 5000);
  endpoint.retries = j.value("retries", 1);
  endpoint.max_in_flight = j.value("max_in_flight", 1);
  endpoint.deterministic = j.value("deterministic", true);
  return endpoint;
}

nlohmann::json adapter_train_request(const std::vector<LabeledExample>& train,
                                     const std::vector<LabeledExample>& val,
                                     const TrainConfig& config) {
  auto examples_json = [](const std::vector<LabeledExample>& examples) {
    nlohmann::json out = nlohmann::json::array();
    for (const LabeledExample& ex : examples)
      out.push_back({{"sentence", ex.sentence.text}, {"label", label_name(ex.label)}});
    return out;
  };
  return {{"train", examples_json(train)},
          {"val", examples_json(val)},
          {"config",
           {{"epochs", config.epochs},
            {"seed", config.seed},
            {"freeze", freeze_policy_name(config.freeze)},
            {"lora_rank", config.adapter.lora_rank},
            {"lora_scaling", config.adapter.lora_scaling},
            {"lora_dropout", config.adapter.lora_dropout},
            {"quantize_4bit", config.adapter.quantize_4bit}}}};
}

TrainReport train_report_from_json(const nlohmann::json& j) {
  TrainReport report;
  if (j.contains("epochs")) {
    for (const nlohmann::json& row : j.at("epochs")) {
      EpochMetrics m;
      m.epoch = row.value("epoch", static_cast<int>(report.epochs.size() + 1));
      m.accuracy = row.value("accuracy", 0.0);
      m.precision = row.value("precision", 0.0);
      m.recall = row.value("recall", 0.0);
      m.f1 = row.value("f1", 0.0);
      report.epochs.push_back(m);
    }
  }
  report.epochs_trained = j.value("epochs_trained", static_cast<int>(report.epochs.size()));
  report.trainable_parameters = j.value("trainable_parameters", 0L);
  report.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("touched_parameters"))
    report.touched_parameters = j.at("touched_parameters").get<std::vector<std::string>>();
  double best = -1.0;
  for (const EpochMetrics& m : report.epochs) {
    if (m.accuracy > best) {
      best = m.accuracy;
      report.best_epoch = m.epoch;
    }
  }
  return report;
}

HttpClassifierAdapter::HttpClassifierAdapter(AdapterEndpoint endpoint)
    : endpoint_(std::move(endpoint)), limiter_(endpoint_.max_in_flight) {}

TrainReport HttpClassifierAdapter::fit(const std::vector<LabeledExample>& train,
                                       const std::vector<LabeledExample>& val,
                                       const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::input, "training set is empty");
  nlohmann::json response = post_json(endpoint_, "/train",
                                      adapter_train_request(train, val, config));
  return train_report_from_json(response);
}

Prediction HttpClassifierAdapter::predict(const Sentence& sentence) const {
  InFlightLimiter::Guard guard(limiter_);
  nlohmann::json response =
      post_json(endpoint_, "/classify",
                {{"sentence", sentence.text}, {"deterministic", endpoint_.deterministic}});
  Prediction pred;
  try {
    pred.label = canonicalize_adapter_label(response.at("label").get<std::string>());
    pred.score = response.value("score", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::adapter, std::string("bad classify response: ") + e.what());
  }
  if (pred.score < 0.0 || pred.score > 1.0)
    throw Error(ErrorKind::adapter, "endpoint score outside [0,1]");
  if (response.contains("raw_output"))
    pred.raw_output = response.at("raw_output").get<std::string>();
  return pred;
}

bool HttpClassifierAdapter::set_sampling(bool enabled, std::uint64_t) {
  endpoint_.deterministic = !enabled;
  return true;
}

nlohmann::json HttpClassifierAdapter::to_model_json() const {
  return {{"endpoint", endpoint_to_json(endpoint_)}};
}

std::unique_ptr<HttpClassifierAdapter> HttpClassifierAdapter::from_model_json(
    const nlohmann::json& params) {
  return std::make_unique<HttpClassifierAdapter>(endpoint_from_json(params.at("endpoint")));
}

HttpGenerativeAdapter::HttpGenerativeAdapter(AdapterEndpoint endpoint)
    : endpoint_(std::move(endpoint)), limiter_(endpoint_.max_in_flight) {}

std::string HttpGenerativeAdapter::complete(const std::string& prompt) {
  InFlightLimiter::Guard guard(limiter_);
  nlohmann::json response = post_json(
      endpoint_, "/complete", {{"prompt", prompt}, {"deterministic", endpoint_.deterministic}});
  try {
    return response.at("completion").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::adapter, std::string("bad completion response: ") + e.what());
  }
}

TrainReport HttpGenerativeAdapter::fine_tune(const std::vector<LabeledExample>& train,
                                             const std::vector<LabeledExample>& val,
                                             const TrainConfig& config) {
  config.validate();
  nlohmann::json response = post_json(endpoint_, "/train",
                                      adapter_train_request(train, val, config));
  return train_report_from_json(response);
}

bool HttpGenerativeAdapter::set_sampling(bool enabled, std::uint64_t) {
  endpoint_.deterministic = !enabled;
  return true;
}

nlohmann::json HttpGenerativeAdapter::to_model_json() const {
  return {{"endpoint", endpoint_to_json(endpoint_)}};
}

std::unique_ptr<HttpGenerativeAdapter> HttpGenerativeAdapter::from_model_json(
    const nlohmann::json& params) {
  return std::make_unique<HttpGenerativeAdapter>(endpoint_from_json(params.at("endpoint")));
}

CommandGenerativeAdapter::CommandGenerativeAdapter(AdapterEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  if (endpoint_.command.empty())
    throw Error(ErrorKind::config, "command adapter needs a command");
}

std::string CommandGenerativeAdapter::complete(const std::string& prompt) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path();
  fs::path in = dir / ("wfad-prompt-" + std::to_string(::getpid()) + ".txt");
  fs::path out = dir / ("wfad-completion-" + std::to_string(::getpid()) + ".txt");

  {
    std::ofstream f(in, std::ios::binary);
    f << prompt;
  }

  std::string shell = "WFAD_DETERMINISTIC=" +
                      std::string(endpoint_.deterministic ? "1" : "0") + " " +
                      endpoint_.command + " < '" + in.string() + "' > '" + out.string() + "'";
  int rc = std::system(shell.c_str());
  std::string completion;
  if (rc == 0) {
    std::ifstream f(out, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    completion = buf.str();
  }
  std::error_code ec;
  fs::remove(in, ec);
  fs::remove(out, ec);
  if (rc != 0)
    throw Error(ErrorKind::adapter, "command adapter exited with status " +
                                        std::to_string(rc));
  return completion;
}

nlohmann::json CommandGenerativeAdapter::to_model_json() const {
  return {{"endpoint", endpoint_to_json(endpoint_)}};
}

std::unique_ptr<CommandGenerativeAdapter> CommandGenerativeAdapter::from_model_json(
    const nlohmann::json& params) {
  return std::make_unique<CommandGenerativeAdapter>(endpoint_from_json(params.at("endpoint")));
}

}  // namespace wfad
