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
#include <string>

#include <json.hpp>

#include "wfad/adapter.hpp"
#include "wfad/dataset.hpp"
#include "wfad/detect.hpp"
#include "wfad/prompt.hpp"

namespace wfad {

inline constexpr int kConfigVersion = 1;

/// One versioned configuration document drives every CLI run, so an
/// experiment is reproducible from a single file. Only adapter endpoint
/// urls may be overridden, via WFAD_CLASSIFY_ENDPOINT /
/// WFAD_GENERATIVE_ENDPOINT.
struct RunConfig {
  int version = kConfigVersion;

  FeatureSchema schema;
  LoadOptions load;

  SplitRatios ratios;
  std::uint64_t split_seed = 7;
  bool stratified = true;

  TrainConfig train;
  std::string backend_kind = "baseline";  // mock | baseline | sft-http | icl-http |
                                          // icl-command | icl-mock
  nlohmann::json mock;                    // rule table for the mock backends

  AdapterEndpoint classify_endpoint;
  AdapterEndpoint generative_endpoint;

  PromptSpec prompt;
  DetectOptions detect;

  std::size_t precision_k = 0;             // 0 = number of true anomalies
  std::string unparseable_policy = "fail";  // fail | normal | anomalous
  bool reselect_per_query = false;

  std::filesystem::path output_dir = "out";
  std::string config_hash;  // FNV-1a of the config file bytes
};

RunConfig load_run_config(const std::filesystem::path& path);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash_hex(const std::filesystem::path& path);

/// Builds the configured classifier backend (fresh, untrained). The icl-*
/// kinds need the example pool to select shots from.
std::unique_ptr<ClassifierBackend> make_backend(
    const RunConfig& config, const std::vector<LabeledExample>& icl_pool = {});

}  // namespace wfad
