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

#include "wfad/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wfad/baseline.hpp"
#include "wfad/digest.hpp"
#include "wfad/icl.hpp"
#include "wfad/mock_backend.hpp"

namespace wfad {

namespace {

FeatureSchema schema_from_json(const nlohmann::json& j) {
  std::vector<Feature> features;
  for (const nlohmann::json& f : j.at("features")) {
    features.push_back(
        {f.at("name").get<std::string>(), parse_feature_kind(f.value("kind", "count"))});
  }
  return FeatureSchema(std::move(features), j.value("render_policy", "default"));
}

AdapterEndpoint endpoint_from_config(const nlohmann::json& j, const char* env_override) {
  AdapterEndpoint e = endpoint_from_json(j);
  if (const char* url = std::getenv(env_override); url && *url) e.url = url;
  return e;
}

}  // namespace

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, "cannot open '" + path.string() + "'");
  std::uint64_t h = kFnvOffset;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    if (!in) break;
  }
  return hex64(h);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::input, "cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig config;
  try {
    config.version = j.value("version", 0);
    if (config.version != kConfigVersion)
      throw Error(ErrorKind::config, "unsupported config version " +
                                         std::to_string(config.version) + ", expected " +
                                         std::to_string(kConfigVersion));

    config.schema = schema_from_json(j.at("schema"));

    if (j.contains("ingest")) {
      const nlohmann::json& g = j.at("ingest");
      std::string delim = g.value("delimiter", "auto");
      if (delim == "comma") config.load.delimiter = ',';
      else if (delim == "tab") config.load.delimiter = '\t';
      else if (delim != "auto")
        throw Error(ErrorKind::config, "delimiter must be auto, comma, or tab");
      config.load.label_column = g.value("label_column", "label");
      config.load.job_id_column = g.value("job_id_column", "job_id");
      config.load.workflow_id_column = g.value("workflow_id_column", "workflow_id");
      config.load.require_labels = g.value("require_labels", false);
      config.load.allow_extra_columns = g.value("allow_extra_columns", true);
    }

    if (j.contains("split")) {
      const nlohmann::json& s = j.at("split");
      if (s.contains("ratios")) {
        const nlohmann::json& r = s.at("ratios");
        if (!r.is_array() || r.size() != 3)
          throw Error(ErrorKind::config, "split.ratios must be [train, validation, test]");
        config.ratios = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
      }
      config.split_seed = s.value("seed", std::uint64_t{7});
      config.stratified = s.value("stratified", true);
    }

    if (j.contains("train")) {
      const nlohmann::json& t = j.at("train");
      config.train.epochs = t.value("epochs", 20);
      config.train.seed = t.value("seed", std::uint64_t{1});
      config.train.freeze = parse_freeze_policy(t.value("freeze", "all-parameters"));
      if (t.contains("debias_copies")) {
        if (t.at("debias_copies").is_string()) {
          if (t.at("debias_copies").get<std::string>() != "auto")
            throw Error(ErrorKind::config, "debias_copies must be a count or \"auto\"");
          config.train.debias_copies = TrainConfig::kAutoDebiasCopies;
        } else {
          config.train.debias_copies = t.at("debias_copies").get<int>();
        }
      }
      config.train.learning_rate = t.value("learning_rate", 0.5);
      config.train.l2 = t.value("l2", 1e-4);
      config.train.hidden_units = t.value("hidden_units", 16);
      config.train.keep_best_epoch = t.value("keep_best_epoch", false);
      if (t.contains("adapter")) {
        const nlohmann::json& a = t.at("adapter");
        config.train.adapter.lora_rank = a.value("lora_rank", 64);
        config.train.adapter.lora_scaling = a.value("lora_scaling", 128);
        config.train.adapter.lora_dropout = a.value("lora_dropout", 0.05);
        config.train.adapter.quantize_4bit = a.value("quantize_4bit", true);
      }
      config.train.validate();
    }

    config.backend_kind = j.value("backend", "baseline");
    if (j.contains("mock")) config.mock = j.at("mock");

    if (j.contains("classify_endpoint"))
      config.classify_endpoint =
          endpoint_from_config(j.at("classify_endpoint"), "WFAD_CLASSIFY_ENDPOINT");
    if (j.contains("generative_endpoint"))
      config.generative_endpoint =
          endpoint_from_config(j.at("generative_endpoint"), "WFAD_GENERATIVE_ENDPOINT");

    config.prompt.schema = config.schema;
    if (j.contains("prompt")) {
      const nlohmann::json& p = j.at("prompt");
      config.prompt.policy = parse_selection_policy(p.value("policy", "mixed"));
      config.prompt.shots = p.value("shots", std::size_t{0});
      config.prompt.seed = p.value("seed", std::uint64_t{0});
      config.prompt.mode = parse_prompt_mode(p.value("mode", "category_only"));
      config.prompt.vocabulary.normal_token = p.value("normal_token", "Normal");
      config.prompt.vocabulary.anomalous_token = p.value("anomalous_token", "Abnormal");
      config.prompt.step_by_step =
          p.value("step_by_step", "Let's think about it step-by-step.");
      config.prompt.order = p.value("order", "sampled") == std::string("grouped_by_label")
                                ? ExampleOrder::grouped_by_label
                                : ExampleOrder::sampled;
    }

    if (j.contains("detect")) {
      const nlohmann::json& d = j.at("detect");
      config.detect.strict_order = d.value("strict_order", true);
      config.detect.alert_threshold = d.value("alert_threshold", std::size_t{1});
    }

    if (j.contains("eval")) {
      const nlohmann::json& e = j.at("eval");
      config.precision_k = e.value("k", std::size_t{0});
      config.unparseable_policy = e.value("unparseable", "fail");
      if (config.unparseable_policy != "fail" && config.unparseable_policy != "normal" &&
          config.unparseable_policy != "anomalous")
        throw Error(ErrorKind::config, "eval.unparseable must be fail, normal, or anomalous");
      config.reselect_per_query = e.value("reselect_per_query", false);
    }

    config.output_dir = j.value("output_dir", std::string("out"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("bad config document: ") + e.what());
  }

  config.config_hash = file_hash_hex(path);
  return config;
}

std::unique_ptr<ClassifierBackend> make_backend(const RunConfig& config,
                                                const std::vector<LabeledExample>& icl_pool) {
  const std::string& kind = config.backend_kind;
  if (kind == "baseline") return std::make_unique<BaselineClassifier>();
  if (kind == "mock") {
    if (config.mock.is_null())
      throw Error(ErrorKind::config, "mock backend needs a \"mock\" config block");
    return MockBackend::from_model_json(config.mock);
  }
  if (kind == "sft-http")
    return std::make_unique<HttpClassifierAdapter>(config.classify_endpoint);

  if (kind == "icl-http" || kind == "icl-command" || kind == "icl-mock") {
    std::unique_ptr<GenerativeBackend> generative;
    if (kind == "icl-http")
      generative = std::make_unique<HttpGenerativeAdapter>(config.generative_endpoint);
    else if (kind == "icl-command")
      generative = std::make_unique<CommandGenerativeAdapter>(config.generative_endpoint);
    else {
      if (config.mock.is_null())
        throw Error(ErrorKind::config, "icl-mock backend needs a \"mock\" config block");
      auto rule_table = MockBackend::from_model_json(config.mock);
      std::string style_name = config.mock.value("style", "plain");
      MockGenerative::Style style =
          style_name == "prefixed"           ? MockGenerative::Style::prefixed
          : style_name == "chain_of_thought" ? MockGenerative::Style::chain_of_thought
                                             : MockGenerative::Style::plain;
      generative = std::make_unique<MockGenerative>(
          rule_table->rules(), style, config.prompt.vocabulary.normal_token,
          config.prompt.vocabulary.anomalous_token);
    }
    return IclClassifier::with_pool(std::move(generative), config.prompt, icl_pool);
  }

  throw Error(ErrorKind::config, "unknown backend kind '" + kind + "'");
}

}  // namespace wfad
