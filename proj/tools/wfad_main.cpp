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

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wfad/baseline.hpp"
#include "wfad/config.hpp"
#include "wfad/icl.hpp"
#include "wfad/report_io.hpp"

namespace {

using namespace wfad;

/// Exclusive writer lock on the output directory, released on exit.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".wfad.lock") {
    std::filesystem::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error(ErrorKind::state,
                  "output directory is locked by another run (" + path_.string() + ")");
  }
  ~OutputLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

std::filesystem::path under_output(const RunConfig& config, const std::string& name) {
  std::filesystem::path p(name);
  return p.is_absolute() ? p : config.output_dir / p;
}

/// Wall-clock and timestamps go only to the sidecar log, never into report
/// files, so reruns stay byte-identical.
void log_run(const RunConfig& config, const std::string& command, double wall_seconds) {
  std::ofstream log(config.output_dir / "run.log", std::ios::app);
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
  log << stamp << " " << command << " config=" << config.config_hash << " wall="
      << wall_seconds << "s\n";
}

double anomaly_score(const Prediction& pred) {
  return pred.label == Label::anomalous ? pred.score : 1.0 - pred.score;
}

EvalReport evaluate_predictions(const std::vector<Prediction>& preds,
                                const std::vector<Label>& truth, std::size_t k) {
  std::vector<Label> labels;
  std::vector<double> scores;
  labels.reserve(preds.size());
  for (const Prediction& p : preds) {
    labels.push_back(p.label);
    scores.push_back(anomaly_score(p));
  }
  EvalReport report = classification_metrics(labels, truth);
  try {
    report.ranking = ranking_metrics(scores, truth,
                                     k > 0 ? std::optional<std::size_t>(k) : std::nullopt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::undefined_metric) throw;
    report.ranking.reset();  // single-class truth: ranking stays unreported
  }
  return report;
}

void print_eval_summary(const EvalReport& report) {
  std::cout << "examples: " << report.n << "\n"
            << "accuracy: " << report.accuracy << "  precision: " << report.precision
            << "  recall: " << report.recall << "  f1: " << report.f1 << "\n";
  if (report.degenerate_precision)
    std::cout << "note: no positive predictions; precision reported as 0\n";
  if (report.ranking)
    std::cout << "roc_auc: " << report.ranking->roc_auc
              << "  average_precision: " << report.ranking->average_precision
              << "  precision@" << report.ranking->k << ": "
              << report.ranking->precision_at_k << "\n";
}

std::vector<Label> truth_of(const std::vector<LabeledExample>& examples) {
  std::vector<Label> out;
  out.reserve(examples.size());
  for (const LabeledExample& ex : examples) out.push_back(ex.label);
  return out;
}

int resolve_debias_copies(int configured, std::size_t train_size) {
  if (configured != TrainConfig::kAutoDebiasCopies) return configured;
  return std::max(1, static_cast<int>(train_size / 100));  // 1% of train per label
}

struct CommonArgs {
  std::string config_path;
  std::string output_override;
  std::string backend_override;
  std::uint64_t seed = 0;
};

RunConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty())
    throw Error(ErrorKind::config, "--config is required");
  RunConfig config = load_run_config(args.config_path);
  if (!args.output_override.empty()) config.output_dir = args.output_override;
  if (!args.backend_override.empty()) config.backend_kind = args.backend_override;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workflow anomaly detection over serialized job sentences"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--config", common.config_path, "run configuration document (json)");
  app.add_option("--output", common.output_override, "output directory override");
  app.add_option("--backend", common.backend_override, "backend kind override");
  auto* seed_opt = app.add_option("--seed", common.seed, "seed override for the subcommand");

  auto* cmd_ingest = app.add_subcommand("ingest", "parse a log table into a dataset file");
  std::string ingest_input, ingest_out = "dataset.txt";
  cmd_ingest->add_option("--input", ingest_input, "delimited log table")->required();
  cmd_ingest->add_option("--out", ingest_out, "dataset file name");

  auto* cmd_split = app.add_subcommand("split", "split a dataset file into train/val/test");
  std::string split_input, split_stem = "ds";
  cmd_split->add_option("--input", split_input, "dataset file")->required();
  cmd_split->add_option("--out-stem", split_stem, "output stem for the three files");

  auto* cmd_train = app.add_subcommand("train", "fit a backend and save the model artifact");
  std::string train_file, val_file, model_out = "model.json", train_report = "train.json";
  std::string freeze_flag, debias_flag;
  int epochs_flag = 0;
  cmd_train->add_option("--train", train_file, "training dataset file")->required();
  cmd_train->add_option("--val", val_file, "validation dataset file");
  cmd_train->add_option("--model", model_out, "model artifact output");
  cmd_train->add_option("--report", train_report, "train report output");
  cmd_train->add_option("--freeze", freeze_flag, "all-parameters | head-only");
  cmd_train->add_option("--debias", debias_flag, "debias copies (count or 'auto')");
  cmd_train->add_option("--epochs", epochs_flag, "epoch count override");

  auto* cmd_eval = app.add_subcommand("eval", "evaluate a saved model on a test file");
  std::string eval_model, eval_test, eval_report_path = "eval.json";
  std::size_t eval_k = 0;
  cmd_eval->add_option("--model", eval_model, "model artifact")->required();
  cmd_eval->add_option("--test", eval_test, "test dataset file")->required();
  cmd_eval->add_option("--report", eval_report_path, "evaluation report output");
  cmd_eval->add_option("--k", eval_k, "precision@k cutoff (0 = anomaly count)");

  auto* cmd_icl = app.add_subcommand("icl", "prompt a generative backend over a test file");
  std::string icl_pool, icl_test, icl_report_path = "icl.json";
  std::string icl_policy, icl_mode;
  long long icl_shots = -1;
  cmd_icl->add_option("--pool", icl_pool, "example pool (dataset file)")->required();
  cmd_icl->add_option("--test", icl_test, "test dataset file")->required();
  cmd_icl->add_option("--report", icl_report_path, "evaluation report output");
  cmd_icl->add_option("--shots", icl_shots, "in-context example count");
  cmd_icl->add_option("--policy", icl_policy, "neg_only | pos_only | mixed");
  cmd_icl->add_option("--mode", icl_mode, "category_only | chain_of_thought");

  auto* cmd_detect = app.add_subcommand("detect", "online detection over an event stream");
  std::string detect_model, detect_events, detect_truth;
  std::string traces_out = "traces.json", stats_out = "early_detection.json";
  cmd_detect->add_option("--model", detect_model, "model artifact")->required();
  cmd_detect->add_option("--events", detect_events, "event file ('-' for stdin)")->required();
  cmd_detect->add_option("--truth", detect_truth, "dataset file with ground-truth labels");
  cmd_detect->add_option("--traces", traces_out, "trace report output");
  cmd_detect->add_option("--stats", stats_out, "early-detection stats output");

  auto* cmd_probe = app.add_subcommand("bias-probe", "empty-sentence bias probe");
  std::string probe_model, probe_report = "bias_probe.json";
  int probe_runs = 10;
  cmd_probe->add_option("--model", probe_model, "model artifact")->required();
  cmd_probe->add_option("--runs", probe_runs, "number of probe runs");
  cmd_probe->add_option("--report", probe_report, "probe report output");

  auto* cmd_transfer = app.add_subcommand("transfer", "cross-dataset accuracy matrix");
  std::vector<std::string> transfer_stems;
  std::string transfer_report = "transfer.json";
  std::string portions_flag;
  bool incremental = false;
  cmd_transfer->add_option("--datasets", transfer_stems, "dataset stems (>= 2)")->required();
  cmd_transfer->add_option("--report", transfer_report, "matrix/curve report output");
  cmd_transfer->add_flag("--incremental", incremental,
                         "continue training on growing portions of the second dataset");
  cmd_transfer->add_option("--portions", portions_flag,
                           "comma-separated portion schedule (incremental mode)");

  for (CLI::App* sub : app.get_subcommands(std::function<bool(CLI::App*)>{}))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  const auto started = std::chrono::steady_clock::now();
  std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = load_config(common);
    OutputLock lock(config.output_dir);

    if (cmd_ingest->parsed()) {
      LoadOptions load = config.load;
      load.require_labels = true;
      std::vector<JobRecord> records = load_table_file(ingest_input, config.schema, load);
      std::vector<LabeledExample> examples;
      examples.reserve(records.size());
      for (const JobRecord& record : records) {
        LabeledExample ex;
        ex.sentence = serialize(record, config.schema, config.schema.size());
        ex.label = *record.label;
        ex.workflow_id = record.workflow_id;
        examples.push_back(std::move(ex));
      }
      write_examples(examples, under_output(config, ingest_out));
      std::cout << "wrote " << examples.size() << " examples\n";
    }

    if (cmd_split->parsed()) {
      if (seed_opt->count() > 0) config.split_seed = common.seed;
      std::vector<LabeledExample> examples = read_examples(split_input);
      DatasetSplit split =
          split_examples(examples, config.ratios, config.split_seed, config.stratified);
      write_dataset(split, under_output(config, split_stem));
      write_report(split_stats_json(split), config.config_hash,
                   under_output(config, split_stem + ".stats.json"));
      std::cout << "train " << split.train.size() << " / validation "
                << split.validation.size() << " / test " << split.test.size() << "\n";
    }

    if (cmd_train->parsed()) {
      if (seed_opt->count() > 0) config.train.seed = common.seed;
      if (!freeze_flag.empty()) config.train.freeze = parse_freeze_policy(freeze_flag);
      if (epochs_flag > 0) config.train.epochs = epochs_flag;
      if (!debias_flag.empty()) {
        config.train.debias_copies = debias_flag == "auto"
                                         ? TrainConfig::kAutoDebiasCopies
                                         : std::stoi(debias_flag);
      }
      config.train.validate();

      std::vector<LabeledExample> train = read_examples(train_file);
      std::vector<LabeledExample> val =
          val_file.empty() ? std::vector<LabeledExample>{} : read_examples(val_file);

      int copies = resolve_debias_copies(config.train.debias_copies, train.size());
      if (copies > 0) train = debias_augment(train, static_cast<std::size_t>(copies));

      std::unique_ptr<ClassifierBackend> backend = make_backend(config, train);
      TrainReport report = backend->fit(train, val, config.train);
      save_model(*backend, under_output(config, model_out));
      write_report(train_report_json(report), config.config_hash,
                   under_output(config, train_report));
      std::cout << "trained " << report.epochs_trained << " epochs, "
                << report.trainable_parameters << " trainable parameters\n";
      if (!report.epochs.empty())
        std::cout << "final val accuracy: " << report.epochs.back().accuracy
                  << " (best epoch " << report.best_epoch << ")\n";
    }

    if (cmd_eval->parsed()) {
      std::unique_ptr<ClassifierBackend> backend = load_model(under_output(config, eval_model));
      std::vector<LabeledExample> test = read_examples(eval_test);
      std::vector<Sentence> sentences;
      sentences.reserve(test.size());
      for (const LabeledExample& ex : test) sentences.push_back(ex.sentence);
      std::vector<Prediction> preds = backend->predict_batch(sentences);
      EvalReport report = evaluate_predictions(
          preds, truth_of(test), eval_k > 0 ? eval_k : config.precision_k);
      write_report(eval_report_json(report), config.config_hash,
                   under_output(config, eval_report_path));
      print_eval_summary(report);
    }

    if (cmd_icl->parsed()) {
      if (seed_opt->count() > 0) config.prompt.seed = common.seed;
      if (icl_shots >= 0) config.prompt.shots = static_cast<std::size_t>(icl_shots);
      if (!icl_policy.empty()) config.prompt.policy = parse_selection_policy(icl_policy);
      if (!icl_mode.empty()) config.prompt.mode = parse_prompt_mode(icl_mode);
      if (config.backend_kind.rfind("icl", 0) != 0)
        throw Error(ErrorKind::config, "icl needs an icl-* backend, got '" +
                                           config.backend_kind + "'");

      std::vector<LabeledExample> pool = read_examples(icl_pool);
      std::vector<LabeledExample> test = read_examples(icl_test);
      if (test.empty()) throw Error(ErrorKind::input, "test file is empty");
      std::unique_ptr<ClassifierBackend> backend = make_backend(config, pool);

      std::size_t fallbacks = 0;
      std::vector<Prediction> preds;
      preds.reserve(test.size());
      for (const LabeledExample& ex : test) {
        if (config.reselect_per_query && !preds.empty()) {
          // fresh example draw per query, seeded by query position
          RunConfig per_query = config;
          per_query.prompt.seed = config.prompt.seed + preds.size();
          backend = make_backend(per_query, pool);
        }
        try {
          preds.push_back(backend->predict(ex.sentence));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::unparseable || config.unparseable_policy == "fail")
            throw;
          Prediction fallback;
          fallback.label = parse_label(config.unparseable_policy);
          fallback.score = 0.5;
          preds.push_back(fallback);
          ++fallbacks;
        }
      }
      EvalReport report = evaluate_predictions(preds, truth_of(test), config.precision_k);
      nlohmann::json body = eval_report_json(report);
      body["unparseable_fallbacks"] = fallbacks;
      body["shots"] = config.prompt.shots;
      body["policy"] = selection_policy_name(config.prompt.policy);
      body["mode"] = prompt_mode_name(config.prompt.mode);
      write_report(body, config.config_hash, under_output(config, icl_report_path));
      print_eval_summary(report);
      if (fallbacks > 0) std::cout << "unparseable fallbacks: " << fallbacks << "\n";
    }

    if (cmd_detect->parsed()) {
      std::unique_ptr<ClassifierBackend> backend =
          load_model(under_output(config, detect_model));

      std::map<std::string, Label> truth;
      if (!detect_truth.empty())
        for (const LabeledExample& ex : read_examples(detect_truth))
          truth[ex.sentence.job_id] = ex.label;

      std::vector<FeatureEvent> events;
      if (detect_events == "-") {
        events = read_events(std::cin);
      } else {
        std::ifstream in(detect_events);
        if (!in) throw Error(ErrorKind::input, "cannot open events '" + detect_events + "'");
        events = read_events(in);
      }

      OnlineDetector engine(config.schema, *backend, config.detect);
      for (const FeatureEvent& ev : events) engine.observe(ev.job_id, ev.feature_name, ev.value);

      std::vector<DetectionTrace> traces;
      bool all_have_truth = !truth.empty();
      for (const std::string& job_id : engine.open_jobs()) {
        auto it = truth.find(job_id);
        std::optional<Label> job_truth;
        if (it != truth.end()) job_truth = it->second;
        else all_have_truth = false;
        traces.push_back(engine.finalize(job_id, job_truth));
      }

      nlohmann::json trace_array = nlohmann::json::array();
      for (const DetectionTrace& trace : traces)
        trace_array.push_back(detection_trace_json(trace));
      write_report({{"traces", trace_array}}, config.config_hash,
                   under_output(config, traces_out));
      std::cout << "finalized " << traces.size() << " traces\n";

      if (!detect_truth.empty()) {
        if (!all_have_truth)
          throw Error(ErrorKind::input, "truth file does not cover every observed job");
        EarlyDetectionStats stats = early_detection_stats(traces);
        write_report(early_stats_json(stats), config.config_hash,
                     under_output(config, stats_out));
        std::cout << "undetected jobs: " << stats.undetected << "\n";
      }
    }

    if (cmd_probe->parsed()) {
      std::unique_ptr<ClassifierBackend> backend =
          load_model(under_output(config, probe_model));
      std::uint64_t seed = seed_opt->count() > 0 ? common.seed : 17;
      BiasProbeReport report = bias_probe(*backend, probe_runs, seed);
      write_report(bias_probe_json(report), config.config_hash,
                   under_output(config, probe_report));
      std::cout << "gap: " << report.gap << " (normal " << report.count_normal
                << ", anomalous " << report.count_anomalous << ")\n";
    }

    if (cmd_transfer->parsed()) {
      std::vector<TransferDataset> datasets;
      for (const std::string& stem : transfer_stems) {
        DatasetSplit split = read_dataset(stem);
        TransferDataset ds;
        ds.id = std::filesystem::path(stem).filename().string();
        ds.train = std::move(split.train);
        ds.test = std::move(split.test);
        datasets.push_back(std::move(ds));
      }

      BackendFactory factory = [&](std::size_t row) {
        return make_backend(config, datasets.at(row).train);
      };

      if (incremental) {
        if (datasets.size() != 2)
          throw Error(ErrorKind::config, "incremental mode takes exactly two dataset stems");
        std::vector<double> portions{0.0, 0.25, 0.5, 0.75, 1.0};
        if (!portions_flag.empty()) {
          portions.clear();
          std::istringstream ss(portions_flag);
          std::string tok;
          while (std::getline(ss, tok, ',')) portions.push_back(std::stod(tok));
        }
        auto curve =
            incremental_transfer(datasets[0], datasets[1], factory, config.train, portions);
        write_report(transfer_curve_json(curve), config.config_hash,
                     under_output(config, transfer_report));
        for (const TransferCurvePoint& p : curve)
          std::cout << "portion " << p.portion << ": accuracy " << p.accuracy << "\n";
      } else {
        TransferMatrix matrix = transfer_matrix(datasets, factory, config.train);
        write_report(transfer_matrix_json(matrix), config.config_hash,
                     under_output(config, transfer_report));
        for (std::size_t i = 0; i < matrix.dataset_ids.size(); ++i) {
          std::cout << matrix.dataset_ids[i] << ":";
          for (std::size_t j = 0; j < matrix.dataset_ids.size(); ++j) {
            if (matrix.ok[i][j])
              std::cout << " " << matrix.cells[i][j];
            else
              std::cout << " ERR";
          }
          std::cout << "\n";
        }
      }
    }

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log_run(config, command, wall);
  } catch (const Error& e) {
    std::cerr << "wfad " << command << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "wfad " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
