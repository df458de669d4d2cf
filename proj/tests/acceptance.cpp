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

// Acceptance suite: one criterion per function, one pass/fail line each.
// Every tolerance is pinned here, next to the check that uses it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wfad/baseline.hpp"
#include "wfad/detect.hpp"
#include "wfad/evaluate.hpp"
#include "wfad/mock_backend.hpp"
#include "wfad/prompt.hpp"
#include "wfad/report_io.hpp"

// doctest macros are not used here, but test_util.hpp asserts with REQUIRE.
#define REQUIRE(x) \
  do { \
    if (!(x)) throw std::runtime_error("fixture access failed: " #x); \
  } while (0)
#include "test_util.hpp"

using namespace wfad;
using namespace wfad::testing;

namespace {

struct Checker {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename T>
  void expect_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
      std::ostringstream ss;
      ss << what << " (got " << got << ", want " << want << ")";
      failures.push_back(ss.str());
    }
  }
};

int g_failed = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void(Checker&)>& body) {
  Checker checker;
  auto start = std::chrono::steady_clock::now();
  try {
    body(checker);
  } catch (const std::exception& e) {
    checker.failures.push_back(std::string("exception: ") + e.what());
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= budget_seconds)
    checker.failures.push_back("runtime " + std::to_string(elapsed) + "s exceeds budget " +
                               std::to_string(budget_seconds) + "s");

  if (checker.failures.empty()) {
    std::printf("[PASS] %2d %-28s (%.3fs)\n", number, name.c_str(), elapsed);
  } else {
    ++g_failed;
    std::printf("[FAIL] %2d %-28s (%.3fs)\n", number, name.c_str(), elapsed);
    for (const std::string& f : checker.failures)
      std::printf("         - %s\n", f.c_str());
  }
}

double gauss(std::mt19937_64& rng, double mean, double sd) {
  double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// ---- criterion 1: serialization golden -----------------------------------

void serialization_golden(Checker& c) {
  FeatureSchema schema = reference_schema();
  JobRecord record = reference_record();
  std::vector<std::string> expected = read_lines(fixture_path("reference_prefixes.txt"));
  c.expect_eq(expected.size(), std::size_t{5}, "fixture has five lines");

  for (std::size_t k = 1; k <= 5; ++k)
    c.expect_eq(serialize(record, schema, k).text, expected[k - 1],
                "prefix " + std::to_string(k) + " byte-identical");

  std::vector<Sentence> stream = prefix_stream(record, schema);
  c.expect_eq(stream.size(), std::size_t{5}, "prefix stream length");
  for (std::size_t k = 0; k < stream.size(); ++k)
    c.expect_eq(stream[k].text, expected[k], "stream element " + std::to_string(k + 1));
}

// ---- criterion 2: split correctness --------------------------------------

void split_correctness(Checker& c) {
  FeatureSchema schema = reference_schema();
  std::vector<LabeledExample> examples;
  examples.reserve(10000);
  for (int i = 0; i < 10000; ++i)
    examples.push_back(make_example(i, i < 3000 ? Label::anomalous : Label::normal, schema));

  DatasetSplit split = split_examples(examples, {0.8, 0.1, 0.1}, 7, /*stratified=*/true);
  c.expect(std::llabs(static_cast<long long>(split.train.size()) - 8000) <= 1,
           "train size within 1 of 8000");
  c.expect(std::llabs(static_cast<long long>(split.validation.size()) - 1000) <= 1,
           "validation size within 1 of 1000");
  c.expect(std::llabs(static_cast<long long>(split.test.size()) - 1000) <= 1,
           "test size within 1 of 1000");
  for (const SplitStats& stats :
       {split.train_stats, split.validation_stats, split.test_stats})
    c.expect(std::abs(stats.anomaly_fraction - 0.30) <= 0.005,
             "per-split anomaly fraction within 0.005 of 0.30");
}

// ---- criterion 3: metric oracle equivalence ------------------------------

struct BruteForce {
  double accuracy, precision, recall, f1, auc, ap, p_at_k;
};

BruteForce brute_force_metrics(const std::vector<Label>& preds,
                               const std::vector<Label>& truth,
                               const std::vector<double>& scores, std::size_t k) {
  BruteForce out{};
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (preds[i] == Label::anomalous && truth[i] == Label::anomalous) ++tp;
    if (preds[i] == Label::anomalous && truth[i] == Label::normal) ++fp;
    if (preds[i] == Label::normal && truth[i] == Label::normal) ++tn;
    if (preds[i] == Label::normal && truth[i] == Label::anomalous) ++fn;
  }
  double n = static_cast<double>(truth.size());
  out.accuracy = static_cast<double>(tp + tn) / n;
  out.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = (out.precision + out.recall) > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;

  // AUC by pair enumeration, ties half credit.
  double wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != Label::anomalous) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != Label::normal) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  out.auc = wins / static_cast<double>(pairs);

  // Ranking by (score desc, index asc) via repeated max selection.
  std::vector<std::size_t> remaining(truth.size()), ranked;
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  while (!remaining.empty()) {
    std::size_t pick = 0;
    for (std::size_t t = 1; t < remaining.size(); ++t)
      if (scores[remaining[t]] > scores[remaining[pick]]) pick = t;
    ranked.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<long>(pick));
  }
  std::size_t positives = tp + fn;
  double sum = 0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (truth[ranked[r]] == Label::anomalous) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  out.ap = sum / static_cast<double>(positives);

  std::size_t top = 0;
  for (std::size_t r = 0; r < k; ++r)
    if (truth[ranked[r]] == Label::anomalous) ++top;
  out.p_at_k = static_cast<double>(top) / static_cast<double>(k);
  return out;
}

void metric_oracle_equivalence(Checker& c) {
  const double tol = 1e-12;
  std::mt19937_64 rng(1234);
  int done = 0;
  while (done < 500) {
    std::size_t n = 2 + rng() % 11;
    std::vector<Label> truth(n), preds(n);
    std::vector<double> scores(n);
    bool has_a = false, has_n = false;
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng() % 2 ? Label::anomalous : Label::normal;
      preds[i] = rng() % 2 ? Label::anomalous : Label::normal;
      scores[i] = static_cast<double>(rng() % 7) / 6.0;  // deliberate ties
      (truth[i] == Label::anomalous ? has_a : has_n) = true;
    }
    if (!has_a || !has_n) continue;
    ++done;

    EvalReport report = classification_metrics(preds, truth);
    RankingMetrics ranking = ranking_metrics(scores, truth);
    BruteForce oracle = brute_force_metrics(preds, truth, scores, ranking.k);

    c.expect(std::abs(report.accuracy - oracle.accuracy) <= tol, "accuracy matches oracle");
    c.expect(std::abs(report.precision - oracle.precision) <= tol, "precision matches oracle");
    c.expect(std::abs(report.recall - oracle.recall) <= tol, "recall matches oracle");
    c.expect(std::abs(report.f1 - oracle.f1) <= tol, "f1 matches oracle");
    c.expect(std::abs(ranking.roc_auc - oracle.auc) <= tol, "auc matches oracle");
    c.expect(std::abs(ranking.average_precision - oracle.ap) <= tol, "ap matches oracle");
    c.expect(std::abs(ranking.precision_at_k - oracle.p_at_k) <= tol, "p@k matches oracle");
    if (!c.failures.empty()) return;  // one counterexample is enough to report
  }
}

// ---- criterion 4: prompt fidelity ----------------------------------------

void prompt_fidelity(Checker& c) {
  struct Case {
    const char* file;
    std::size_t shots;
    SelectionPolicy policy;
    PromptMode mode;
  };
  const Case cases[] = {
      {"prompts/shots0_category.txt", 0, SelectionPolicy::neg_only, PromptMode::category_only},
      {"prompts/shots0_cot.txt", 0, SelectionPolicy::neg_only, PromptMode::chain_of_thought},
      {"prompts/shots5_neg_category.txt", 5, SelectionPolicy::neg_only,
       PromptMode::category_only},
      {"prompts/shots5_pos_category.txt", 5, SelectionPolicy::pos_only,
       PromptMode::category_only},
      {"prompts/shots5_mixed_category.txt", 5, SelectionPolicy::mixed,
       PromptMode::category_only},
      {"prompts/shots5_mixed_cot.txt", 5, SelectionPolicy::mixed,
       PromptMode::chain_of_thought},
  };

  std::vector<LabeledExample> pool = make_prompt_pool();
  Sentence query = serialize(reference_record(), reference_schema(), 5);

  for (const Case& one : cases) {
    PromptSpec spec;
    spec.schema = reference_schema();
    spec.shots = one.shots;
    spec.policy = one.policy;
    spec.mode = one.mode;
    spec.seed = 13;

    std::string first = build_prompt(spec, select_examples(pool, spec), query);
    c.expect(first == read_file(fixture_path(one.file)),
             std::string(one.file) + " byte-identical to golden");
    std::string second = build_prompt(spec, select_examples(pool, spec), query);
    std::string third = build_prompt(spec, select_examples(pool, spec), query);
    c.expect(first == second && second == third,
             std::string(one.file) + " reproducible across three runs");
  }
}

// ---- criterion 5: online replay equivalence ------------------------------

void online_replay_equivalence(Checker& c) {
  FeatureSchema schema = reference_schema();
  MockRule rule;
  rule.kind = MockRule::Kind::threshold;
  rule.feature = "runtime";
  rule.op = ">";
  rule.value = 1000.0;
  MockBackend mock({rule}, 1.0);

  std::mt19937_64 rng(2025);
  const int jobs = 200;

  std::vector<JobRecord> records;
  std::vector<Label> truths;
  for (int j = 0; j < jobs; ++j) {
    JobRecord record;
    record.job_id = "job-" + std::to_string(j);
    for (std::size_t k = 0; k < schema.size(); ++k)
      record.values[schema.at(k).name] = static_cast<double>(rng() % 2500);
    records.push_back(record);
    truths.push_back(rng() % 2 ? Label::anomalous : Label::normal);
  }

  // Interleaved stream: feature rounds across all jobs.
  OnlineDetector engine(schema, mock);
  for (std::size_t k = 0; k < schema.size(); ++k)
    for (int j = 0; j < jobs; ++j)
      engine.observe(records[j].job_id, schema.at(k).name,
                     records[j].values[schema.at(k).name]);

  std::vector<DetectionTrace> traces;
  for (int j = 0; j < jobs; ++j)
    traces.push_back(engine.finalize(records[j].job_id, truths[j]));

  std::size_t expect_undetected = 0;
  std::map<std::size_t, std::size_t> expect_histogram;
  for (int j = 0; j < jobs; ++j) {
    std::vector<Sentence> prefixes = prefix_stream(records[j], schema);
    std::vector<Prediction> offline = mock.predict_batch(prefixes);
    const DetectionTrace& trace = traces[static_cast<std::size_t>(j)];
    bool equal = trace.steps.size() == offline.size();
    for (std::size_t k = 0; equal && k < offline.size(); ++k)
      equal = trace.steps[k].sentence == prefixes[k].text &&
              trace.steps[k].prediction.label == offline[k].label &&
              trace.steps[k].prediction.score == offline[k].score &&
              trace.steps[k].prefix_len == prefixes[k].prefix_len;
    c.expect(equal, "trace " + records[j].job_id + " equals offline replay");

    // Exhaustive scan for the first correct position.
    std::size_t first = 0;
    for (std::size_t k = 0; k < offline.size(); ++k) {
      if (offline[k].label == truths[j]) {
        first = k + 1;
        break;
      }
    }
    if (first == 0) ++expect_undetected;
    else ++expect_histogram[first];
  }

  EarlyDetectionStats stats = early_detection_stats(traces);
  c.expect(stats.histogram == expect_histogram, "histogram equals exhaustive scan");
  c.expect_eq(stats.undetected, expect_undetected, "undetected equals exhaustive scan");
  c.expect_eq(stats.jobs, std::size_t{200}, "stats cover all jobs");
}

// ---- criterion 6: end-to-end learnability --------------------------------

std::vector<LabeledExample> gaussian_jobs(int n, std::uint64_t seed, double anomaly_mean,
                                          double normal_mean, double sd) {
  FeatureSchema schema = reference_schema();
  std::mt19937_64 rng(seed);
  std::vector<LabeledExample> out;
  for (int i = 0; i < n; ++i) {
    bool anomalous = i % 2 == 1;
    JobRecord record;
    record.job_id = "g-" + std::to_string(i);
    record.values["wms_delay"] = gauss(rng, 10.0, 2.0);
    record.values["queue_delay"] = gauss(rng, 30.0, 5.0);
    record.values["runtime"] = gauss(rng, anomalous ? anomaly_mean : normal_mean, sd);
    record.values["post_script_delay"] = gauss(rng, 5.0, 1.0);
    record.values["stage_in_delay"] = gauss(rng, 400.0, 50.0);
    LabeledExample ex;
    ex.sentence = serialize(record, schema, schema.size());
    ex.label = anomalous ? Label::anomalous : Label::normal;
    out.push_back(std::move(ex));
  }
  return out;
}

void end_to_end_learnability(Checker& c) {
  std::vector<LabeledExample> jobs = gaussian_jobs(2000, 6, 2000.0, 300.0, 100.0);
  DatasetSplit split = split_examples(jobs, {0.8, 0.1, 0.1}, 7);

  BaselineClassifier baseline;
  TrainConfig config;
  config.epochs = 20;
  TrainReport report = baseline.fit(split.train, split.validation, config);

  c.expect_eq(report.epochs.size(), std::size_t{20}, "one metrics row per epoch");
  for (std::size_t e = 0; e < report.epochs.size(); ++e)
    c.expect(report.epochs[e].epoch == static_cast<int>(e) + 1, "epoch rows are sequential");

  double accuracy = accuracy_on(baseline, split.test);
  c.expect(accuracy >= 0.95,
           "test accuracy " + std::to_string(accuracy) + " reaches 0.95 within 20 epochs");
}

// ---- criterion 7: debiasing property -------------------------------------

void debiasing_property(Checker& c) {
  FeatureSchema schema({{"runtime", FeatureKind::duration_seconds}});
  std::mt19937_64 rng(88);
  std::vector<LabeledExample> train;
  for (int i = 0; i < 600; ++i) {
    bool anomalous = i % 10 != 0;  // 90/10 imbalance
    JobRecord record;
    record.job_id = "d-" + std::to_string(i);
    record.values["runtime"] =
        static_cast<double>(rng() % 100) + (anomalous ? 20.0 : 0.0);  // weak signal
    LabeledExample ex;
    ex.sentence = serialize(record, schema, 1);
    ex.label = anomalous ? Label::anomalous : Label::normal;
    train.push_back(std::move(ex));
  }

  TrainConfig config;
  config.epochs = 40;
  const std::uint64_t probe_seed = 7;
  const int probe_runs = 1000;

  BaselineClassifier biased;
  biased.fit(train, {}, config);
  BiasProbeReport before = bias_probe(biased, probe_runs, probe_seed);

  BaselineClassifier debiased;
  debiased.fit(debias_augment(train, 60), {}, config);
  BiasProbeReport after = bias_probe(debiased, probe_runs, probe_seed);

  c.expect(before.gap > 0.2, "biased model shows a visible gap (got " +
                                 std::to_string(before.gap) + ")");
  c.expect(after.gap < before.gap, "gap strictly decreases after augmentation (" +
                                       std::to_string(before.gap) + " -> " +
                                       std::to_string(after.gap) + ")");
}

// ---- criterion 8: freezing contract --------------------------------------

void freezing_contract(Checker& c) {
  std::vector<LabeledExample> d1 = gaussian_jobs(4000, 41, 1800.0, 250.0, 120.0);
  std::vector<LabeledExample> d2 = gaussian_jobs(10000, 42, 1500.0, 400.0, 150.0);

  BaselineClassifier base;
  TrainConfig warmup;
  warmup.epochs = 5;
  base.fit(d1, {}, warmup);

  TrainConfig continuation;
  continuation.epochs = 50;

  // Same starting state, same data, both policies; min over repetitions to
  // still the timer.
  double all_seconds = 1e9, head_seconds = 1e9;
  long all_params = 0, head_params = 0;
  for (int rep = 0; rep < 3; ++rep) {
    auto all_run = base.clone();
    TrainReport all_report = all_run->fit(d2, {}, continuation);
    all_seconds = std::min(all_seconds, all_report.wall_seconds);
    all_params = all_report.trainable_parameters;

    auto head_run = base.clone();
    auto* head_baseline = dynamic_cast<BaselineClassifier*>(head_run.get());
    std::string standardizer = head_baseline->parameter_digest("standardizer");
    std::string encoder = head_baseline->parameter_digest("encoder");

    TrainConfig head_config = continuation;
    head_config.freeze = FreezePolicy::head_only;
    TrainReport head_report = head_run->fit(d2, {}, head_config);
    head_seconds = std::min(head_seconds, head_report.wall_seconds);
    head_params = head_report.trainable_parameters;

    c.expect(head_baseline->parameter_digest("standardizer") == standardizer,
             "standardizer bytes unchanged under head-only");
    c.expect(head_baseline->parameter_digest("encoder") == encoder,
             "encoder bytes unchanged under head-only");
  }

  c.expect(head_params < all_params,
           "head-only trains strictly fewer parameters (" + std::to_string(head_params) +
               " < " + std::to_string(all_params) + ")");
  c.expect(head_seconds < all_seconds,
           "head-only wall-clock " + std::to_string(head_seconds) + "s beats all-parameters " +
               std::to_string(all_seconds) + "s");
}

// ---- criterion 9: transfer matrix ----------------------------------------

void transfer_matrix_determinism(Checker& c) {
  std::vector<TransferDataset> datasets;
  const double anomaly_means[] = {1800.0, 1400.0, 2400.0};
  const double normal_means[] = {250.0, 500.0, 300.0};
  for (int d = 0; d < 3; ++d) {
    std::vector<LabeledExample> jobs = gaussian_jobs(
        600, 90 + static_cast<std::uint64_t>(d), anomaly_means[d], normal_means[d], 100.0);
    DatasetSplit split = split_examples(jobs, {0.8, 0.1, 0.1}, 7);
    TransferDataset ds;
    ds.id = "synthetic-" + std::to_string(d);
    ds.train = std::move(split.train);
    ds.test = std::move(split.test);
    datasets.push_back(std::move(ds));
  }

  BackendFactory factory = [](std::size_t) -> std::unique_ptr<ClassifierBackend> {
    return std::make_unique<BaselineClassifier>();
  };
  TrainConfig config;
  config.epochs = 15;

  TransferMatrix first = transfer_matrix(datasets, factory, config);
  TransferMatrix second = transfer_matrix(datasets, factory, config);

  c.expect_eq(first.dataset_ids.size(), std::size_t{3}, "matrix is 3x3");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      c.expect(first.ok[i][j], "cell trained and evaluated");

  std::string serialized_first = transfer_matrix_json(first).dump(2);
  std::string serialized_second = transfer_matrix_json(second).dump(2);
  c.expect(serialized_first == serialized_second, "matrix bytes identical across reruns");

  // Diagonal equals an independently trained in-domain evaluation.
  for (std::size_t i = 0; i < 3; ++i) {
    BaselineClassifier independent;
    independent.fit(datasets[i].train, {}, config);
    double in_domain = accuracy_on(independent, datasets[i].test);
    c.expect(first.cells[i][i] == in_domain,
             "diagonal cell " + std::to_string(i) + " equals in-domain evaluation");
  }
}

// ---- criterion 10: response-parser corpus --------------------------------

void response_parser_corpus(Checker& c) {
  nlohmann::json corpus = nlohmann::json::parse(read_file(fixture_path("responses.json")));
  c.expect(corpus.size() >= 20, "corpus has at least 20 fixtures");

  std::size_t checked = 0, correct = 0, unparseable_fixtures = 0;
  for (const nlohmann::json& item : corpus) {
    std::string text = item.at("text").get<std::string>();
    PromptMode mode = parse_prompt_mode(item.at("mode").get<std::string>());
    std::string expect = item.at("expect").get<std::string>();

    if (expect == "unparseable") {
      ++unparseable_fixtures;
      try {
        parse_response(text, mode);
        c.expect(false, "fixture '" + text + "' should be unparseable");
      } catch (const Error& e) {
        c.expect(e.kind() == ErrorKind::unparseable,
                 "fixture '" + text + "' raises the documented error kind");
      }
      continue;
    }

    ++checked;
    ParsedResponse parsed = parse_response(text, mode);
    if (label_name(parsed.label) == expect) ++correct;
    if (mode == PromptMode::category_only)
      c.expect(!parsed.rationale.has_value(), "category_only carries no rationale");
  }
  c.expect_eq(correct, checked, "label extraction is 100% correct");
  c.expect(unparseable_fixtures >= 3, "corpus includes unparseable fixtures");
}

}  // namespace

int main() {
  run_criterion(1, "serialization-golden", 1.0, serialization_golden);
  run_criterion(2, "split-correctness", 5.0, split_correctness);
  run_criterion(3, "metric-oracle-equivalence", 10.0, metric_oracle_equivalence);
  run_criterion(4, "prompt-fidelity", 1.0, prompt_fidelity);
  run_criterion(5, "online-replay-equivalence", 10.0, online_replay_equivalence);
  run_criterion(6, "end-to-end-learnability", 60.0, end_to_end_learnability);
  run_criterion(7, "debiasing-property", 30.0, debiasing_property);
  run_criterion(8, "freezing-contract", 60.0, freezing_contract);
  run_criterion(9, "transfer-matrix", 60.0, transfer_matrix_determinism);
  run_criterion(10, "response-parser-corpus", 1.0, response_parser_corpus);

  std::printf("ACCEPTANCE: %d/10 criteria passed\n", 10 - g_failed);
  return g_failed == 0 ? 0 : 1;
}
