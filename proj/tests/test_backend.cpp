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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <fstream>
#include <random>
#include <thread>

#include "wfad/baseline.hpp"
#include "wfad/mock_backend.hpp"

#include "test_util.hpp"

using namespace wfad;
using namespace wfad::testing;

namespace {

// Gaussian synthetic set in the spirit of the separable detection problem:
// anomalies with large runtimes, normals with small ones.
std::vector<LabeledExample> separable_set(std::size_t n, std::uint64_t seed,
                                          double anomaly_mean = 2000.0,
                                          double normal_mean = 300.0, double stddev = 100.0) {
  FeatureSchema schema = reference_schema();
  std::mt19937_64 rng(seed);
  auto gauss = [&rng](double mean, double sd) {
    double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };

  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool anomalous = i % 2 == 1;
    JobRecord record;
    record.job_id = "sep-" + std::to_string(i);
    record.values["wms_delay"] = gauss(10.0, 2.0);
    record.values["queue_delay"] = gauss(30.0, 5.0);
    record.values["runtime"] = gauss(anomalous ? anomaly_mean : normal_mean, stddev);
    LabeledExample ex;
    ex.sentence = serialize(record, schema, schema.size());
    ex.label = anomalous ? Label::anomalous : Label::normal;
    out.push_back(std::move(ex));
  }
  return out;
}

MockBackend runtime_rule_mock() {
  MockRule rule;
  rule.kind = MockRule::Kind::threshold;
  rule.feature = "runtime";
  rule.op = ">";
  rule.value = 1000.0;
  rule.label = Label::anomalous;
  return MockBackend({rule}, /*p_normal_fallback=*/1.0);
}

}  // namespace

TEST_CASE("mock fit is a no-op reporting zero epochs") {
  MockBackend mock;
  TrainReport report = mock.fit({}, {}, {});
  CHECK(report.epochs_trained == 0);
  CHECK(report.epochs.empty());
  CHECK(report.trainable_parameters == 0);
}

TEST_CASE("mock substring rule matches the T3 prefix") {
  MockRule rule;
  rule.contains = "runtime is 2090.0";
  rule.label = Label::anomalous;
  MockBackend mock({rule}, 1.0);

  Sentence t3 = serialize(reference_record(), reference_schema(), 3);
  Prediction pred = mock.predict(t3);
  CHECK(pred.label == Label::anomalous);
  CHECK(pred.score == 1.0);

  Sentence t2 = serialize(reference_record(), reference_schema(), 2);
  CHECK(mock.predict(t2).label == Label::normal);
}

TEST_CASE("unbiased mock scores the empty sentence at one half") {
  MockBackend mock;
  Prediction pred = mock.predict(Sentence{});
  CHECK(pred.score == 0.5);
}

TEST_CASE("mock threshold rules evaluate clause values") {
  MockBackend mock = runtime_rule_mock();
  Sentence hot{"runtime is 2000.0", "j", 1};
  Sentence cold{"runtime is 400.0", "j", 1};
  CHECK(mock.predict(hot).label == Label::anomalous);
  CHECK(mock.predict(cold).label == Label::normal);
}

TEST_CASE("predict_batch equals element-wise predict") {
  MockBackend mock = runtime_rule_mock();
  std::vector<Sentence> batch;
  CHECK(mock.predict_batch(batch).empty());

  batch = prefix_stream(reference_record(), reference_schema());
  std::vector<Prediction> preds = mock.predict_batch(batch);
  REQUIRE(preds.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Prediction one = mock.predict(batch[i]);
    CHECK(preds[i].label == one.label);
    CHECK(preds[i].score == one.score);
  }

  std::vector<Sentence> big(1000, batch[2]);
  std::vector<Prediction> bulk = mock.predict_batch(big);
  for (const Prediction& p : bulk) CHECK(p.label == mock.predict(batch[2]).label);
}

TEST_CASE("mock model round-trip keeps the rule table") {
  MockBackend mock = runtime_rule_mock();
  auto dir = temp_dir("mock-model");
  save_model(mock, dir / "mock.json");
  auto loaded = load_model(dir / "mock.json");
  REQUIRE(loaded);
  CHECK(loaded->kind() == "mock");
  auto* as_mock = dynamic_cast<MockBackend*>(loaded.get());
  REQUIRE(as_mock);
  REQUIRE(as_mock->rules().size() == 1);
  CHECK(as_mock->rules()[0].feature == "runtime");
  CHECK(as_mock->rules()[0].value == 1000.0);
  CHECK(as_mock->p_normal_fallback() == 1.0);
}

TEST_CASE("corrupted and mismatched model files raise artifact errors") {
  auto dir = temp_dir("bad-model");

  SUBCASE("truncated json") {
    std::ofstream(dir / "m.json") << "{\"format\": \"wfad-mod";
    try {
      load_model(dir / "m.json");
      FAIL("expected artifact error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::artifact);
    }
  }

  SUBCASE("wrong format id") {
    std::ofstream(dir / "m.json") << "{\"format\":\"other\",\"format_version\":1,"
                                     "\"kind\":\"mock\",\"params\":{}}";
    CHECK_THROWS_AS(load_model(dir / "m.json"), Error);
  }

  SUBCASE("version mismatch") {
    std::ofstream(dir / "m.json") << "{\"format\":\"wfad-model\",\"format_version\":99,"
                                     "\"kind\":\"mock\",\"params\":{\"rules\":[]}}";
    try {
      load_model(dir / "m.json");
      FAIL("expected artifact error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::artifact);
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  SUBCASE("missing params leave nothing half-loaded") {
    std::ofstream(dir / "m.json") << "{\"format\":\"wfad-model\",\"format_version\":1,"
                                     "\"kind\":\"baseline\",\"params\":{\"fitted\":true}}";
    CHECK_THROWS_AS(load_model(dir / "m.json"), Error);
  }
}

TEST_CASE("baseline learns the separable runtime split") {
  std::vector<LabeledExample> data = separable_set(600, 99);
  std::vector<LabeledExample> train(data.begin(), data.begin() + 480);
  std::vector<LabeledExample> val(data.begin() + 480, data.end());

  BaselineClassifier baseline;
  CHECK_FALSE(baseline.ready());
  CHECK_THROWS_AS(baseline.predict(Sentence{"runtime is 2000.0", "j", 1}), Error);

  TrainConfig config;
  config.epochs = 20;
  TrainReport report = baseline.fit(train, val, config);
  CHECK(baseline.ready());
  REQUIRE(report.epochs.size() == 20);
  CHECK(report.epochs.back().accuracy >= 0.95);

  // Threshold-oracle agreement: a midpoint cut separates these classes
  // perfectly, and the trained model should agree on fresh points.
  CHECK(baseline.predict(Sentence{"runtime is 2000.0", "p", 1}).label == Label::anomalous);
  CHECK(baseline.predict(Sentence{"runtime is 300.0", "p", 1}).label == Label::normal);

  SUBCASE("scores are calibrated to the argmax label") {
    for (const LabeledExample& ex : val) {
      Prediction pred = baseline.predict(ex.sentence);
      CHECK(pred.score >= 0.5);
      CHECK(pred.score <= 1.0);
    }
  }

  SUBCASE("deterministic mode is a pure function of state and text") {
    Sentence probe{"runtime is 977.0", "p", 1};
    Prediction a = baseline.predict(probe);
    Prediction b = baseline.predict(probe);
    CHECK(a.label == b.label);
    CHECK(a.score == b.score);
  }

  SUBCASE("model round-trip predicts identically on a probe set") {
    auto dir = temp_dir("baseline-model");
    save_model(baseline, dir / "m.json");
    nlohmann::json container = nlohmann::json::parse(read_file(dir / "m.json"));
    CHECK(container.at("format") == "wfad-model");
    CHECK(container.at("schema_hash") == baseline.schema_digest());
    CHECK_FALSE(baseline.schema_digest().empty());

    auto loaded = load_model(dir / "m.json");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
      double runtime = static_cast<double>(rng() % 4000);
      Sentence s{"runtime is " + render_value(runtime), "probe", 1};
      Prediction a = baseline.predict(s);
      Prediction b = loaded->predict(s);
      CHECK(a.label == b.label);
      CHECK(a.score == b.score);
    }

    save_model(*loaded, dir / "m2.json");
    CHECK(read_file(dir / "m.json") == read_file(dir / "m2.json"));
  }
}

TEST_CASE("deterministic predict is safe for concurrent callers") {
  MockBackend mock = runtime_rule_mock();
  std::vector<Sentence> prefixes = prefix_stream(reference_record(), reference_schema());
  std::vector<Prediction> expected = mock.predict_batch(prefixes);

  std::vector<std::thread> readers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    readers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) % prefixes.size();
        Prediction p = mock.predict(prefixes[k]);
        if (p.label != expected[k].label || p.score != expected[k].score) ++mismatches;
      }
    });
  }
  for (std::thread& t : readers) t.join();
  CHECK(mismatches == 0);
}

TEST_CASE("baseline rejects degenerate training sets") {
  FeatureSchema schema = reference_schema();
  std::vector<LabeledExample> single;
  for (int i = 0; i < 10; ++i) single.push_back(make_example(i, Label::normal, schema));

  BaselineClassifier baseline;
  try {
    baseline.fit(single, {}, {});
    FAIL("expected degenerate-data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_data);
  }
  CHECK_THROWS_AS(baseline.fit({}, {}, {}), Error);
}

TEST_CASE("baseline learnability on linearly separable margins") {
  // Margin well above one standardized unit; training accuracy must reach
  // 1.0 within the configured budget.
  std::vector<LabeledExample> train = separable_set(400, 3, 900.0, 100.0, 30.0);
  BaselineClassifier baseline;
  TrainConfig config;
  config.epochs = 60;
  baseline.fit(train, train, config);

  std::size_t correct = 0;
  for (const LabeledExample& ex : train)
    if (baseline.predict(ex.sentence).label == ex.label) ++correct;
  CHECK(correct == train.size());
}

TEST_CASE("freeze policy: head-only touches fewer parameters and keeps the body") {
  std::vector<LabeledExample> d1 = separable_set(300, 21);
  std::vector<LabeledExample> d2 = separable_set(300, 22, 1500.0, 200.0, 80.0);

  BaselineClassifier backend;
  TrainConfig all;
  all.epochs = 10;
  TrainReport first = backend.fit(d1, {}, all);
  long all_count = first.trainable_parameters;

  std::string standardizer = backend.parameter_digest("standardizer");
  std::string encoder = backend.parameter_digest("encoder");
  std::string head_before = backend.parameter_digest("head");

  TrainConfig head_only = all;
  head_only.freeze = FreezePolicy::head_only;
  TrainReport second = backend.fit(d2, {}, head_only);

  CHECK(second.trainable_parameters < all_count);
  CHECK(backend.parameter_digest("standardizer") == standardizer);
  CHECK(backend.parameter_digest("encoder") == encoder);
  CHECK(backend.parameter_digest("head") != head_before);

  CHECK(second.touched_parameters == std::vector<std::string>{"head"});
  for (const std::string& group : second.touched_parameters)
    CHECK(std::find(first.touched_parameters.begin(), first.touched_parameters.end(), group) !=
          first.touched_parameters.end());

  // Continuing with all parameters does move the encoder.
  TrainReport third = backend.fit(d2, {}, all);
  CHECK(backend.parameter_digest("encoder") != encoder);
  CHECK(third.touched_parameters ==
        std::vector<std::string>{"encoder", "head"});
}

TEST_CASE("train report carries one row per epoch and best epoch tracking") {
  std::vector<LabeledExample> data = separable_set(200, 8);
  std::vector<LabeledExample> val(data.begin() + 150, data.end());
  std::vector<LabeledExample> train(data.begin(), data.begin() + 150);

  BaselineClassifier backend;
  TrainConfig config;
  config.epochs = 7;
  TrainReport report = backend.fit(train, val, config);
  REQUIRE(report.epochs.size() == 7);
  for (int e = 0; e < 7; ++e) CHECK(report.epochs[static_cast<std::size_t>(e)].epoch == e + 1);
  CHECK(report.best_epoch >= 1);
  CHECK(report.best_epoch <= 7);
  CHECK(report.wall_seconds > 0.0);
}

TEST_CASE("invalid train configs are rejected") {
  TrainConfig config;
  config.epochs = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.adapter.lora_dropout = 1.0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.learning_rate = -1;
  CHECK_THROWS_AS(config.validate(), Error);
}
