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

#include "wfad/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "wfad/rng.hpp"

namespace wfad {

namespace {

constexpr double kRatioSumTolerance = 1e-9;

struct StratumAllocation {
  std::array<std::size_t, 3> counts{0, 0, 0};  // train, validation, test
};

// Largest-remainder apportionment of one stratum, with leftover slots going
// to the split with the biggest fractional remainder; ties fall to the split
// with the biggest global deficit against ratio*N, then to split order.
StratumAllocation apportion(std::size_t stratum_size, const std::array<double, 3>& ratios,
                            std::size_t total_size,
                            const std::array<std::size_t, 3>& assigned_so_far) {
  StratumAllocation alloc;
  std::array<double, 3> remainder{};
  std::size_t base_total = 0;
  for (int s = 0; s < 3; ++s) {
    double quota = ratios[s] * static_cast<double>(stratum_size);
    alloc.counts[s] = static_cast<std::size_t>(std::floor(quota));
    remainder[s] = quota - std::floor(quota);
    base_total += alloc.counts[s];
  }

  std::size_t leftover = stratum_size - base_total;
  std::array<std::size_t, 3> assigned = assigned_so_far;
  for (int s = 0; s < 3; ++s) assigned[s] += alloc.counts[s];

  while (leftover > 0) {
    int pick = -1;
    double best_remainder = -1.0;
    double best_deficit = 0.0;
    for (int s = 0; s < 3; ++s) {
      double deficit =
          ratios[s] * static_cast<double>(total_size) - static_cast<double>(assigned[s]);
      bool better = remainder[s] > best_remainder + 1e-12 ||
                    (std::abs(remainder[s] - best_remainder) <= 1e-12 &&
                     deficit > best_deficit + 1e-12);
      if (pick < 0 || better) {
        pick = s;
        best_remainder = remainder[s];
        best_deficit = deficit;
      }
    }
    alloc.counts[pick] += 1;
    assigned[pick] += 1;
    remainder[pick] = 0.0;
    --leftover;
  }
  return alloc;
}

std::string render_example_line(const LabeledExample& ex) {
  std::string line = ex.sentence.text;
  line += ", ";
  line += label_token(ex.label);
  line += '\t';
  line += ex.sentence.job_id;
  line += '\t';
  line += ex.workflow_id;
  line += '\t';
  line += std::to_string(ex.sentence.prefix_len);
  return line;
}

}  // namespace

SplitStats compute_stats(const std::vector<LabeledExample>& examples) {
  SplitStats stats;
  for (const LabeledExample& ex : examples) {
    if (ex.label == Label::anomalous)
      ++stats.count_anomalous;
    else
      ++stats.count_normal;
  }
  if (!examples.empty())
    stats.anomaly_fraction =
        static_cast<double>(stats.count_anomalous) / static_cast<double>(examples.size());
  return stats;
}

DatasetSplit split_examples(const std::vector<LabeledExample>& examples,
                            const SplitRatios& ratios, std::uint64_t seed,
                            bool stratified) {
  if (examples.empty()) throw Error(ErrorKind::empty_split, "no examples to split");
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0)
    throw Error(ErrorKind::config, "split ratios must all be positive");
  double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > kRatioSumTolerance)
    throw Error(ErrorKind::config, "split ratios must sum to 1");

  std::vector<std::vector<std::size_t>> strata;
  if (stratified) {
    std::vector<std::size_t> normal, anomalous;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      (examples[i].label == Label::normal ? normal : anomalous).push_back(i);
    }
    if (normal.empty() || anomalous.empty())
      throw Error(ErrorKind::input, "stratified split needs at least one example per class");
    strata.push_back(std::move(normal));
    strata.push_back(std::move(anomalous));
  } else {
    std::vector<std::size_t> all(examples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    strata.push_back(std::move(all));
  }

  const std::array<double, 3> r{ratios.train, ratios.validation, ratios.test};
  std::array<std::size_t, 3> assigned{0, 0, 0};
  std::mt19937_64 rng(seed);

  DatasetSplit out;
  for (std::vector<std::size_t>& stratum : strata) {
    deterministic_shuffle(stratum, rng);
    StratumAllocation alloc = apportion(stratum.size(), r, examples.size(), assigned);
    std::size_t cursor = 0;
    for (int s = 0; s < 3; ++s) {
      auto* dest = s == 0 ? &out.train : s == 1 ? &out.validation : &out.test;
      for (std::size_t k = 0; k < alloc.counts[s]; ++k)
        dest->push_back(examples[stratum[cursor++]]);
      assigned[s] += alloc.counts[s];
    }
  }

  out.train_stats = compute_stats(out.train);
  out.validation_stats = compute_stats(out.validation);
  out.test_stats = compute_stats(out.test);
  return out;
}

std::vector<LabeledExample> debias_augment(const std::vector<LabeledExample>& train,
                                           std::size_t copies) {
  std::vector<LabeledExample> out = train;
  out.reserve(train.size() + 2 * copies);
  for (std::size_t i = 0; i < copies; ++i) {
    for (Label label : {Label::normal, Label::anomalous}) {
      LabeledExample ex;
      ex.sentence.text = "";
      ex.sentence.prefix_len = 0;
      ex.sentence.job_id = "debias-" + std::to_string(i) + "-" + label_name(label);
      ex.label = label;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

void write_examples(const std::vector<LabeledExample>& examples,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::input, "cannot write dataset file '" + path.string() + "'");
  for (const LabeledExample& ex : examples) {
    out << render_example_line(ex) << '\n';
  }
}

std::vector<LabeledExample> read_examples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, "cannot open dataset file '" + path.string() + "'");

  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::format,
                path.filename().string() + ":" + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; (pos = line.find('\t', start)) != std::string::npos;
         start = pos + 1)
      fields.push_back(line.substr(start, pos - start));
    fields.push_back(line.substr(start));
    if (fields.size() != 4) fail("expected 4 tab-separated fields, got " +
                                 std::to_string(fields.size()));

    const std::string& body = fields[0];
    std::size_t comma = body.rfind(", ");
    if (comma == std::string::npos) fail("no label separator ', ' before final label");

    LabeledExample ex;
    ex.sentence.text = body.substr(0, comma);
    std::string token = body.substr(comma + 2);
    auto label = try_parse_label(token);
    if (!label) fail("unknown label token '" + token + "'");
    ex.label = *label;
    ex.sentence.job_id = fields[1];
    ex.workflow_id = fields[2];

    const std::string& plen = fields[3];
    std::size_t prefix_len = 0;
    auto res = std::from_chars(plen.data(), plen.data() + plen.size(), prefix_len);
    if (res.ec != std::errc() || res.ptr != plen.data() + plen.size())
      fail("bad prefix length '" + plen + "'");
    ex.sentence.prefix_len = prefix_len;
    if (clause_count(ex.sentence.text) != prefix_len)
      fail("prefix length " + plen + " does not match clause count");

    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

std::filesystem::path split_path(const std::filesystem::path& stem, const char* part) {
  std::filesystem::path p = stem;
  p += ".";
  p += part;
  p += ".txt";
  return p;
}

}  // namespace

void write_dataset(const DatasetSplit& split, const std::filesystem::path& stem) {
  write_examples(split.train, split_path(stem, "train"));
  write_examples(split.validation, split_path(stem, "validation"));
  write_examples(split.test, split_path(stem, "test"));
}

DatasetSplit read_dataset(const std::filesystem::path& stem) {
  DatasetSplit split;
  split.train = read_examples(split_path(stem, "train"));
  split.validation = read_examples(split_path(stem, "validation"));
  split.test = read_examples(split_path(stem, "test"));
  split.train_stats = compute_stats(split.train);
  split.validation_stats = compute_stats(split.validation);
  split.test_stats = compute_stats(split.test);
  return split;
}

}  // namespace wfad
