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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wfad/ingest.hpp"

namespace wfad {

struct LabeledExample {
  Sentence sentence;
  Label label = Label::normal;
  std::string workflow_id;

  bool operator==(const LabeledExample&) const = default;
};

struct SplitStats {
  std::size_t count_normal = 0;
  std::size_t count_anomalous = 0;
  double anomaly_fraction = 0.0;

  std::size_t total() const { return count_normal + count_anomalous; }
};

SplitStats compute_stats(const std::vector<LabeledExample>& examples);

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> test;
  SplitStats train_stats;
  SplitStats validation_stats;
  SplitStats test_stats;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Partitions examples into train/validation/test.
///
/// Each stratum (per label when stratified, the whole input otherwise) is
/// shuffled with a seeded generator and apportioned by largest remainder:
/// floor the per-split quotas, then hand leftover slots to the split with
/// the largest fractional remainder, breaking ties by the largest global
/// deficit against ratio*N and finally by split order (train, val, test).
/// Deterministic under (input order, seed); sizes are within one of
/// ratio * stratum size.
DatasetSplit split_examples(const std::vector<LabeledExample>& examples,
                            const SplitRatios& ratios, std::uint64_t seed,
                            bool stratified = true);

/// Appends `copies` pairs of empty-sentence examples, alternating
/// (normal, anomalous), to an otherwise untouched copy of the input.
std::vector<LabeledExample> debias_augment(const std::vector<LabeledExample>& train,
                                           std::size_t copies);

// Dataset files are line-oriented UTF-8, one example per line:
//   <sentence text>, <Label>\t<job_id>\t<workflow_id>\t<prefix_len>
// with the label after the final comma. write/read round-trips exactly and
// the bytes are stable given the same examples.

void write_examples(const std::vector<LabeledExample>& examples,
                    const std::filesystem::path& path);
std::vector<LabeledExample> read_examples(const std::filesystem::path& path);

/// Writes <stem>.train.txt / <stem>.validation.txt / <stem>.test.txt.
void write_dataset(const DatasetSplit& split, const std::filesystem::path& stem);
DatasetSplit read_dataset(const std::filesystem::path& stem);

}  // namespace wfad
