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

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfad/errors.hpp"

namespace wfad {

enum class Label { normal, anomalous };

/// Canonical dataset-file tokens: "Normal" / "Abnormal".
const char* label_token(Label label);
/// Lowercase names used in reports and the CLI: "normal" / "anomalous".
const char* label_name(Label label);

/// Accepts {0, 1, normal, abnormal, anomalous} case-insensitively.
/// Throws Error(label) for anything else.
Label parse_label(const std::string& token);
std::optional<Label> try_parse_label(const std::string& token);

enum class FeatureKind { duration_seconds, bytes, count, ratio };

FeatureKind parse_feature_kind(const std::string& name);
const char* feature_kind_name(FeatureKind kind);

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::duration_seconds;
};

/// Ordered feature list plus the value-rendering policy. Order is total and
/// stable: serializing the same record twice is byte-identical.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<Feature> features, std::string render_policy = "default");

  const std::vector<Feature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const std::string& render_policy() const { return render_policy_; }
  const Feature& at(std::size_t i) const { return features_.at(i); }

  /// Position of `name` in schema order, or nullopt when absent.
  std::optional<std::size_t> index_of(const std::string& name) const;

 private:
  std::vector<Feature> features_;
  std::string render_policy_{"default"};
};

struct JobRecord {
  std::string job_id;
  std::string workflow_id;
  std::map<std::string, double> values;  // feature name -> value, missing allowed
  std::optional<Label> label;
};

/// A (possibly prefix-truncated) serialized job. prefix_len always equals
/// the number of " is " clauses in text; 0 iff text is empty.
struct Sentence {
  std::string text;
  std::string job_id;
  std::size_t prefix_len = 0;

  bool operator==(const Sentence&) const = default;
};

/// Number of " is " clauses in a serialized sentence.
std::size_t clause_count(const std::string& text);

/// Renders a finite value under a named policy. The default policy writes
/// integral values with one trailing decimal ("6.0") and everything else
/// with the shortest decimal that round-trips. Throws Error(render) for
/// non-finite input and Error(config) for an unknown policy name.
std::string render_value(double value, const std::string& policy = "default");

enum class MissingFeaturePolicy {
  skip_clause,  // omit the clause and keep going (default)
  strict,       // raise Error(missing_feature)
};

/// Serializes the first `upto` schema features of a record into the
/// "<name> is <value>" clause form, clauses joined by single spaces.
/// The label is never embedded here; that is the dataset file's concern.
Sentence serialize(const JobRecord& record, const FeatureSchema& schema,
                   std::size_t upto,
                   MissingFeaturePolicy missing = MissingFeaturePolicy::skip_clause);

/// Growing prefixes of a record, one element per present feature. Element k
/// (1-based) covers the first k present features, so each text is a string
/// prefix of the next.
std::vector<Sentence> prefix_stream(const JobRecord& record, const FeatureSchema& schema);

/// Inverse of the clause grammar: recovers (name, rendered value) pairs.
/// Used by the trainable baseline and the round-trip tests.
std::vector<std::pair<std::string, std::string>> parse_clauses(const std::string& text);

struct LoadOptions {
  char delimiter = '\0';  // '\0' = sniff: tab when the header contains one, else comma
  std::string label_column = "label";
  std::string job_id_column = "job_id";
  std::string workflow_id_column = "workflow_id";
  bool require_labels = false;   // inference mode tolerates an absent label column
  bool allow_extra_columns = true;
};

/// Parses a delimited table (header row required) into one JobRecord per
/// row. Empty cells become missing features; non-numeric cells raise
/// Error(parse) naming the row and column.
std::vector<JobRecord> load_table(std::istream& source, const FeatureSchema& schema,
                                  const LoadOptions& options = {});
std::vector<JobRecord> load_table_file(const std::string& path, const FeatureSchema& schema,
                                       const LoadOptions& options = {});

}  // namespace wfad
