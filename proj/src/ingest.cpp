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

#include "wfad/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace wfad {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

}  // namespace

const char* label_token(Label label) {
  return label == Label::normal ? "Normal" : "Abnormal";
}

const char* label_name(Label label) {
  return label == Label::normal ? "normal" : "anomalous";
}

std::optional<Label> try_parse_label(const std::string& token) {
  std::string t = to_lower(trim(token));
  if (t == "0" || t == "normal") return Label::normal;
  if (t == "1" || t == "abnormal" || t == "anomalous") return Label::anomalous;
  return std::nullopt;
}

Label parse_label(const std::string& token) {
  if (auto l = try_parse_label(token)) return *l;
  throw Error(ErrorKind::label, "unknown label token '" + token + "'");
}

FeatureKind parse_feature_kind(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "duration-seconds") return FeatureKind::duration_seconds;
  if (n == "bytes") return FeatureKind::bytes;
  if (n == "count") return FeatureKind::count;
  if (n == "ratio") return FeatureKind::ratio;
  throw Error(ErrorKind::config, "unknown feature kind '" + name + "'");
}

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::duration_seconds: return "duration-seconds";
    case FeatureKind::bytes: return "bytes";
    case FeatureKind::count: return "count";
    case FeatureKind::ratio: return "ratio";
  }
  return "duration-seconds";
}

FeatureSchema::FeatureSchema(std::vector<Feature> features, std::string render_policy)
    : features_(std::move(features)), render_policy_(std::move(render_policy)) {
  std::set<std::string> seen;
  for (const Feature& f : features_) {
    if (f.name.empty())
      throw Error(ErrorKind::config, "schema feature name must be non-empty");
    if (f.name == "is")
      throw Error(ErrorKind::config, "feature name 'is' would break the clause grammar");
    if (f.name.find_first_of(" \t,") != std::string::npos)
      throw Error(ErrorKind::config,
                  "feature name '" + f.name + "' contains whitespace or a comma");
    if (!seen.insert(f.name).second)
      throw Error(ErrorKind::config, "duplicate schema feature '" + f.name + "'");
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::size_t clause_count(const std::string& text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(" is ", pos)) != std::string::npos) {
    ++count;
    pos += 4;
  }
  return count;
}

std::string render_value(double value, const std::string& policy) {
  if (policy != "default")
    throw Error(ErrorKind::config, "unknown render policy '" + policy + "'");
  if (!std::isfinite(value))
    throw Error(ErrorKind::render, "cannot render non-finite value");

  char buf[64];
  // Integral values within exact long long range get one trailing decimal
  // ("6.0"); everything else is the shortest round-trip decimal.
  if (value == std::trunc(value) && std::abs(value) < 9.0e15) {
    auto ll = static_cast<long long>(value);
    auto res = std::to_chars(buf, buf + sizeof buf, ll);
    return std::string(buf, res.ptr) + ".0";
  }
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Sentence serialize(const JobRecord& record, const FeatureSchema& schema,
                   std::size_t upto, MissingFeaturePolicy missing) {
  if (upto > schema.size())
    throw Error(ErrorKind::bounds,
                "prefix length " + std::to_string(upto) + " exceeds schema size " +
                    std::to_string(schema.size()));

  Sentence out;
  out.job_id = record.job_id;
  for (std::size_t i = 0; i < upto; ++i) {
    const Feature& feature = schema.at(i);
    auto it = record.values.find(feature.name);
    if (it == record.values.end()) {
      if (missing == MissingFeaturePolicy::strict)
        throw Error(ErrorKind::missing_feature,
                    "feature '" + feature.name + "' missing for job '" + record.job_id + "'");
      continue;
    }
    if (!out.text.empty()) out.text += ' ';
    out.text += feature.name;
    out.text += " is ";
    out.text += render_value(it->second, schema.render_policy());
    ++out.prefix_len;
  }
  return out;
}

std::vector<Sentence> prefix_stream(const JobRecord& record, const FeatureSchema& schema) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (record.values.find(schema.at(i).name) == record.values.end()) continue;
    out.push_back(serialize(record, schema, i + 1));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_clauses(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  if (text.empty()) return out;

  std::vector<std::string> tokens = split_line(text, ' ');
  if (tokens.size() % 3 != 0)
    throw Error(ErrorKind::parse, "clause text does not tokenize into name/is/value triplets");
  for (std::size_t i = 0; i < tokens.size(); i += 3) {
    if (tokens[i + 1] != "is")
      throw Error(ErrorKind::parse, "expected 'is' in clause, got '" + tokens[i + 1] + "'");
    out.emplace_back(tokens[i], tokens[i + 2]);
  }
  return out;
}

std::vector<JobRecord> load_table(std::istream& source, const FeatureSchema& schema,
                                  const LoadOptions& options) {
  std::string header;
  if (!std::getline(source, header)) return {};
  if (!header.empty() && header.back() == '\r') header.pop_back();

  char delim = options.delimiter;
  if (delim == '\0') delim = header.find('\t') != std::string::npos ? '\t' : ',';

  std::vector<std::string> columns = split_line(header, delim);
  for (std::string& c : columns) c = trim(c);

  auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  };

  std::vector<std::size_t> feature_columns;
  for (const Feature& f : schema.features()) {
    auto idx = column_index(f.name);
    if (!idx)
      throw Error(ErrorKind::parse, "schema feature '" + f.name + "' has no column in header");
    feature_columns.push_back(*idx);
  }

  if (!options.allow_extra_columns) {
    for (const std::string& c : columns) {
      if (schema.index_of(c)) continue;
      if (c == options.label_column || c == options.job_id_column ||
          c == options.workflow_id_column)
        continue;
      throw Error(ErrorKind::config, "unexpected column '" + c + "' in strict-column mode");
    }
  }

  auto label_idx = column_index(options.label_column);
  if (options.require_labels && !label_idx)
    throw Error(ErrorKind::label, "label column '" + options.label_column + "' not found");
  auto job_idx = column_index(options.job_id_column);
  auto wf_idx = column_index(options.workflow_id_column);

  std::vector<JobRecord> records;
  std::string line;
  std::size_t row = 1;  // header is row 1
  while (std::getline(source, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    std::vector<std::string> cells = split_line(line, delim);
    auto cell_at = [&](std::size_t i) -> std::string {
      return i < cells.size() ? trim(cells[i]) : "";
    };

    JobRecord record;
    record.job_id = job_idx ? cell_at(*job_idx) : "r" + std::to_string(row - 1);
    if (record.job_id.empty()) record.job_id = "r" + std::to_string(row - 1);
    if (wf_idx) record.workflow_id = cell_at(*wf_idx);

    for (std::size_t k = 0; k < feature_columns.size(); ++k) {
      const std::string cell = cell_at(feature_columns[k]);
      if (cell.empty()) continue;  // missing value
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      double value = 0;
      auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc() || res.ptr != end)
        throw Error(ErrorKind::parse, "non-numeric cell '" + cell + "' at row " +
                                          std::to_string(row) + ", column '" +
                                          schema.at(k).name + "'");
      record.values[schema.at(k).name] = value;
    }

    if (label_idx) {
      const std::string token = cell_at(*label_idx);
      if (!token.empty()) {
        record.label = parse_label(token);
      } else if (options.require_labels) {
        throw Error(ErrorKind::label, "empty label at row " + std::to_string(row));
      }
    } else if (options.require_labels) {
      throw Error(ErrorKind::label, "label column missing and labels are required");
    }

    records.push_back(std::move(record));
  }
  return records;
}

std::vector<JobRecord> load_table_file(const std::string& path, const FeatureSchema& schema,
                                       const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::input, "cannot open table file '" + path + "'");
  return load_table(in, schema, options);
}

}  // namespace wfad
