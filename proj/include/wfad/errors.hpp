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

#include <stdexcept>
#include <string>

namespace wfad {

/// Error classes used across the toolkit. The CLI maps each class to a
/// fixed process exit code (see exit_code_for).
enum class ErrorKind {
  config,            // invalid configuration value or document
  parse,             // malformed tabular cell / event record
  label,             // unknown label token at ingest time
  render,            // non-finite value handed to the value renderer
  bounds,            // index or k out of range
  missing_feature,   // strict serialization hit an absent feature
  empty_split,       // split over an empty example list
  format,            // malformed dataset file (carries a line number)
  degenerate_data,   // single-class training set for a trainable backend
  adapter,           // external model endpoint failure
  state,             // operation on an unready backend
  artifact,          // bad model file: wrong format, version, or corruption
  pool,              // example pool too small for the selection policy
  unparseable,       // no label vocabulary token in a model response
  sequencing,        // out-of-order feature in strict online mode
  lifecycle,         // observe/finalize on an unknown or sealed job
  input,             // caller-supplied data violates a precondition
  undefined_metric,  // metric undefined for the input (e.g. single-class AUC)
  probe,             // backend rejected the bias-probe input
};

const char* error_kind_name(ErrorKind kind);

/// Exit code the CLI uses for an error class: 2 config, 3 input/data,
/// 4 backend/adapter/artifact, 5 state/lifecycle, 1 anything else.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wfad
