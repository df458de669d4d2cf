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

#include "wfad/errors.hpp"

namespace wfad {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::label: return "label error";
    case ErrorKind::render: return "render error";
    case ErrorKind::bounds: return "bounds error";
    case ErrorKind::missing_feature: return "missing-feature error";
    case ErrorKind::empty_split: return "empty-split error";
    case ErrorKind::format: return "format error";
    case ErrorKind::degenerate_data: return "degenerate-data error";
    case ErrorKind::adapter: return "adapter error";
    case ErrorKind::state: return "state error";
    case ErrorKind::artifact: return "artifact error";
    case ErrorKind::pool: return "pool error";
    case ErrorKind::unparseable: return "unparseable-response error";
    case ErrorKind::sequencing: return "sequencing error";
    case ErrorKind::lifecycle: return "lifecycle error";
    case ErrorKind::input: return "input error";
    case ErrorKind::undefined_metric: return "undefined-metric error";
    case ErrorKind::probe: return "probe error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::parse:
    case ErrorKind::label:
    case ErrorKind::bounds:
    case ErrorKind::missing_feature:
    case ErrorKind::empty_split:
    case ErrorKind::format:
    case ErrorKind::pool:
    case ErrorKind::input:
    case ErrorKind::undefined_metric:
      return 3;
    case ErrorKind::render:
    case ErrorKind::degenerate_data:
    case ErrorKind::adapter:
    case ErrorKind::artifact:
    case ErrorKind::unparseable:
    case ErrorKind::probe:
      return 4;
    case ErrorKind::state:
    case ErrorKind::sequencing:
    case ErrorKind::lifecycle:
      return 5;
  }
  return 1;
}

}  // namespace wfad
