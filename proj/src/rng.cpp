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

#include "wfad/rng.hpp"

#include "wfad/errors.hpp"

namespace wfad {

std::vector<std::size_t> sample_without_replacement(std::size_t pool_size, std::size_t count,
                                                    std::mt19937_64& rng) {
  if (count > pool_size)
    throw Error(ErrorKind::bounds, "cannot sample " + std::to_string(count) + " from " +
                                       std::to_string(pool_size));
  std::vector<std::size_t> indices(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) indices[i] = i;
  // Partial Fisher-Yates: the first `count` slots are the sample, in order.
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, pool_size - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  return indices;
}

}  // namespace wfad
