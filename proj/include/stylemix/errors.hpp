// Copyright 2026 The Stylemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stylemix {

// Bad user input: malformed config files, out-of-range arguments,
// mismatched model geometry. The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pipeline stage was invoked before the stage that produces its input.
struct DependencyError : std::runtime_error {
  explicit DependencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loop diverged (NaN loss or similar).
struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Latent optimization aborted; carries the best-loss trace up to the abort.
struct InversionError : std::runtime_error {
  InversionError(const std::string& msg, std::vector<double> trace)
      : std::runtime_error(msg), partial_trace(std::move(trace)) {}
  std::vector<double> partial_trace;
};

}  // namespace stylemix
