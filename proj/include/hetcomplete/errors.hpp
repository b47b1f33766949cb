// Copyright 2026 The hetcomplete Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HETCOMPLETE_ERRORS_HPP_
#define HETCOMPLETE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hetcomplete {

// Bad input data or configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a precondition (shape mismatch, empty split, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

#define HC_REQUIRE(cond, msg)                                     \
  do {                                                            \
    if (!(cond)) throw ::hetcomplete::ContractViolation(msg);     \
  } while (0)

}  // namespace hetcomplete

#endif  // HETCOMPLETE_ERRORS_HPP_
