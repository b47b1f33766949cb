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


// File helpers shared by the command-line tools.

#ifndef HETCOMPLETE_IO_HPP_
#define HETCOMPLETE_IO_HPP_

#include <string>

#include "json.hpp"

namespace hetcomplete {

// Throws ValidationError if the file is unreadable or not valid JSON.
nlohmann::json load_json(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file. Throws std::runtime_error on I/O failure.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_IO_HPP_
