// Copyright 2026 The unicap Authors
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

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace unicap {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whitespace-separated numbers; blank lines and anything after '#' ignored.
std::vector<double> read_numbers(std::istream& in);

/// Named column of a comma-separated file whose first non-comment line is a
/// header.
std::vector<double> read_csv_column(std::istream& in, const std::string& column);

/// Opens `path` and dispatches to read_numbers or read_csv_column (when
/// `column` is non-empty).
std::vector<double> load_sample(const std::filesystem::path& path, const std::string& column = {});

}  // namespace unicap
