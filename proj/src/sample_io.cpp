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

#include "unicap/sample_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace unicap {
namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim(f));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<double> read_numbers(std::istream& in) {
  std::vector<double> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream tokens(strip_comment(line));
    for (std::string tok; tokens >> tok;) out.push_back(parse_double(tok, line_no));
  }
  return out;
}

std::vector<double> read_csv_column(std::istream& in, const std::string& column) {
  std::vector<double> out;
  std::size_t line_no = 0;
  std::ptrdiff_t index = -1;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto fields = split_csv(body);
    if (index < 0) {
      const auto it = std::find(fields.begin(), fields.end(), column);
      if (it == fields.end()) throw ParseError("column '" + column + "' not found in header");
      index = it - fields.begin();
      continue;
    }
    if (static_cast<std::size_t>(index) >= fields.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": missing column '" + column + "'");
    }
    const std::string& cell = fields[index];
    if (cell.empty()) continue;
    out.push_back(parse_double(cell, line_no));
  }
  if (index < 0) throw ParseError("empty CSV input");
  return out;
}

std::vector<double> load_sample(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return column.empty() ? read_numbers(in) : read_csv_column(in, column);
}

}  // namespace unicap
