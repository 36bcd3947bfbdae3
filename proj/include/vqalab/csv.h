// Copyright 2026 The vqalab Authors. All Rights Reserved.
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

// Small CSV and file helpers shared by the modules and the CLI.

#ifndef VQALAB_CSV_H_
#define VQALAB_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vqalab::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws kSchemaError when absent.
  size_t Column(std::string_view name) const;
};

// Parses comma-separated text. Lines starting with '#' and blank lines are
// skipped; the first remaining line is the header. Quoting is not supported.
CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsv(const std::filesystem::path& path);

std::vector<std::string> Split(std::string_view s, char sep);
std::string Trim(std::string_view s);

double ParseDouble(std::string_view s);
long long ParseInt(std::string_view s);

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// Shortest round-trip decimal representation.
std::string FormatDouble(double v);

}  // namespace vqalab::io

#endif  // VQALAB_CSV_H_
