// Copyright 2026 The p804kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace p804::csv {

using Row = std::vector<std::string>;

/// RFC 4180 quoting: fields with a comma, quote or line break are quoted.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

/// Reads one record (quoted fields may span lines). False at end of input.
bool read_row(std::istream& in, Row& row);

struct Table {
  Row header;
  std::vector<Row> rows;

  /// Index of a header column; throws Error("invalid-input") if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

Table read_table(std::istream& in);

}  // namespace p804::csv
