//
// Copyright 2026 The dyncount Authors.
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
//

// JSON-lines stream files and locale-independent CSV.
//
// A stream file starts with a header line
//   {"kind": "item" | "graph", "T": <int>, "nodes": [<string>, ...]}
// ("nodes" for graphs only), followed by exactly T step lines
//   {"t": <int>, "updates": [<update>, ...]}
// with t = 0, 1, ..., T-1. An update is {"op": "ins"|"del", "item": <string>},
// {"op": "ins"|"del", "edge": [<string>, <string>]} or {"op": "noop"}.

#ifndef DYNCOUNT_STREAM_IO_H_
#define DYNCOUNT_STREAM_IO_H_

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dyncount/estimators.h"

namespace dyncount {

using StreamFile = std::variant<ItemStream, GraphStream>;

// Throws DataError naming the 1-based line of the first problem.
StreamFile ParseStreamFile(std::istream& in);
StreamFile ReadStreamFile(const std::string& path);

void WriteStreamFile(const StreamFile& stream, std::ostream& out);

// Shortest round-trip-safe text with at most 12 significant digits, '.'
// decimal point, independent of the global locale.
std::string FormatNumber(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void Row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

// Parses CSV with optional double-quoted fields. Throws DataError.
std::vector<std::vector<std::string>> ParseCsv(std::istream& in);

}  // namespace dyncount

#endif  // DYNCOUNT_STREAM_IO_H_
