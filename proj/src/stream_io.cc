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

#include "dyncount/stream_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"

#include "dyncount/errors.h"

namespace dyncount {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

UpdateOp ParseOp(const json& u, std::size_t line) {
  if (!u.contains("op") || !u["op"].is_string()) Fail(line, "update needs \"op\"");
  const std::string op = u["op"];
  if (op == "ins") return UpdateOp::kInsert;
  if (op == "del") return UpdateOp::kDelete;
  if (op == "noop") return UpdateOp::kNoop;
  Fail(line, "unknown op '" + op + "'");
}

const char* OpName(UpdateOp op) {
  switch (op) {
    case UpdateOp::kInsert:
      return "ins";
    case UpdateOp::kDelete:
      return "del";
    case UpdateOp::kNoop:
      break;
  }
  return "noop";
}

}  // namespace

StreamFile ParseStreamFile(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  auto next_json = [&](json& out) {
    while (std::getline(in, text)) {
      ++line;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out = json::parse(text);
      } catch (const json::parse_error& e) {
        Fail(line, std::string("malformed JSON: ") + e.what());
      }
      if (!out.is_object()) Fail(line, "expected a JSON object");
      return true;
    }
    return false;
  };

  json header;
  if (!next_json(header)) throw DataError("line 1: missing header");
  const std::size_t header_line = line;
  if (!header.contains("kind") || !header["kind"].is_string()) {
    Fail(header_line, "header needs \"kind\"");
  }
  if (!header.contains("T") || !header["T"].is_number_integer() ||
      header["T"].get<std::int64_t>() < 1) {
    Fail(header_line, "header needs an integer \"T\" >= 1");
  }
  const std::string kind = header["kind"];
  const std::int64_t T = header["T"];
  if (kind != "item" && kind != "graph") {
    Fail(header_line, "kind must be \"item\" or \"graph\"");
  }
  const bool graph = kind == "graph";
  ItemStream items;
  GraphStream g;
  std::unordered_map<std::string, int> node_index;
  if (graph) {
    if (!header.contains("nodes") || !header["nodes"].is_array()) {
      Fail(header_line, "graph header needs \"nodes\"");
    }
    for (const json& n : header["nodes"]) {
      if (!n.is_string()) Fail(header_line, "node names must be strings");
      if (!node_index.emplace(n.get<std::string>(), g.nodes.size()).second) {
        Fail(header_line, "duplicate node '" + n.get<std::string>() + "'");
      }
      g.nodes.push_back(n);
    }
  }

  json step;
  std::int64_t t = 0;
  while (next_json(step)) {
    if (t >= T) Fail(line, "more step lines than T = " + std::to_string(T));
    if (!step.contains("t") || !step["t"].is_number_integer() ||
        step["t"].get<std::int64_t>() != t) {
      Fail(line, "expected \"t\": " + std::to_string(t));
    }
    if (!step.contains("updates") || !step["updates"].is_array()) {
      Fail(line, "step needs an \"updates\" array");
    }
    std::vector<ItemUpdate> item_batch;
    std::vector<EdgeUpdate> edge_batch;
    for (const json& u : step["updates"]) {
      if (!u.is_object()) Fail(line, "update must be an object");
      const UpdateOp op = ParseOp(u, line);
      if (op == UpdateOp::kNoop) {
        if (graph) {
          edge_batch.push_back({});
        } else {
          item_batch.push_back({});
        }
        continue;
      }
      if (!graph) {
        if (!u.contains("item") || !u["item"].is_string()) {
          Fail(line, "item update needs a string \"item\"");
        }
        item_batch.push_back({op, u["item"].get<std::string>()});
        continue;
      }
      if (!u.contains("edge") || !u["edge"].is_array() || u["edge"].size() != 2 ||
          !u["edge"][0].is_string() || !u["edge"][1].is_string()) {
        Fail(line, "edge update needs \"edge\": [a, b]");
      }
      const std::string a = u["edge"][0], b = u["edge"][1];
      const auto ia = node_index.find(a), ib = node_index.find(b);
      if (ia == node_index.end() || ib == node_index.end()) {
        Fail(line, "edge endpoint not in nodes");
      }
      if (ia->second == ib->second) Fail(line, "edge endpoints must differ");
      edge_batch.push_back({op, ia->second, ib->second});
    }
    if (graph) {
      g.steps.push_back(std::move(edge_batch));
    } else {
      items.steps.push_back(std::move(item_batch));
    }
    ++t;
  }
  if (t != T) {
    throw DataError("line " + std::to_string(line + 1) + ": expected " +
                    std::to_string(T) + " steps, found " + std::to_string(t));
  }
  if (graph) return g;
  return items;
}

StreamFile ReadStreamFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ParseStreamFile(in);
}

void WriteStreamFile(const StreamFile& stream, std::ostream& out) {
  if (const auto* items = std::get_if<ItemStream>(&stream)) {
    out << json{{"kind", "item"}, {"T", items->steps.size()}}.dump() << '\n';
    for (std::size_t t = 0; t < items->steps.size(); ++t) {
      json updates = json::array();
      for (const ItemUpdate& u : items->steps[t]) {
        if (u.op == UpdateOp::kNoop) {
          updates.push_back({{"op", "noop"}});
        } else {
          updates.push_back({{"op", OpName(u.op)}, {"item", u.item}});
        }
      }
      out << json{{"t", t}, {"updates", updates}}.dump() << '\n';
    }
    return;
  }
  const auto& g = std::get<GraphStream>(stream);
  out << json{{"kind", "graph"}, {"T", g.steps.size()}, {"nodes", g.nodes}}.dump()
      << '\n';
  for (std::size_t t = 0; t < g.steps.size(); ++t) {
    json updates = json::array();
    for (const EdgeUpdate& u : g.steps[t]) {
      if (u.op == UpdateOp::kNoop) {
        updates.push_back({{"op", "noop"}});
      } else {
        updates.push_back({{"op", OpName(u.op)},
                           {"edge", {g.nodes[u.a], g.nodes[u.b]}}});
      }
    }
    out << json{{"t", t}, {"updates", updates}}.dump() << '\n';
  }
}

std::string FormatNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x,
                               std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out_ << f;
      continue;
    }
    out_ << '"';
    for (char c : f) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  out_ << '\n';
}

std::vector<std::vector<std::string>> ParseCsv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dyncount
