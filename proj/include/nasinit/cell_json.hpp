// Copyright 2026 The nasinit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Cell JSON: {"adjacency": [[0,1],[0,0]], "ops": ["input","output"]}

#include <string>

#include <json.hpp>

#include "nasinit/arch_space.hpp"

namespace nasinit {

inline nlohmann::json cell_to_json(const CellSpec& cell) {
  nlohmann::json ops = nlohmann::json::array();
  for (Op op : cell.ops) ops.push_back(std::string(op_name(op)));
  return {{"adjacency", cell.adjacency}, {"ops", ops}};
}

// Structural problems are reported as MalformedCell; cell validity is not
// checked here.
inline CellSpec cell_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("adjacency") || !j.contains("ops"))
    throw MalformedCell("cell object needs 'adjacency' and 'ops'");
  const auto& adj = j.at("adjacency");
  const auto& ops = j.at("ops");
  if (!adj.is_array() || !ops.is_array())
    throw MalformedCell("'adjacency' and 'ops' must be arrays");
  CellSpec cell;
  for (const auto& row : adj) {
    if (!row.is_array()) throw MalformedCell("adjacency row must be an array");
    std::vector<int> r;
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw MalformedCell("adjacency entry must be an integer");
      r.push_back(v.get<int>());
    }
    cell.adjacency.push_back(std::move(r));
  }
  for (const auto& op : ops) {
    if (!op.is_string()) throw MalformedCell("op must be a string");
    try {
      cell.ops.push_back(op_from_name(op.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw MalformedCell(e.what());
    }
  }
  check_well_formed(cell);
  return cell;
}

}  // namespace nasinit
