// Copyright 2026 The qdev Authors
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

// Built-in qubit devices and the relation table they populate.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdev/compat.hpp"
#include "qdev/devices.hpp"

namespace qdev::fixtures {

inline Effect px() { return Effect(pauli::projector('x')); }
inline Effect pz() { return Effect(pauli::projector('z')); }
inline Effect half_identity() { return Effect(0.5 * identity(2)); }

inline CPMap luders_px() { return luders(px()); }
inline CPMap luders_pz() { return luders(pz()); }
inline CPMap half_luders_px() { return scaled(luders_px(), 0.5); }

/// ρ ↦ ½σxρσx.
inline CPMap half_sigma_x() { return kraus_map(pauli::x() / std::sqrt(2.0)); }

/// Lüders operation of A = Pz + ½P₋z.
inline CPMap luders_soft_z() {
  return luders(Effect(pauli::projector('z') + 0.5 * pauli::projector('z', -1)));
}

/// ρ ↦ PxρPx + P₋xρP₋x = ½ρ + ½σxρσx.
inline CPMap dephasing_x() {
  return choi_from_kraus(KrausSet({pauli::projector('x'), pauli::projector('x', -1)}));
}

/// Lüders instrument of the σx measurement, outcomes "+" and "-".
inline Instrument luders_x_instrument() {
  return Instrument({"+", "-"}, {luders_px(), luders(Effect(pauli::projector('x', -1)))});
}

inline std::map<std::string, Device> registry() {
  return {
      {"px", px()},
      {"pz", pz()},
      {"half_identity", half_identity()},
      {"luders_px", luders_px()},
      {"luders_pz", luders_pz()},
      {"half_luders_px", half_luders_px()},
      {"half_sigma_x", half_sigma_x()},
      {"luders_soft_z", luders_soft_z()},
      {"dephasing_x", dephasing_x()},
      {"luders_x_instrument", luders_x_instrument()},
  };
}

/// One cell of the relation table: a device pair exhibiting the relation,
/// or none when the relation is impossible for that column.
struct TableCell {
  Relation row;
  std::string column;
  std::optional<std::pair<std::string, std::string>> pair;
  bool highlighted = false;
};

inline std::vector<std::string> table_columns() { return {"op-op", "op-ef", "ef-ef"}; }

inline std::vector<Relation> table_rows() {
  return {Relation::compatible, Relation::weakly_compatible_only, Relation::strongly_incompatible};
}

inline std::vector<TableCell> table_cells() {
  using R = Relation;
  return {
      {R::compatible, "op-op", std::make_pair("luders_px", "half_luders_px"), false},
      {R::compatible, "op-ef", std::make_pair("luders_pz", "pz"), false},
      {R::compatible, "ef-ef", std::make_pair("pz", "half_identity"), false},
      {R::weakly_compatible_only, "op-op", std::make_pair("luders_px", "half_sigma_x"), true},
      {R::weakly_compatible_only, "op-ef", std::make_pair("px", "luders_pz"), true},
      {R::weakly_compatible_only, "ef-ef", std::make_pair("px", "pz"), false},
      {R::strongly_incompatible, "op-op", std::make_pair("luders_px", "luders_pz"), true},
      {R::strongly_incompatible, "op-ef", std::make_pair("px", "luders_soft_z"), true},
      {R::strongly_incompatible, "ef-ef", std::nullopt, false},
  };
}

inline std::string_view row_title(Relation r) {
  switch (r) {
    case Relation::compatible: return "compatible";
    case Relation::weakly_compatible_only: return "incompatible but weakly compatible";
    case Relation::strongly_incompatible: return "strongly incompatible";
    case Relation::undecided: return "undecided";
  }
  return "";
}

struct TableResult {
  TableCell cell;
  std::optional<Verdict> verdict;
  bool reproduced = false;
};

/// Classifies every populated cell; a cell is reproduced when its pair lands
/// on the cell's row. Empty cells are reproduced by construction: effect
/// pairs always get the contraction witness.
inline std::vector<TableResult> run_table(const DecideOptions& opt = {}) {
  const auto reg = registry();
  std::vector<TableResult> out;
  for (const auto& cell : table_cells()) {
    TableResult r{cell, std::nullopt, false};
    if (cell.pair) {
      r.verdict = classify(reg.at(cell.pair->first), reg.at(cell.pair->second), opt);
      r.reproduced = r.verdict->relation == cell.row;
    } else {
      r.reproduced = true;
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// "✓" populated and reproduced, "(✓)" the highlighted demonstrations,
/// "×" impossible, "!" a pair that did not land on its row.
inline std::string cell_mark(const TableResult& r) {
  if (!r.cell.pair) return "×";
  if (!r.reproduced) return "!";
  return r.cell.highlighted ? "(✓)" : "✓";
}

}  // namespace qdev::fixtures
