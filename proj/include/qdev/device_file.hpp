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

// JSON device files:
//
//   {"devices": [{"name": "px", "type": "effect", "dims": [2],
//                 "payload": {"matrix": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}}]}
//
// Complex entries are [re, im] (a bare number is read as real); matrices are
// row-major nested arrays. Payloads by type:
//   effect       {"matrix": M}                                  dims [d]
//   observable   {"outcomes": [..], "effects": {label: M}}      dims [d]
//   operation,   {"kraus": [M, ..]} or {"choi": M}              dims [dH, dK]
//   channel
//   instrument   {"outcomes": [..], "branches": {label: map}}   dims [dH, dK]
//   model        {"eta": M, "u": M, "pointer": observable}      dims [dH, dK]

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qdev/devices.hpp"
#include "qdev/memo.hpp"

namespace qdev::io {

using json = nlohmann::json;

using Entry = std::variant<Device, MeasurementModel>;

struct DeviceFile {
  std::vector<std::string> names;  // file order
  std::map<std::string, Entry> entries;

  const Entry& at(const std::string& name) const {
    const auto it = entries.find(name);
    if (it == entries.end()) fail(ErrorCode::unknown_label, "no device named '" + name + "'");
    return it->second;
  }

  const Device& device(const std::string& name) const {
    const auto* d = std::get_if<Device>(&at(name));
    if (!d) fail(ErrorCode::parse_error, "'" + name + "' is a model, not a device");
    return *d;
  }
};

namespace detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::parse_error, where + ": " + what);
}

inline cplx parse_scalar(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  bad(where, "complex entry must be [re, im] or a number");
}

inline ComplexMatrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) bad(where, "matrix must be a nested array");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) bad(where, "ragged matrix row " + std::to_string(r));
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_scalar(row[static_cast<std::size_t>(c)], where);
  }
  require_finite(m, where);
  return m;
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline std::vector<Index> parse_dims(const json& j, std::size_t count, const std::string& where) {
  if (!j.is_array() || j.size() != count) bad(where, "dims must list " + std::to_string(count) + " sizes");
  std::vector<Index> out;
  for (const auto& d : j) {
    if (!d.is_number_integer() || d.get<long>() <= 0) bad(where, "dims must be positive integers");
    out.push_back(static_cast<Index>(d.get<long>()));
  }
  return out;
}

inline void require_side(const ComplexMatrix& m, Index rows, Index cols, const std::string& where) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(ErrorCode::dimension_mismatch, where + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                                            ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline LabelSet parse_labels(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where, "outcomes must be a non-empty array of strings");
  LabelSet out;
  for (const auto& l : j) {
    if (!l.is_string()) bad(where, "outcome labels must be strings");
    out.push_back(l.get<std::string>());
  }
  return out;
}

inline Observable parse_observable(const json& p, Index d, const Tolerances& tol, const std::string& where) {
  const LabelSet outcomes = parse_labels(field(p, "outcomes", where), where);
  const json& effects = field(p, "effects", where);
  std::vector<std::pair<Label, ComplexMatrix>> entries;
  for (const auto& l : outcomes) {
    const ComplexMatrix m = parse_matrix(field(effects, l.c_str(), where), where + "/" + l);
    require_side(m, d, d, where + "/" + l);
    entries.emplace_back(l, m);
  }
  if (effects.size() != outcomes.size()) bad(where, "effects and outcomes differ");
  return Observable(std::move(entries), tol);
}

inline CPMap parse_map(const json& p, Index dh, Index dk, const Tolerances& tol, const std::string& where) {
  if (p.is_object() && p.contains("kraus")) {
    const json& ks = p.at("kraus");
    if (!ks.is_array() || ks.empty()) bad(where, "kraus must be a non-empty array");
    std::vector<ComplexMatrix> ops;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      ops.push_back(parse_matrix(ks[i], where + "/kraus"));
      require_side(ops.back(), dk, dh, where + "/kraus");
    }
    return choi_from_kraus(KrausSet(dh, dk, std::move(ops), tol), tol);
  }
  if (p.is_object() && p.contains("choi")) {
    ComplexMatrix j = parse_matrix(p.at("choi"), where + "/choi");
    require_side(j, dh * dk, dh * dk, where + "/choi");
    return CPMap(dh, dk, std::move(j), tol);
  }
  bad(where, "map payload needs 'kraus' or 'choi'");
}

inline Instrument parse_instrument(const json& p, Index dh, Index dk, const Tolerances& tol,
                                   const std::string& where) {
  const LabelSet outcomes = parse_labels(field(p, "outcomes", where), where);
  const json& branches = field(p, "branches", where);
  if (branches.size() != outcomes.size()) bad(where, "branches and outcomes differ");
  std::vector<CPMap> maps;
  for (const auto& l : outcomes) maps.push_back(parse_map(field(branches, l.c_str(), where), dh, dk, tol, where + "/" + l));
  return Instrument(outcomes, std::move(maps), tol);
}

inline Entry parse_entry(const json& e, const Tolerances& tol, const std::string& where) {
  const json& type_j = field(e, "type", where);
  if (!type_j.is_string()) bad(where, "type must be a string");
  const std::string type = type_j.get<std::string>();
  const json& dims = field(e, "dims", where);
  const json& p = field(e, "payload", where);
  if (type == "effect") {
    const Index d = parse_dims(dims, 1, where)[0];
    const ComplexMatrix m = parse_matrix(field(p, "matrix", where), where);
    require_side(m, d, d, where);
    return Device(Effect(m, tol));
  }
  if (type == "observable") return Device(parse_observable(p, parse_dims(dims, 1, where)[0], tol, where));
  if (type == "operation" || type == "channel") {
    const auto d = parse_dims(dims, 2, where);
    CPMap m = parse_map(p, d[0], d[1], tol, where);
    if (type == "channel" && !m.is_channel()) fail(ErrorCode::not_a_channel, where + ": map is not trace preserving");
    return Device(std::move(m));
  }
  if (type == "instrument") {
    const auto d = parse_dims(dims, 2, where);
    return Device(parse_instrument(p, d[0], d[1], tol, where));
  }
  if (type == "model") {
    const auto d = parse_dims(dims, 2, where);
    const ComplexMatrix eta = parse_matrix(field(p, "eta", where), where + "/eta");
    const ComplexMatrix u = parse_matrix(field(p, "u", where), where + "/u");
    if (u.rows() % d[1] != 0) fail(ErrorCode::dimension_mismatch, where + ": coupling size is not a multiple of dK");
    const Index dv2 = u.rows() / d[1];
    return MeasurementModel(d[0], d[1], eta, u, parse_observable(field(p, "pointer", where), dv2, tol, where + "/pointer"),
                            tol);
  }
  bad(where, "unknown device type '" + type + "'");
}

}  // namespace detail

inline DeviceFile parse_device_file(const std::string& text, const Tolerances& tol = {}) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse_error, std::string("malformed JSON: ") + e.what());
  }
  const json& list = detail::field(doc, "devices", "file");
  if (!list.is_array()) detail::bad("file", "'devices' must be an array");
  DeviceFile out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& e = list[i];
    const json& name_j = detail::field(e, "name", "device #" + std::to_string(i));
    if (!name_j.is_string() || name_j.get<std::string>().empty()) detail::bad("device #" + std::to_string(i), "name must be a string");
    const std::string name = name_j.get<std::string>();
    if (out.entries.count(name)) fail(ErrorCode::duplicate_label, "device '" + name + "' defined twice");
    try {
      out.entries.emplace(name, detail::parse_entry(e, tol, name));
    } catch (const json::exception& ex) {
      detail::bad(name, ex.what());
    }
    out.names.push_back(name);
  }
  return out;
}

inline DeviceFile load_device_file(const std::string& path, const Tolerances& tol = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_device_file(ss.str(), tol);
}

// Serialization. Values are printed with 17 significant digits by the JSON
// writer, so dumps are deterministic for fixed input.

inline json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Observable& a) {
  json effects = json::object();
  for (std::size_t x = 0; x < a.size(); ++x) effects[a.outcomes()[x]] = to_json(a.effect_at(x).matrix());
  return {{"outcomes", a.outcomes()}, {"effects", effects}};
}

inline json to_json(const CPMap& m, const Tolerances& tol = {}) {
  const KrausSet kraus = kraus_from_choi(m, tol);
  json ks = json::array();
  for (const auto& k : kraus.ops()) ks.push_back(to_json(k));
  return {{"kraus", ks}};
}

inline json to_json(const Instrument& ins, const Tolerances& tol = {}) {
  json branches = json::object();
  for (std::size_t x = 0; x < ins.size(); ++x) branches[ins.outcomes()[x]] = to_json(ins.branch_at(x), tol);
  return {{"outcomes", ins.outcomes()}, {"branches", branches}};
}

inline json to_json(const MeasurementModel& m) {
  return {{"eta", to_json(m.eta())}, {"u", to_json(m.u())}, {"pointer", to_json(m.pointer())}};
}

/// A complete device-file entry.
inline json entry_json(const std::string& name, const Device& d, const Tolerances& tol = {}) {
  json e{{"name", name}, {"type", std::string(to_string(kind_of(d)))}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Effect>) {
          e["dims"] = {x.dim()};
          e["payload"] = {{"matrix", to_json(x.matrix())}};
        } else if constexpr (std::is_same_v<T, Observable>) {
          e["dims"] = {x.dim()};
          e["payload"] = to_json(x);
        } else {
          e["dims"] = {x.dim_in(), x.dim_out()};
          e["payload"] = to_json(x, tol);
        }
      },
      d);
  return e;
}

inline json entry_json(const std::string& name, const MeasurementModel& m) {
  return {{"name", name}, {"type", "model"}, {"dims", {m.dim_in(), m.dim_out()}}, {"payload", to_json(m)}};
}

}  // namespace qdev::io
