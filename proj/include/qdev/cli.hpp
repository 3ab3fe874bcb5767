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

// Command-line front end. Every command writes its result to `out` and
// diagnostics (timings, solver traces, errors) to `err`, so stdout is
// byte-for-byte reproducible.
//
// Exit codes: 0 verdict produced, 1 internal error (a witness failed
// re-validation, or the built-in table did not reproduce), 2 invalid input,
// 3 solver undecided, 4 unsupported pair.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdev/compat.hpp"
#include "qdev/device_file.hpp"
#include "qdev/devices.hpp"
#include "qdev/dilation.hpp"
#include "qdev/fixtures.hpp"
#include "qdev/memo.hpp"

namespace qdev::cli {

using json = nlohmann::json;

enum ExitCode : int { ok = 0, internal_error = 1, invalid_input = 2, undecided = 3, unsupported = 4 };

struct Config {
  Tolerances tol;
  int max_iter = 50000;
  bool fast_paths = true;
  bool trace = false;
  bool json = false;
};

/// FILE argument that selects the built-in qubit devices instead of a file.
inline constexpr const char* kBuiltin = "builtin";

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::unsupported_pair: return unsupported;
    case ErrorCode::internal:
    case ErrorCode::missing_witness: return internal_error;
    default: return invalid_input;
  }
}

namespace detail {

inline DecideOptions decide_options(const Config& cfg, std::ostream& err) {
  DecideOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  opt.fast_paths = cfg.fast_paths;
  opt.trace = cfg.trace ? &err : nullptr;
  return opt;
}

inline io::DeviceFile load(const std::string& path, const Config& cfg) {
  if (path != kBuiltin) return io::load_device_file(path, cfg.tol);
  io::DeviceFile f;
  for (const auto& [name, dev] : fixtures::registry()) {
    f.names.push_back(name);
    f.entries.emplace(name, dev);
  }
  return f;
}

/// Fixed-precision rendering; tiny values print as 0 so that -0 and
/// round-off noise never reach the output.
inline std::string num(double x) {
  if (std::abs(x) < 1e-12) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string num(cplx z) {
  const std::string re = num(z.real());
  double im = z.imag();
  if (std::abs(im) < 1e-12) return re;
  const std::string ims = num(std::abs(im));
  return re + (im < 0 ? "-" : "+") + ims + "i";
}

inline std::string opt_num(const std::optional<double>& x) {
  if (!x) return "n/a";
  if (std::isinf(*x)) return *x < 0 ? "-inf" : "inf";
  return num(*x);
}

inline json opt_json(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

inline void print_matrix(std::ostream& out, const ComplexMatrix& m, const std::string& indent) {
  std::vector<std::string> cells;
  std::size_t width = 0;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      cells.push_back(num(m(r, c)));
      width = std::max(width, cells.back().size());
    }
  }
  for (Index r = 0; r < m.rows(); ++r) {
    out << indent << "[";
    for (Index c = 0; c < m.cols(); ++c) {
      const std::string& s = cells[static_cast<std::size_t>(r * m.cols() + c)];
      out << ' ' << std::string(width - s.size(), ' ') << s;
    }
    out << " ]\n";
  }
}

inline std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

inline std::string dims_string(const Device& d) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Effect> || std::is_same_v<T, Observable>) {
          return "[" + std::to_string(x.dim()) + "]";
        } else {
          return "[" + std::to_string(x.dim_in()) + "," + std::to_string(x.dim_out()) + "]";
        }
      },
      d);
}

/// Independent re-check of a positive witness before it is printed.
inline void revalidate(const Device& d1, const Device& d2, const Decision& d, const Tolerances& tol) {
  if (d.instrument) {
    if (!is_part_of(d1, *d.instrument, tol) || !is_part_of(d2, *d.instrument, tol)) {
      fail(ErrorCode::internal, "witness instrument failed re-validation");
    }
    return;
  }
  if (d.instrument_pair) {
    const auto& [i1, i2] = *d.instrument_pair;
    if (!approx_equal(i1.sum_choi(i1.outcomes()), i2.sum_choi(i2.outcomes()), tol.eq_tol)) {
      fail(ErrorCode::internal, "weak witness instruments have different totals");
    }
    if (!is_part_of(d1, i1, tol) || !is_part_of(d2, i2, tol)) {
      fail(ErrorCode::internal, "weak witness instruments failed re-validation");
    }
    if (d.upper_channel && !approx_equal(d.upper_channel->choi(), i1.sum_choi(i1.outcomes()), tol.eq_tol)) {
      fail(ErrorCode::internal, "common channel differs from the witness totals");
    }
    return;
  }
  fail(ErrorCode::missing_witness, "positive decision carries no witness");
}

inline json decision_json(const Decision& d) {
  json j{{"answer", std::string(to_string(d.answer))}, {"route", d.route}, {"iterations", d.iterations}};
  j["margin"] = opt_json(d.margin);
  if (d.oracle) j["oracle"] = {{"equal", d.oracle->equal}, {"reason", d.oracle->reason}};
  return j;
}

inline void print_decision(std::ostream& out, const std::string& title, const Decision& d) {
  out << title << ": " << to_string(d.answer) << " (route " << d.route;
  if (d.margin) out << ", margin " << opt_num(d.margin);
  if (d.iterations > 0) out << ", iterations " << d.iterations;
  out << ")\n";
  if (d.oracle) out << "  oracle: " << (d.oracle->equal ? "common channel exists" : "no common channel") << " (" << d.oracle->reason << ")\n";
}

inline void print_instrument(std::ostream& out, const Instrument& ins, const Tolerances& tol, const std::string& indent) {
  out << indent << "outcomes: " << join(ins.outcomes(), " ") << "\n";
  for (std::size_t x = 0; x < ins.size(); ++x) {
    const KrausSet ks = kraus_from_choi(ins.branch_at(x), tol);
    out << indent << "branch " << ins.outcomes()[x] << ": " << ks.size() << " Kraus operator(s)\n";
    for (std::size_t k = 0; k < ks.size(); ++k) {
      out << indent << "  K" << k << " =\n";
      print_matrix(out, ks.ops()[k], indent + "    ");
    }
  }
}

inline void print_parts(std::ostream& out, const std::string& who, const PartGroups& parts) {
  for (const auto& [name, labels] : parts) {
    out << "  " << who << " " << name << " <- {" << join(labels, ", ") << "}\n";
  }
}

inline json parts_json(const PartGroups& parts) {
  json j = json::object();
  for (const auto& [name, labels] : parts) j[name] = labels;
  return j;
}

inline json groups_json(const std::vector<KrausGroup>& groups) {
  json j = json::object();
  for (const auto& g : groups) j[g.name] = g.indices;
  return j;
}

inline std::string group_string(const std::vector<KrausGroup>& groups) {
  std::vector<std::string> items;
  for (const auto& g : groups) {
    std::vector<std::string> idx;
    for (auto i : g.indices) idx.push_back(std::to_string(i));
    items.push_back(g.name + "={" + join(idx, ",") + "}");
  }
  return join(items, " ");
}

/// Display width of a UTF-8 string (code points).
inline std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

inline std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

inline ComplexMatrix parse_state(const std::string& text, Index dim) {
  const std::map<std::string, std::pair<char, int>> named{{"x+", {'x', 1}}, {"x-", {'x', -1}}, {"y+", {'y', 1}},
                                                          {"y-", {'y', -1}}, {"z+", {'z', 1}}, {"z-", {'z', -1}}};
  if (text == "mixed") return maximally_mixed(dim);
  const auto it = named.find(text);
  if (it != named.end()) {
    if (dim != 2) fail(ErrorCode::invalid_state, "named states are qubit states");
    return pauli::projector(it->second.first, it->second.second);
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    fail(ErrorCode::invalid_state, "state must be x+, x-, y+, y-, z+, z-, mixed or a JSON matrix");
  }
  return io::detail::parse_matrix(j, "state");
}

}  // namespace detail

inline int cmd_validate(const std::string& path, const Config& cfg, std::ostream& out) {
  const io::DeviceFile f = detail::load(path, cfg);
  json list = json::array();
  for (const auto& name : f.names) {
    const io::Entry& e = f.at(name);
    if (const auto* d = std::get_if<Device>(&e)) {
      list.push_back({{"name", name}, {"type", std::string(to_string(kind_of(*d)))}, {"dims", detail::dims_string(*d)}});
      if (!cfg.json) out << name << ": " << to_string(kind_of(*d)) << " dims=" << detail::dims_string(*d) << " ok\n";
    } else {
      const auto& m = std::get<MeasurementModel>(e);
      const std::string dims = "[" + std::to_string(m.dim_in()) + "," + std::to_string(m.dim_out()) + "]";
      list.push_back({{"name", name}, {"type", "model"}, {"dims", dims}});
      if (!cfg.json) {
        out << name << ": model dims=" << dims << " dV1=" << m.dim_v1() << " dV2=" << m.dim_v2() << " ok\n";
      }
    }
  }
  if (cfg.json) out << json{{"valid", true}, {"devices", list}}.dump(2) << "\n";
  return ok;
}

namespace detail {

inline int verdict_exit(const Verdict& v) { return v.relation == Relation::undecided ? undecided : ok; }

inline Verdict timed_classify(const Device& a, const Device& b, const Config& cfg, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v = classify(a, b, decide_options(cfg, err));
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  err << "time: " << num(ms) << " ms\n";
  return v;
}

}  // namespace detail

inline int cmd_classify(const std::string& path, const std::string& n1, const std::string& n2, const Config& cfg,
                        std::ostream& out, std::ostream& err) {
  const io::DeviceFile f = detail::load(path, cfg);
  const Device& a = f.device(n1);
  const Device& b = f.device(n2);
  const Verdict v = detail::timed_classify(a, b, cfg, err);
  if (cfg.json) {
    json j{{"first", n1}, {"second", n2}, {"relation", std::string(to_string(v.relation))},
           {"compatible", detail::decision_json(v.compat)}};
    if (v.weak) j["weakly_compatible"] = detail::decision_json(*v.weak);
    out << j.dump(2) << "\n";
  } else {
    out << "pair: " << n1 << " (" << to_string(kind_of(a)) << "), " << n2 << " (" << to_string(kind_of(b)) << ")\n";
    out << "relation: " << to_string(v.relation) << "\n";
    detail::print_decision(out, "compatible", v.compat);
    if (v.weak) detail::print_decision(out, "weakly compatible", *v.weak);
  }
  return detail::verdict_exit(v);
}

inline int cmd_witness(const std::string& path, const std::string& n1, const std::string& n2, const Config& cfg,
                       std::ostream& out, std::ostream& err) {
  const io::DeviceFile f = detail::load(path, cfg);
  const Device& a = f.device(n1);
  const Device& b = f.device(n2);
  const Tolerances& tol = cfg.tol;
  const Verdict v = detail::timed_classify(a, b, cfg, err);
  const Decision* w = nullptr;
  if (v.relation == Relation::compatible) w = &v.compat;
  if (v.relation == Relation::weakly_compatible_only) w = &*v.weak;
  if (w) detail::revalidate(a, b, *w, tol);

  if (cfg.json) {
    json j{{"first", n1}, {"second", n2}, {"relation", std::string(to_string(v.relation))}};
    if (w) {
      j["route"] = w->route;
      j["parts_first"] = detail::parts_json(w->parts1);
      j["parts_second"] = detail::parts_json(w->parts2);
      if (w->instrument) j["instrument"] = io::to_json(*w->instrument, tol);
      if (w->instrument_pair) {
        j["instruments"] = {io::to_json(w->instrument_pair->first, tol), io::to_json(w->instrument_pair->second, tol)};
      }
      if (w->upper_channel) j["common_channel"] = io::to_json(*w->upper_channel, tol);
      if (w->joint) j["joint_observable"] = io::to_json(*w->joint);
      const KrausCertificate kc = kraus_witness(*w, tol);
      j["kraus_groups_first"] = detail::groups_json(kc.groups1);
      j["kraus_groups_second"] = detail::groups_json(kc.groups2);
    } else {
      j["compatible"] = detail::decision_json(v.compat);
      if (v.weak) j["weakly_compatible"] = detail::decision_json(*v.weak);
    }
    out << j.dump(2) << "\n";
    return detail::verdict_exit(v);
  }

  out << "relation: " << to_string(v.relation) << "\n";
  if (!w) {
    out << "no witness; certificate:\n";
    detail::print_decision(out, "  compatible", v.compat);
    if (v.weak) detail::print_decision(out, "  weakly compatible", *v.weak);
    return detail::verdict_exit(v);
  }
  out << "route: " << w->route << "\n";
  if (w->instrument) {
    out << "common instrument:\n";
    detail::print_instrument(out, *w->instrument, tol, "  ");
  }
  if (w->upper_channel) {
    out << "common channel:\n";
    const KrausSet ks = kraus_from_choi(*w->upper_channel, tol);
    for (std::size_t k = 0; k < ks.size(); ++k) {
      out << "  K" << k << " =\n";
      detail::print_matrix(out, ks.ops()[k], "    ");
    }
  }
  if (w->instrument_pair) {
    out << "instrument containing " << n1 << ":\n";
    detail::print_instrument(out, w->instrument_pair->first, tol, "  ");
    out << "instrument containing " << n2 << ":\n";
    detail::print_instrument(out, w->instrument_pair->second, tol, "  ");
  }
  if (w->joint) {
    out << "joint observable:\n";
    for (std::size_t x = 0; x < w->joint->size(); ++x) {
      out << "  " << w->joint->outcomes()[x] << " =\n";
      detail::print_matrix(out, w->joint->effect_at(x).matrix(), "    ");
    }
  }
  out << "parts:\n";
  detail::print_parts(out, n1, w->parts1);
  detail::print_parts(out, n2, w->parts2);
  const KrausCertificate kc = kraus_witness(*w, tol);
  out << "kraus groups: " << n1 << " " << detail::group_string(kc.groups1) << "; " << n2 << " "
      << detail::group_string(kc.groups2) << "\n";
  out << "witness re-validated\n";
  return ok;
}

inline int cmd_dilate(const std::string& path, const std::string& name, const Config& cfg, std::ostream& out) {
  const io::DeviceFile f = detail::load(path, cfg);
  const Device& d = f.device(name);
  CPMap map = [&] {
    if (const auto* m = std::get_if<CPMap>(&d)) return *m;
    if (const auto* ins = std::get_if<Instrument>(&d)) return total_channel(*ins, cfg.tol);
    fail(ErrorCode::parse_error, "'" + name + "' is not an operation, channel or instrument");
  }();
  const StinespringDilation dil = minimal_stinespring(map, cfg.tol);
  if (cfg.json) {
    json ks = json::array();
    for (Index a = 0; a < dil.ancilla_dim; ++a) ks.push_back(io::to_json(dil.kraus_operator(a)));
    out << json{{"name", name}, {"dim_in", dil.dim_in}, {"dim_out", dil.dim_out}, {"ancilla_dim", dil.ancilla_dim},
                {"minimal", dil.minimal}, {"v", io::to_json(dil.v)}, {"kraus", ks}}
                .dump(2)
        << "\n";
    return ok;
  }
  out << "dilation of " << name << ": dH=" << dil.dim_in << " dK=" << dil.dim_out << " dA=" << dil.ancilla_dim
      << (dil.minimal ? " (minimal)" : "") << "\n";
  out << "V (rows a*dA+alpha) =\n";
  detail::print_matrix(out, dil.v, "  ");
  return ok;
}

inline int cmd_model(const std::string& path, const std::string& name, const Config& cfg, std::ostream& out) {
  const io::DeviceFile f = detail::load(path, cfg);
  const auto* ins = std::get_if<Instrument>(&f.device(name));
  if (!ins) fail(ErrorCode::parse_error, "'" + name + "' is not an instrument");
  const MeasurementModel m = synthesize_model(*ins, cfg.tol);
  if (cfg.json) {
    out << json{{"devices", {io::entry_json(name + "_model", m)}}}.dump(2) << "\n";
    return ok;
  }
  out << "model for " << name << ": dH=" << m.dim_in() << " dK=" << m.dim_out() << " dV1=" << m.dim_v1()
      << " dV2=" << m.dim_v2() << "\n";
  out << "eta =\n";
  detail::print_matrix(out, m.eta(), "  ");
  out << "U =\n";
  detail::print_matrix(out, m.u(), "  ");
  out << "pointer:\n";
  for (std::size_t x = 0; x < m.pointer().size(); ++x) {
    out << "  " << m.pointer().outcomes()[x] << " =\n";
    detail::print_matrix(out, m.pointer().effect_at(x).matrix(), "    ");
  }
  out << "reproduces " << name << " branchwise\n";
  return ok;
}

inline int cmd_simulate(const std::string& path, const std::string& name, const std::string& state,
                        const std::string& outcomes, const Config& cfg, std::ostream& out) {
  const io::DeviceFile f = detail::load(path, cfg);
  const io::Entry& e = f.at(name);
  const MeasurementModel m = [&] {
    if (const auto* mm = std::get_if<MeasurementModel>(&e)) return *mm;
    const auto* ins = std::get_if<Instrument>(&std::get<Device>(e));
    if (!ins) fail(ErrorCode::parse_error, "'" + name + "' is neither a model nor an instrument");
    return synthesize_model(*ins, cfg.tol);
  }();
  const ComplexMatrix rho = detail::parse_state(state, m.dim_in());
  LabelSet subset;
  if (outcomes.empty()) {
    subset = m.pointer().outcomes();
  } else {
    std::stringstream ss(outcomes);
    for (std::string l; std::getline(ss, l, ',');) {
      m.pointer().index_of(l);
      subset.push_back(l);
    }
  }
  const double p = model_probability(m, rho, subset, cfg.tol);
  const ComplexMatrix post = model_poststate(m, rho, subset, cfg.tol);
  if (cfg.json) {
    out << json{{"model", name}, {"outcomes", subset}, {"probability", p}, {"poststate", io::to_json(post)}}.dump(2)
        << "\n";
    return ok;
  }
  out << "outcomes: {" << detail::join(subset, ", ") << "}\n";
  out << "probability: " << detail::num(p) << "\n";
  out << "post-state (unnormalized) =\n";
  detail::print_matrix(out, post, "  ");
  return ok;
}

inline int cmd_table1(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto results = fixtures::run_table(detail::decide_options(cfg, err));
  bool all = true;
  bool any_undecided = false;
  for (const auto& r : results) {
    all = all && r.reproduced;
    any_undecided = any_undecided || (r.verdict && r.verdict->relation == Relation::undecided);
  }
  if (cfg.json) {
    json cells = json::array();
    for (const auto& r : results) {
      json c{{"row", std::string(to_string(r.cell.row))}, {"column", r.cell.column}, {"mark", fixtures::cell_mark(r)},
             {"reproduced", r.reproduced}};
      if (r.cell.pair) {
        c["pair"] = {r.cell.pair->first, r.cell.pair->second};
        c["relation"] = std::string(to_string(r.verdict->relation));
      }
      cells.push_back(std::move(c));
    }
    out << json{{"cells", cells}, {"reproduced", all}}.dump(2) << "\n";
  } else {
    const std::size_t w0 = 36;
    const std::size_t w = 8;
    out << detail::pad("", w0);
    for (const auto& c : fixtures::table_columns()) out << detail::pad(c, w);
    out << "\n";
    for (const auto row : fixtures::table_rows()) {
      out << detail::pad(std::string(fixtures::row_title(row)), w0);
      for (const auto& col : fixtures::table_columns()) {
        for (const auto& r : results) {
          if (r.cell.row == row && r.cell.column == col) out << detail::pad(fixtures::cell_mark(r), w);
        }
      }
      out << "\n";
    }
    out << "\n";
    for (const auto& r : results) {
      out << r.cell.column << ", " << fixtures::row_title(r.cell.row) << ": ";
      if (!r.cell.pair) {
        out << "impossible (effect pairs always share a contraction channel)\n";
        continue;
      }
      const Verdict& v = *r.verdict;
      out << r.cell.pair->first << " / " << r.cell.pair->second << " -> " << to_string(v.relation) << " [" << v.compat.route;
      if (v.weak) out << "; " << v.weak->route;
      out << "]\n";
    }
  }
  if (any_undecided) return undecided;
  return all ? ok : internal_error;
}

/// Parses argv and runs one command. Errors go to `err` as
/// "error: <code>: <message>".
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compatibility of finite-dimensional quantum devices"};
  app.name("qdev");
  app.require_subcommand(1);
  Config cfg;
  std::string format = "text";
  app.add_option("--tol-eq", cfg.tol.eq_tol, "equality tolerance")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--tol-psd", cfg.tol.psd_tol, "eigenvalue floor")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--tol-feas", cfg.tol.feas_tol, "feasibility residual")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--max-iter", cfg.max_iter, "solver iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--no-fast-paths", [&](std::int64_t) { cfg.fast_paths = false; }, "always use the solver");
  app.add_flag("--trace", cfg.trace, "solver log on stderr");
  app.add_option("--format", format, "output format")->capture_default_str()->check(CLI::IsMember({"text", "json"}));

  std::string file;
  std::string n1;
  std::string n2;
  std::string state = "mixed";
  std::string outcomes;
  const std::string file_help = "device file, or 'builtin' for the built-in qubit devices";

  auto* validate = app.add_subcommand("validate", "load and validate a device file");
  validate->add_option("file", file, file_help)->required();
  auto* classify_cmd = app.add_subcommand("classify", "decide the relation of two devices");
  classify_cmd->add_option("file", file, file_help)->required();
  classify_cmd->add_option("first", n1)->required();
  classify_cmd->add_option("second", n2)->required();
  auto* witness = app.add_subcommand("witness", "print the witness or certificate for a pair");
  witness->add_option("file", file, file_help)->required();
  witness->add_option("first", n1)->required();
  witness->add_option("second", n2)->required();
  auto* dilate = app.add_subcommand("dilate", "minimal Stinespring dilation of an operation");
  dilate->add_option("file", file, file_help)->required();
  dilate->add_option("name", n1)->required();
  auto* model = app.add_subcommand("model", "synthesize a measurement model for an instrument");
  model->add_option("file", file, file_help)->required();
  model->add_option("instrument", n1)->required();
  auto* simulate = app.add_subcommand("simulate", "outcome probability and post-state of a model");
  simulate->add_option("file", file, file_help)->required();
  simulate->add_option("model", n1, "model, or an instrument to synthesize one for")->required();
  simulate->add_option("--state", state, "x+, x-, y+, y-, z+, z-, mixed or a JSON matrix")->capture_default_str();
  simulate->add_option("--outcomes", outcomes, "comma-separated outcome subset (default: all)");
  auto* table = app.add_subcommand("table1", "classify the built-in pairs and print the relation table");
  for (auto* sub : {validate, classify_cmd, witness, dilate, model, simulate, table}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : invalid_input;
  }
  cfg.json = format == "json";

  try {
    if (validate->parsed()) return cmd_validate(file, cfg, out);
    if (classify_cmd->parsed()) return cmd_classify(file, n1, n2, cfg, out, err);
    if (witness->parsed()) return cmd_witness(file, n1, n2, cfg, out, err);
    if (dilate->parsed()) return cmd_dilate(file, n1, cfg, out);
    if (model->parsed()) return cmd_model(file, n1, cfg, out);
    if (simulate->parsed()) return cmd_simulate(file, n1, state, outcomes, cfg, out);
    if (table->parsed()) return cmd_table1(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return invalid_input;
}

}  // namespace qdev::cli
