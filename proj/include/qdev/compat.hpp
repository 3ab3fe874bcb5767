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

// Pairwise deciders for compatibility and weak compatibility, and the
// three-way classification built on them.
//
// Every decider returns a Decision: yes / no / undecided, the route that
// produced it (a fast-path tag or "solver") and, for yes, a witness that has
// been re-validated against the devices module. Solver formulations use the
// four-outcome normal form (outcomes 11, 10, 01, 00: part of both, first
// only, second only, neither) and restrict each block to the face forced by
// the data, e.g. a block below J(Φ) lives on range J(Φ).

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qdev/devices.hpp"
#include "qdev/feasibility.hpp"
#include "qdev/order.hpp"

namespace qdev {

enum class Answer { yes, no, undecided };

inline std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::yes: return "yes";
    case Answer::no: return "no";
    case Answer::undecided: return "undecided";
  }
  return "unknown";
}

enum class Relation { compatible, weakly_compatible_only, strongly_incompatible, undecided };

inline std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::compatible: return "compatible";
    case Relation::weakly_compatible_only: return "weakly-compatible-only";
    case Relation::strongly_incompatible: return "strongly-incompatible";
    case Relation::undecided: return "undecided";
  }
  return "unknown";
}

/// How a device sits inside a witness instrument: named groups of outcomes.
/// Effects and operations have one group ("part"); observables and
/// instruments have one group per outcome (the preimage under the pointer).
using PartGroups = std::vector<std::pair<Label, LabelSet>>;

struct Decision {
  Answer answer = Answer::undecided;
  std::string route;
  std::optional<Instrument> instrument;
  std::optional<std::pair<Instrument, Instrument>> instrument_pair;
  std::optional<CPMap> upper_channel;
  std::optional<Observable> joint;
  PartGroups parts1;
  PartGroups parts2;
  std::optional<double> margin;
  std::optional<UpperChannelCertificate> oracle;
  long iterations = 0;
};

struct Verdict {
  Relation relation = Relation::undecided;
  Decision compat;
  std::optional<Decision> weak;
};

struct DecideOptions {
  Tolerances tol;
  int max_iter = 50000;
  bool fast_paths = true;
  std::ostream* trace = nullptr;

  SolveOptions solve_options() const {
    SolveOptions s;
    s.max_iter = max_iter;
    s.trace = trace;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Witness re-validation

namespace detail {

/// Locates a device inside an instrument or throws internal.
inline PartGroups locate_part(const Device& device, const Instrument& ins, const Tolerances& tol) {
  return std::visit(
      [&](const auto& dev) -> PartGroups {
        using T = std::decay_t<decltype(dev)>;
        if constexpr (std::is_same_v<T, Effect> || std::is_same_v<T, CPMap>) {
          const auto hit = find_part(dev, ins, tol);
          if (!hit) fail(ErrorCode::internal, "witness instrument does not contain the device");
          return {{"part", *hit}};
        } else {
          const auto f = find_part(dev, ins, tol);
          if (!f) fail(ErrorCode::internal, "witness instrument does not contain the device");
          PartGroups out;
          for (const auto& y : dev.outcomes()) {
            LabelSet pre;
            for (const auto& x : ins.outcomes()) {
              if (f->image.at(x) == y) pre.push_back(x);
            }
            out.emplace_back(y, pre);
          }
          return out;
        }
      },
      device);
}

inline Decision yes_with_instrument(std::string route, Instrument ins, const Device& d1, const Device& d2,
                                    const Tolerances& tol) {
  Decision out;
  out.answer = Answer::yes;
  out.route = std::move(route);
  out.parts1 = locate_part(d1, ins, tol);
  out.parts2 = locate_part(d2, ins, tol);
  out.instrument = std::move(ins);
  return out;
}

inline Decision yes_with_pair(std::string route, Instrument i1, Instrument i2, const Device& d1, const Device& d2,
                              const Tolerances& tol) {
  if (!approx_equal(i1.sum_choi(i1.outcomes()), i2.sum_choi(i2.outcomes()), tol.eq_tol)) {
    fail(ErrorCode::internal, "weak witness instruments have different totals");
  }
  Decision out;
  out.answer = Answer::yes;
  out.route = std::move(route);
  out.parts1 = locate_part(d1, i1, tol);
  out.parts2 = locate_part(d2, i2, tol);
  out.upper_channel = total_channel(i1, tol);
  out.instrument_pair = std::make_pair(std::move(i1), std::move(i2));
  return out;
}

inline Decision answer_only(Answer a, std::string route) {
  Decision out;
  out.answer = a;
  out.route = std::move(route);
  return out;
}

/// Orthonormal basis of range(h); nullopt when h has full rank.
inline std::optional<ComplexMatrix> range_face(const ComplexMatrix& h, const Tolerances& tol) {
  const ComplexMatrix q = range_basis(hermitian_part(h), tol.psd_tol * std::max(1.0, herm_norm(h)));
  if (q.cols() == h.rows()) return std::nullopt;
  return q;
}

/// range(m) ⊗ C^dk for a Tr_out-type condition on a Choi block.
inline std::optional<ComplexMatrix> input_face(const ComplexMatrix& m, Index dk, const Tolerances& tol) {
  const auto q = range_face(m, tol);
  if (!q) return std::nullopt;
  return kron(*q, identity(dk));
}

inline std::optional<ComplexMatrix> meet(const std::optional<ComplexMatrix>& a, const std::optional<ComplexMatrix>& b) {
  if (!a) return b;
  if (!b) return a;
  return intersect_ranges(*a, *b);
}

/// Block cleaned for validation: Hermitian part with roundoff-negative
/// eigenvalues removed.
inline ComplexMatrix clean(const ComplexMatrix& x) { return project_psd(hermitian_part(x)); }

inline Decision from_outcome(const FeasibilityOutcome& r, const std::string& route) {
  Decision out;
  out.route = route;
  out.margin = r.margin;
  out.iterations = r.iterations;
  out.answer = r.verdict == FeasVerdict::infeasible ? Answer::no : Answer::undecided;
  return out;
}

/// Runs a witness builder, downgrading a rejected witness to undecided.
template <typename Build>
Decision accept_witness(const FeasibilityOutcome& r, const std::string& route, Build&& build) {
  if (r.verdict != FeasVerdict::feasible) return from_outcome(r, route);
  try {
    Decision out = build(r.witness);
    out.margin = r.margin;
    out.iterations = r.iterations;
    return out;
  } catch (const Error&) {
    Decision out = from_outcome(r, route + ":witness_rejected");
    out.answer = Answer::undecided;
    return out;
  }
}

inline void require_same_input(Index a, Index b) {
  if (a != b) fail(ErrorCode::dimension_mismatch, "devices act on different input spaces");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Effects and observables

/// Compatible effects ⇔ coexistent: a four-outcome observable G with
/// G₁₁ + G₁₀ = E₁ and G₁₁ + G₀₁ = E₂.
inline Decision coexistent_effects(const Effect& e1, const Effect& e2, const DecideOptions& opt = {}) {
  detail::require_same_input(e1.dim(), e2.dim());
  const Tolerances& tol = opt.tol;
  const Index d = e1.dim();
  const ComplexMatrix& a = e1.matrix();
  const ComplexMatrix& b = e2.matrix();
  const ComplexMatrix id = identity(d);
  const ComplexMatrix mixed = maximally_mixed(d);

  auto with_g11 = [&](const ComplexMatrix& g11, const std::string& route) {
    Observable g({{"11", g11}, {"10", a - g11}, {"01", b - g11}, {"00", id - a - b + g11}}, tol);
    Decision out = detail::yes_with_instrument(route, canonical_instrument(g, mixed, tol), e1, e2, tol);
    out.joint = std::move(g);
    return out;
  };

  if (opt.fast_paths) {
    if (commute(a, b, tol)) return with_g11(hermitian_part(a * b), "commuting");
    if (max_eigenvalue(a + b - id) <= tol.psd_tol) return with_g11(zeros(d, d), "sum_below_identity");
    if (is_projection(e1, tol) || is_projection(e2, tol)) return detail::answer_only(Answer::no, "projection_noncommuting");
  }

  using detail::range_face;
  FeasibilityProblem p;
  const auto g11 = p.add_block("G11", d, detail::meet(range_face(a, tol), range_face(b, tol)));
  const auto g10 = p.add_block("G10", d, detail::meet(range_face(a, tol), range_face(id - b, tol)));
  const auto g01 = p.add_block("G01", d, detail::meet(range_face(b, tol), range_face(id - a, tol)));
  const auto g00 = p.add_block("G00", d, detail::meet(range_face(id - a, tol), range_face(id - b, tol)));
  p.add_constraint(encode_sum_constraint({{g11, 1.0}, {g10, 1.0}}, a, "first margin"));
  p.add_constraint(encode_sum_constraint({{g11, 1.0}, {g01, 1.0}}, b, "second margin"));
  p.add_constraint(encode_sum_constraint({{g00, 1.0}, {g11, -1.0}}, id - a - b, "normalization"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    return with_g11(detail::clean(w[g11]), "solver");
  });
}

/// Joint observable G(x, y) with marginals A₁ and A₂; outcome labels "x,y".
inline Decision jointly_measurable(const Observable& a1, const Observable& a2, const DecideOptions& opt = {}) {
  detail::require_same_input(a1.dim(), a2.dim());
  const Tolerances& tol = opt.tol;
  const Index d = a1.dim();
  const ComplexMatrix mixed = maximally_mixed(d);
  auto joint_label = [](const Label& x, const Label& y) { return x + "," + y; };

  auto with_joint = [&](const std::vector<ComplexMatrix>& cells, const std::string& route) {
    std::vector<std::pair<Label, ComplexMatrix>> entries;
    for (std::size_t i = 0; i < a1.size(); ++i) {
      for (std::size_t j = 0; j < a2.size(); ++j) {
        entries.emplace_back(joint_label(a1.outcomes()[i], a2.outcomes()[j]), cells[i * a2.size() + j]);
      }
    }
    Observable g(std::move(entries), tol);
    Decision out = detail::yes_with_instrument(route, canonical_instrument(g, mixed, tol), a1, a2, tol);
    out.joint = std::move(g);
    return out;
  };

  if (opt.fast_paths) {
    bool all_commute = true;
    for (std::size_t i = 0; i < a1.size() && all_commute; ++i) {
      for (std::size_t j = 0; j < a2.size() && all_commute; ++j) {
        all_commute = commute(a1.effect_at(i).matrix(), a2.effect_at(j).matrix(), tol);
      }
    }
    if (all_commute) {
      std::vector<ComplexMatrix> cells;
      for (std::size_t i = 0; i < a1.size(); ++i) {
        for (std::size_t j = 0; j < a2.size(); ++j) {
          cells.push_back(hermitian_part(a1.effect_at(i).matrix() * a2.effect_at(j).matrix()));
        }
      }
      return with_joint(cells, "commuting");
    }
  }

  FeasibilityProblem p;
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    for (std::size_t j = 0; j < a2.size(); ++j) {
      ids.push_back(p.add_block(joint_label(a1.outcomes()[i], a2.outcomes()[j]), d,
                                detail::meet(detail::range_face(a1.effect_at(i).matrix(), tol),
                                             detail::range_face(a2.effect_at(j).matrix(), tol))));
    }
  }
  for (std::size_t i = 0; i < a1.size(); ++i) {
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t j = 0; j < a2.size(); ++j) row.emplace_back(ids[i * a2.size() + j], 1.0);
    p.add_constraint(encode_sum_constraint(row, a1.effect_at(i).matrix(), "first marginal"));
  }
  for (std::size_t j = 0; j < a2.size(); ++j) {
    std::vector<std::pair<std::size_t, double>> col;
    for (std::size_t i = 0; i < a1.size(); ++i) col.emplace_back(ids[i * a2.size() + j], 1.0);
    p.add_constraint(encode_sum_constraint(col, a2.effect_at(j).matrix(), "second marginal"));
  }
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    std::vector<ComplexMatrix> cells;
    for (const auto& x : w) cells.push_back(detail::clean(x));
    return with_joint(cells, "solver");
  });
}

// ---------------------------------------------------------------------------
// Operations

namespace detail {

/// Branch ρ ↦ tr[Dρ]·ξ with ξ maximally mixed on the output.
inline CPMap completion_branch(const ComplexMatrix& d, Index dim_in, Index dim_out, const Tolerances& tol) {
  return CPMap(dim_in, dim_out, measure_prepare_choi(hermitian_part(d), maximally_mixed(dim_out)), tol);
}

inline Instrument four_outcome_instrument(const CPMap& b11, const CPMap& b10, const CPMap& b01, const CPMap& b00,
                                          const Tolerances& tol) {
  return Instrument({"11", "10", "01", "00"}, {b11, b10, b01, b00}, tol);
}

inline Instrument instrument_from_blocks(const std::vector<ComplexMatrix>& w, Dims dims, const Tolerances& tol) {
  std::vector<CPMap> branches;
  for (const auto& x : w) branches.emplace_back(dims.first, dims.second, clean(x), tol);
  return four_outcome_instrument(branches[0], branches[1], branches[2], branches[3], tol);
}

/// Φ∘(√A·√A): Kraus operators K·√A.
inline CPMap precompose_luders(const CPMap& phi, const ComplexMatrix& a, const Tolerances& tol) {
  const ComplexMatrix root = mat_sqrt(a, tol);
  std::vector<ComplexMatrix> ops;
  const KrausSet ks = kraus_from_choi(phi, tol);
  for (const auto& k : ks.ops()) ops.push_back(k * root);
  return CPMap(phi.dim_in(), phi.dim_out(), choi_of_kraus_ops(ops, phi.dim_in(), phi.dim_out()), tol);
}

}  // namespace detail

inline Decision op_op_compatible(const CPMap& f1, const CPMap& f2, const DecideOptions& opt = {}) {
  require_same_dims(f1, f2, "op_op_compatible");
  const Tolerances& tol = opt.tol;
  const Index dh = f1.dim_in();
  const Index dk = f1.dim_out();
  const ComplexMatrix id = identity(dh);
  const CPMap zero = null_operation(dh, dk);

  if (opt.fast_paths) {
    for (int swap = 0; swap < 2; ++swap) {
      const CPMap& lo = swap ? f2 : f1;
      const CPMap& hi = swap ? f1 : f2;
      if (cp_leq(lo, hi, tol)) {
        const CPMap rest(dh, dk, detail::clean(hi.choi() - lo.choi()), tol);
        const CPMap done = detail::completion_branch(id - hi.heisenberg_unit(), dh, dk, tol);
        // lo = {11}, hi = {11, 10 or 01}.
        Instrument ins = swap ? detail::four_outcome_instrument(lo, rest, zero, done, tol)
                              : detail::four_outcome_instrument(lo, zero, rest, done, tol);
        return detail::yes_with_instrument("comparable", std::move(ins), f1, f2, tol);
      }
    }
    if (sum_is_operation(f1, f2, tol)) {
      const CPMap done =
          detail::completion_branch(id - f1.heisenberg_unit() - f2.heisenberg_unit(), dh, dk, tol);
      return detail::yes_with_instrument("sum_is_operation",
                                         detail::four_outcome_instrument(zero, f1, f2, done, tol), f1, f2, tol);
    }
    if (is_pure(f1, tol) && is_pure(f2, tol)) return detail::answer_only(Answer::no, "pure_pair");
  }

  using detail::range_face;
  const auto r1 = range_face(f1.choi(), tol);
  const auto r2 = range_face(f2.choi(), tol);
  const Index side = dh * dk;
  FeasibilityProblem p;
  const auto b11 = p.add_block("Psi11", side, detail::meet(r1, r2));
  const auto b10 = p.add_block("Psi10", side, r1);
  const auto b01 = p.add_block("Psi01", side, r2);
  const auto b00 = p.add_block("Psi00", side);
  p.add_constraint(encode_sum_constraint({{b11, 1.0}, {b10, 1.0}}, f1.choi(), "first part"));
  p.add_constraint(encode_sum_constraint({{b11, 1.0}, {b01, 1.0}}, f2.choi(), "second part"));
  p.add_constraint(encode_heisenberg_unit_constraint({b11, b10, b01, b00}, f1.dims(), id, "channel"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    return detail::yes_with_instrument("solver", detail::instrument_from_blocks(w, f1.dims(), tol), f1, f2, tol);
  });
}

inline Decision op_ef_compatible(const CPMap& f, const Effect& e, const DecideOptions& opt = {}) {
  detail::require_same_input(f.dim_in(), e.dim());
  const Tolerances& tol = opt.tol;
  const Index dh = f.dim_in();
  const Index dk = f.dim_out();
  const ComplexMatrix id = identity(dh);
  const ComplexMatrix& em = e.matrix();
  const CPMap zero = null_operation(dh, dk);

  if (opt.fast_paths) {
    if (commutes_with_range(f, e, tol)) {
      const ComplexMatrix deficit = id - f.heisenberg_unit();
      Instrument ins = detail::four_outcome_instrument(
          detail::precompose_luders(f, em, tol), detail::precompose_luders(f, id - em, tol),
          detail::completion_branch(em * deficit, dh, dk, tol),
          detail::completion_branch((id - em) * deficit, dh, dk, tol), tol);
      return detail::yes_with_instrument("commuting_range", std::move(ins), f, e, tol);
    }
    if (is_projection(e, tol)) return detail::answer_only(Answer::no, "projection_noncommuting");
    if (max_eigenvalue(f.heisenberg_unit() + em - id) <= tol.psd_tol) {
      Instrument ins = detail::four_outcome_instrument(
          zero, f, detail::completion_branch(em, dh, dk, tol),
          detail::completion_branch(id - em - f.heisenberg_unit(), dh, dk, tol), tol);
      return detail::yes_with_instrument("sum_below_identity", std::move(ins), f, e, tol);
    }
  }

  using detail::input_face;
  const auto rj = detail::range_face(f.choi(), tol);
  const auto on_e = input_face(em.transpose(), dk, tol);
  const auto off_e = input_face((id - em).transpose(), dk, tol);
  const Index side = dh * dk;
  FeasibilityProblem p;
  const auto b11 = p.add_block("Psi11", side, detail::meet(rj, on_e));
  const auto b10 = p.add_block("Psi10", side, detail::meet(rj, off_e));
  const auto b01 = p.add_block("Psi01", side, on_e);
  const auto b00 = p.add_block("Psi00", side, off_e);
  p.add_constraint(encode_sum_constraint({{b11, 1.0}, {b10, 1.0}}, f.choi(), "operation part"));
  p.add_constraint(encode_heisenberg_unit_constraint({b11, b01}, f.dims(), em, "effect part"));
  p.add_constraint(encode_heisenberg_unit_constraint({b11, b10, b01, b00}, f.dims(), id, "channel"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    return detail::yes_with_instrument("solver", detail::instrument_from_blocks(w, f.dims(), tol), f, e, tol);
  });
}

// ---------------------------------------------------------------------------
// Channels: weak compatibility and compatibility coincide

/// Compatible iff Φ ≤ Λ; witness {Φ, Λ − Φ}.
inline Decision ch_op_compatible(const CPMap& lam, const CPMap& f, const DecideOptions& opt = {}) {
  require_same_dims(lam, f, "ch_op_compatible");
  if (!lam.is_channel()) fail(ErrorCode::not_a_channel, "first argument must be a channel");
  const Tolerances& tol = opt.tol;
  if (!cp_leq(f, lam, tol)) return detail::answer_only(Answer::no, "cp_order");
  Instrument ins({"0", "1"}, {f, CPMap(f.dim_in(), f.dim_out(), detail::clean(lam.choi() - f.choi()), tol)}, tol);
  Decision out = detail::yes_with_instrument("cp_order", std::move(ins), lam, f, tol);
  out.upper_channel = lam;
  return out;
}

/// Compatible iff some Φ ≤ Λ has Φᴴ(I) = E; witness {Φ, Λ − Φ}.
inline Decision ch_ef_compatible(const CPMap& lam, const Effect& e, const DecideOptions& opt = {}) {
  detail::require_same_input(lam.dim_in(), e.dim());
  if (!lam.is_channel()) fail(ErrorCode::not_a_channel, "first argument must be a channel");
  const Tolerances& tol = opt.tol;
  const Index dh = lam.dim_in();
  const Index dk = lam.dim_out();
  const ComplexMatrix id = identity(dh);
  const auto rl = detail::range_face(lam.choi(), tol);
  FeasibilityProblem p;
  const auto on = p.add_block("Phi", dh * dk, detail::meet(rl, detail::input_face(e.matrix().transpose(), dk, tol)));
  const auto off =
      p.add_block("Rest", dh * dk, detail::meet(rl, detail::input_face((id - e.matrix()).transpose(), dk, tol)));
  p.add_constraint(encode_sum_constraint({{on, 1.0}, {off, 1.0}}, lam.choi(), "total"));
  p.add_constraint(encode_heisenberg_unit_constraint({on}, lam.dims(), e.matrix(), "effect part"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    Instrument ins({"1", "0"}, {CPMap(dh, dk, detail::clean(w[on]), tol), CPMap(dh, dk, detail::clean(w[off]), tol)},
                   tol);
    Decision out = detail::yes_with_instrument("solver", std::move(ins), lam, e, tol);
    out.upper_channel = lam;
    return out;
  });
}

/// Compatible iff an instrument with total Λ induces A.
inline Decision ch_ob_compatible(const CPMap& lam, const Observable& a, const DecideOptions& opt = {}) {
  detail::require_same_input(lam.dim_in(), a.dim());
  if (!lam.is_channel()) fail(ErrorCode::not_a_channel, "first argument must be a channel");
  const Tolerances& tol = opt.tol;
  const Index dh = lam.dim_in();
  const Index dk = lam.dim_out();
  const auto rl = detail::range_face(lam.choi(), tol);
  FeasibilityProblem p;
  std::vector<std::pair<std::size_t, double>> all;
  for (std::size_t x = 0; x < a.size(); ++x) {
    const ComplexMatrix& ax = a.effect_at(x).matrix();
    const auto b = p.add_block(a.outcomes()[x], dh * dk, detail::meet(rl, detail::input_face(ax.transpose(), dk, tol)));
    p.add_constraint(encode_heisenberg_unit_constraint({b}, lam.dims(), ax, "outcome " + a.outcomes()[x]));
    all.emplace_back(b, 1.0);
  }
  p.add_constraint(encode_sum_constraint(all, lam.choi(), "total"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    std::vector<CPMap> branches;
    for (const auto& x : w) branches.emplace_back(dh, dk, detail::clean(x), tol);
    Decision out = detail::yes_with_instrument("solver", Instrument(a.outcomes(), std::move(branches), tol), lam, a, tol);
    out.upper_channel = lam;
    return out;
  });
}

inline Decision ch_ch_compatible(const CPMap& l1, const CPMap& l2, const DecideOptions& opt = {}) {
  require_same_dims(l1, l2, "ch_ch_compatible");
  if (!same_map(l1, l2, opt.tol.eq_tol)) return detail::answer_only(Answer::no, "channel_equality");
  Decision out = detail::yes_with_instrument("channel_equality", Instrument({"0"}, {l1}, opt.tol), l1, l2, opt.tol);
  out.upper_channel = l1;
  return out;
}

/// A channel is compatible with an instrument iff it is the instrument's total.
inline Decision ch_ins_compatible(const CPMap& lam, const Instrument& ins, const DecideOptions& opt = {}) {
  require_same_dims(lam, ins.branch_at(0), "ch_ins_compatible");
  if (!approx_equal(lam.choi(), ins.sum_choi(ins.outcomes()), opt.tol.eq_tol)) {
    return detail::answer_only(Answer::no, "total_channel");
  }
  Decision out = detail::yes_with_instrument("total_channel", ins, lam, ins, opt.tol);
  out.upper_channel = lam;
  return out;
}

// ---------------------------------------------------------------------------
// Weak compatibility

namespace detail {

inline Decision weak_from_upper(const CPMap& lam, const CPMap& f1, const CPMap& f2, const std::string& route,
                                const Tolerances& tol) {
  const Index dh = lam.dim_in();
  const Index dk = lam.dim_out();
  Instrument i1({"0", "1"}, {f1, CPMap(dh, dk, clean(lam.choi() - f1.choi()), tol)}, tol);
  Instrument i2({"0", "1"}, {f2, CPMap(dh, dk, clean(lam.choi() - f2.choi()), tol)}, tol);
  return yes_with_pair(route, std::move(i1), std::move(i2), f1, f2, tol);
}

inline bool has_rank1_deficiency(const CPMap& m, const Tolerances& tol) {
  const RealVector ev = hermitian_eigenvalues(identity(m.dim_in()) - m.heisenberg_unit());
  return ev.size() < 2 || ev(ev.size() - 2) <= tol.psd_tol;
}

}  // namespace detail

/// Common upper channel Λ ≥ Φ₁, Φ₂.
inline Decision weakly_compatible_ops(const CPMap& f1, const CPMap& f2, const DecideOptions& opt = {}) {
  require_same_dims(f1, f2, "weakly_compatible_ops");
  const Tolerances& tol = opt.tol;
  const Index dh = f1.dim_in();
  const Index dk = f1.dim_out();
  const ComplexMatrix id = identity(dh);

  if (opt.fast_paths && detail::has_rank1_deficiency(f1, tol) && detail::has_rank1_deficiency(f2, tol)) {
    UpperChannelCertificate cert = rank1_upper_channels_equal(f1, f2, tol);
    Decision out = cert.equal ? detail::weak_from_upper(*cert.channel, f1, f2, "rank1_family", tol)
                              : detail::answer_only(Answer::no, "rank1_family");
    out.oracle = std::move(cert);
    return out;
  }

  const Index side = dh * dk;
  FeasibilityProblem p;
  const auto lam = p.add_block("Lambda", side);
  const auto s1 = p.add_block("Lambda-Phi1", side, detail::input_face((id - f1.heisenberg_unit()).transpose(), dk, tol));
  const auto s2 = p.add_block("Lambda-Phi2", side, detail::input_face((id - f2.heisenberg_unit()).transpose(), dk, tol));
  p.add_constraint(encode_heisenberg_unit_constraint({lam}, f1.dims(), id, "channel"));
  p.add_constraint(encode_sum_constraint({{lam, 1.0}, {s1, -1.0}}, f1.choi(), "first below"));
  p.add_constraint(encode_sum_constraint({{lam, 1.0}, {s2, -1.0}}, f2.choi(), "second below"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    const CPMap upper = make_channel(dh, dk, detail::clean(w[lam]), tol);
    return detail::weak_from_upper(upper, f1, f2, "solver", tol);
  });
}

/// Channel Λ ≥ Φ and an operation Φ′ ≤ Λ with Φ′ᴴ(I) = E.
inline Decision weakly_compatible_op_ef(const CPMap& f, const Effect& e, const DecideOptions& opt = {}) {
  detail::require_same_input(f.dim_in(), e.dim());
  const Tolerances& tol = opt.tol;
  const Index dh = f.dim_in();
  const Index dk = f.dim_out();
  const ComplexMatrix id = identity(dh);
  const ComplexMatrix& em = e.matrix();
  const Index side = dh * dk;

  FeasibilityProblem p;
  const auto lam = p.add_block("Lambda", side);
  const auto part = p.add_block("PhiE", side, detail::input_face(em.transpose(), dk, tol));
  const auto s1 = p.add_block("Lambda-Phi", side, detail::input_face((id - f.heisenberg_unit()).transpose(), dk, tol));
  const auto s2 = p.add_block("Lambda-PhiE", side, detail::input_face((id - em).transpose(), dk, tol));
  p.add_constraint(encode_heisenberg_unit_constraint({lam}, f.dims(), id, "channel"));
  p.add_constraint(encode_heisenberg_unit_constraint({part}, f.dims(), em, "effect part"));
  p.add_constraint(encode_sum_constraint({{lam, 1.0}, {s1, -1.0}}, f.choi(), "operation below"));
  p.add_constraint(encode_sum_constraint({{lam, 1.0}, {part, -1.0}, {s2, -1.0}}, zeros(side, side), "effect below"));
  const FeasibilityOutcome r = solve(p, tol, opt.solve_options());
  return detail::accept_witness(r, "solver", [&](const std::vector<ComplexMatrix>& w) {
    const CPMap upper = make_channel(dh, dk, detail::clean(w[lam]), tol);
    const CPMap phi_e(dh, dk, detail::clean(w[part]), tol);
    Instrument i1({"0", "1"}, {f, CPMap(dh, dk, detail::clean(upper.choi() - f.choi()), tol)}, tol);
    Instrument i2({"1", "0"}, {phi_e, CPMap(dh, dk, detail::clean(upper.choi() - phi_e.choi()), tol)}, tol);
    return detail::yes_with_pair("solver", std::move(i1), std::move(i2), f, e, tol);
  });
}

/// Classical-output devices are always weakly compatible: both sit in
/// instruments x ↦ tr[A(x)·]η with the same contraction total.
inline Decision weakly_compatible_classical(const Observable& a1, const Observable& a2, const DecideOptions& opt = {}) {
  detail::require_same_input(a1.dim(), a2.dim());
  const ComplexMatrix eta = maximally_mixed(a1.dim());
  return detail::yes_with_pair("contraction_witness", canonical_instrument(a1, eta, opt.tol),
                               canonical_instrument(a2, eta, opt.tol), a1, a2, opt.tol);
}

inline Decision weakly_compatible_ef_ef(const Effect& e1, const Effect& e2, const DecideOptions& opt = {}) {
  detail::require_same_input(e1.dim(), e2.dim());
  const ComplexMatrix eta = maximally_mixed(e1.dim());
  return detail::yes_with_pair("contraction_witness", canonical_instrument(e1, eta, opt.tol),
                               canonical_instrument(e2, eta, opt.tol), e1, e2, opt.tol);
}

// ---------------------------------------------------------------------------
// Classification

namespace detail {

inline Verdict combine(Decision compat, const std::function<Decision()>& weak) {
  Verdict v;
  if (compat.answer == Answer::yes) {
    v.relation = Relation::compatible;
    v.compat = std::move(compat);
    return v;
  }
  Decision w = weak();
  if (w.answer == Answer::no) {
    v.relation = Relation::strongly_incompatible;
  } else if (compat.answer == Answer::no && w.answer == Answer::yes) {
    v.relation = Relation::weakly_compatible_only;
  } else {
    v.relation = Relation::undecided;
  }
  v.compat = std::move(compat);
  v.weak = std::move(w);
  return v;
}

/// For channel pairs the weak and plain relations coincide.
inline Verdict channel_verdict(Decision d) {
  Verdict v;
  v.relation = d.answer == Answer::yes  ? Relation::compatible
               : d.answer == Answer::no ? Relation::strongly_incompatible
                                        : Relation::undecided;
  v.weak = d;
  v.compat = std::move(d);
  return v;
}

inline Observable as_observable(const Effect& e, const Tolerances& tol) { return binary_observable(e, tol); }

[[noreturn]] inline void unsupported(DeviceKind a, DeviceKind b) {
  fail(ErrorCode::unsupported_pair,
       "no decider for the pair (" + std::string(to_string(a)) + ", " + std::string(to_string(b)) + ")");
}

}  // namespace detail

/// Dispatches on the (unordered) pair of kinds. Supported: effect/observable
/// pairs, operation-operation, operation-effect, and channel against
/// operation, effect, observable, channel or instrument.
inline Verdict classify(const Device& d1, const Device& d2, const DecideOptions& opt = {}) {
  const DeviceKind k1 = kind_of(d1);
  const DeviceKind k2 = kind_of(d2);
  detail::require_same_input(input_dim(d1), input_dim(d2));
  const Tolerances& tol = opt.tol;
  using K = DeviceKind;

  auto swapped = [&](Verdict v) {
    // Deciders are called with the arguments reordered; restore the order
    // of the parts so parts1 always describes d1.
    auto flip = [](Decision& d) {
      std::swap(d.parts1, d.parts2);
      if (d.instrument_pair) std::swap(d.instrument_pair->first, d.instrument_pair->second);
    };
    flip(v.compat);
    if (v.weak) flip(*v.weak);
    return v;
  };

  // Channels first: every pair containing one is decided by a single relation.
  if (k1 == K::channel || k2 == K::channel) {
    const bool first = k1 == K::channel;
    const CPMap& lam = std::get<CPMap>(first ? d1 : d2);
    const Device& other = first ? d2 : d1;
    const K ko = first ? k2 : k1;
    Decision d;
    switch (ko) {
      case K::channel: d = ch_ch_compatible(lam, std::get<CPMap>(other), opt); break;
      case K::operation: d = ch_op_compatible(lam, std::get<CPMap>(other), opt); break;
      case K::effect: d = ch_ef_compatible(lam, std::get<Effect>(other), opt); break;
      case K::observable: d = ch_ob_compatible(lam, std::get<Observable>(other), opt); break;
      case K::instrument: d = ch_ins_compatible(lam, std::get<Instrument>(other), opt); break;
    }
    Verdict v = detail::channel_verdict(std::move(d));
    return first ? v : swapped(std::move(v));
  }

  if (k1 == K::instrument || k2 == K::instrument) detail::unsupported(k1, k2);

  if (k1 == K::operation && k2 == K::operation) {
    const CPMap& a = std::get<CPMap>(d1);
    const CPMap& b = std::get<CPMap>(d2);
    return detail::combine(op_op_compatible(a, b, opt), [&] { return weakly_compatible_ops(a, b, opt); });
  }
  if (k1 == K::operation || k2 == K::operation) {
    const bool first = k1 == K::operation;
    const K ko = first ? k2 : k1;
    if (ko != K::effect) detail::unsupported(k1, k2);
    const CPMap& f = std::get<CPMap>(first ? d1 : d2);
    const Effect& e = std::get<Effect>(first ? d2 : d1);
    Verdict v = detail::combine(op_ef_compatible(f, e, opt), [&] { return weakly_compatible_op_ef(f, e, opt); });
    return first ? v : swapped(std::move(v));
  }

  // Effects and observables.
  if (k1 == K::effect && k2 == K::effect) {
    const Effect& a = std::get<Effect>(d1);
    const Effect& b = std::get<Effect>(d2);
    return detail::combine(coexistent_effects(a, b, opt), [&] { return weakly_compatible_ef_ef(a, b, opt); });
  }
  // Mixed effect/observable: the effect enters as its binary observable,
  // so witnesses describe it through the outcome "1".
  const Observable a = k1 == K::effect ? detail::as_observable(std::get<Effect>(d1), tol) : std::get<Observable>(d1);
  const Observable b = k2 == K::effect ? detail::as_observable(std::get<Effect>(d2), tol) : std::get<Observable>(d2);
  return detail::combine(jointly_measurable(a, b, opt), [&] { return weakly_compatible_classical(a, b, opt); });
}

/// Parts of the pair inside a witness as Kraus index groups.
struct KrausGroup {
  Label name;
  std::vector<std::size_t> indices;
};

/// Kraus form of a witness. Compatible: one list {K_j}; each device is a
/// union of index groups. Weak: two lists {K_j}, {L_j} padded with zero
/// operators to equal length, with Σ K_j·K_j† = Σ L_j·L_j†.
struct KrausCertificate {
  bool weak = false;
  std::vector<ComplexMatrix> kraus;
  std::vector<ComplexMatrix> second_kraus;
  std::vector<KrausGroup> groups1;
  std::vector<KrausGroup> groups2;
};

namespace detail {

struct KrausExpansion {
  std::vector<ComplexMatrix> ops;
  std::map<Label, std::vector<std::size_t>> by_outcome;
};

inline KrausExpansion expand(const Instrument& ins, const Tolerances& tol) {
  KrausExpansion out;
  for (std::size_t i = 0; i < ins.size(); ++i) {
    auto& idx = out.by_outcome[ins.outcomes()[i]];
    const KrausSet ks = kraus_from_choi(ins.branch_at(i), tol);
    for (const auto& k : ks.ops()) {
      idx.push_back(out.ops.size());
      out.ops.push_back(k);
    }
  }
  return out;
}

inline std::vector<KrausGroup> groups_for(const PartGroups& parts, const KrausExpansion& ex) {
  std::vector<KrausGroup> out;
  for (const auto& [name, labels] : parts) {
    KrausGroup g{name, {}};
    for (const auto& l : labels) {
      const auto& idx = ex.by_outcome.at(l);
      g.indices.insert(g.indices.end(), idx.begin(), idx.end());
    }
    std::sort(g.indices.begin(), g.indices.end());
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

inline KrausCertificate kraus_witness(const Decision& d, const Tolerances& tol = {}) {
  KrausCertificate out;
  if (d.answer != Answer::yes) fail(ErrorCode::missing_witness, "decision carries no witness");
  if (d.instrument) {
    const auto ex = detail::expand(*d.instrument, tol);
    out.kraus = ex.ops;
    out.groups1 = detail::groups_for(d.parts1, ex);
    out.groups2 = detail::groups_for(d.parts2, ex);
    return out;
  }
  if (d.instrument_pair) {
    const auto e1 = detail::expand(d.instrument_pair->first, tol);
    const auto e2 = detail::expand(d.instrument_pair->second, tol);
    out.weak = true;
    out.kraus = e1.ops;
    out.second_kraus = e2.ops;
    const Index rows = out.kraus.empty() ? out.second_kraus.front().rows() : out.kraus.front().rows();
    const Index cols = out.kraus.empty() ? out.second_kraus.front().cols() : out.kraus.front().cols();
    while (out.kraus.size() < out.second_kraus.size()) out.kraus.push_back(zeros(rows, cols));
    while (out.second_kraus.size() < out.kraus.size()) out.second_kraus.push_back(zeros(rows, cols));
    out.groups1 = detail::groups_for(d.parts1, e1);
    out.groups2 = detail::groups_for(d.parts2, e2);
    return out;
  }
  fail(ErrorCode::missing_witness, "decision carries no instrument witness");
}

inline KrausCertificate kraus_witness(const Verdict& v, const Tolerances& tol = {}) {
  if (v.relation == Relation::compatible) return kraus_witness(v.compat, tol);
  if (v.weak && v.weak->answer == Answer::yes) return kraus_witness(*v.weak, tol);
  fail(ErrorCode::missing_witness, "verdict carries no witness");
}

}  // namespace qdev
