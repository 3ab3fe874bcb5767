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

// The five device kinds (effect, observable, operation, channel, instrument)
// and the basic maps between them.
//
// Choi convention used everywhere: for a map Φ from L(H) to L(K),
//
//     J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij),   E_ij = |i⟩⟨j| on H (input slot first),
//
// so J has side dH·dK, Φ(ρ) = Tr_in[J (ρᵀ ⊗ I)], and the Heisenberg unit is
// Φᴴ(I) = (Tr_out J)ᵀ. A Kraus operator K contributes |K⟩⟩⟨⟨K| with
// |K⟩⟩[i·dK + a] = K(a, i).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qdev/matkit.hpp"

namespace qdev {

/// Largest outcome set the exhaustive part-of searches accept.
inline constexpr std::size_t kMaxSearchOutcomes = 12;

using Label = std::string;
using LabelSet = std::vector<Label>;

// ---------------------------------------------------------------------------
// Effect

/// Hermitian operator with 0 ≤ E ≤ I.
class Effect {
 public:
  explicit Effect(ComplexMatrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
    require_square(m_, "effect");
    require_finite(m_, "effect");
    if (!is_hermitian(m_, tol.eq_tol)) fail(ErrorCode::not_hermitian, "effect is not Hermitian");
    const RealVector ev = hermitian_eigenvalues(m_);
    if (ev.size() > 0 && (ev(0) < -tol.psd_tol || ev(ev.size() - 1) > 1.0 + tol.psd_tol)) {
      fail(ErrorCode::invalid_effect,
           "effect spectrum [" + std::to_string(ev(0)) + ", " +
               std::to_string(ev(ev.size() - 1)) + "] leaves [0, 1]");
    }
  }

  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

// ---------------------------------------------------------------------------
// Observable

/// Finite ordered outcome set with one effect per outcome, summing to I.
class Observable {
 public:
  Observable(std::vector<std::pair<Label, ComplexMatrix>> entries, const Tolerances& tol = {}) {
    if (entries.empty()) fail(ErrorCode::dimension_mismatch, "observable needs at least one outcome");
    const Index d = entries.front().second.rows();
    ComplexMatrix total = zeros(d, d);
    std::set<Label> seen;
    for (auto& [label, m] : entries) {
      if (!seen.insert(label).second) fail(ErrorCode::duplicate_label, "observable outcome '" + label + "'");
      if (m.rows() != d || m.cols() != d) {
        fail(ErrorCode::dimension_mismatch, "observable effect '" + label + "' has wrong size");
      }
      effects_.emplace_back(m, tol);
      outcomes_.push_back(label);
      total += m;
    }
    if (!approx_equal(identity(d), total, tol.eq_tol)) {
      fail(ErrorCode::observable_not_normalized, "observable effects do not sum to the identity");
    }
  }

  const LabelSet& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  Index dim() const { return effects_.front().dim(); }

  std::size_t index_of(const Label& label) const {
    const auto it = std::find(outcomes_.begin(), outcomes_.end(), label);
    if (it == outcomes_.end()) fail(ErrorCode::unknown_label, "observable has no outcome '" + label + "'");
    return static_cast<std::size_t>(it - outcomes_.begin());
  }

  const Effect& effect(const Label& label) const { return effects_[index_of(label)]; }
  const Effect& effect_at(std::size_t i) const { return effects_.at(i); }

  /// A(X) = Σ_{x∈X} A(x).
  ComplexMatrix subset_sum(const LabelSet& subset) const {
    ComplexMatrix total = zeros(dim(), dim());
    for (const auto& label : subset) total += effect(label).matrix();
    return total;
  }

 private:
  LabelSet outcomes_;
  std::vector<Effect> effects_;
};

// ---------------------------------------------------------------------------
// CPMap

enum class MapKind { operation, channel };

/// Completely positive, trace non-increasing map L(H) → L(K) held by its
/// Choi matrix. The kind is inferred: channel iff trace preserving.
class CPMap {
 public:
  CPMap(Index dim_in, Index dim_out, ComplexMatrix choi, const Tolerances& tol = {})
      : dim_in_(dim_in), dim_out_(dim_out), choi_(std::move(choi)) {
    if (dim_in <= 0 || dim_out <= 0) fail(ErrorCode::dimension_mismatch, "map dims must be positive");
    if (choi_.rows() != dim_in * dim_out || choi_.cols() != dim_in * dim_out) {
      fail(ErrorCode::dimension_mismatch, "Choi matrix side " + std::to_string(choi_.rows()) +
                                              " != dim_in*dim_out = " + std::to_string(dim_in * dim_out));
    }
    require_finite(choi_, "Choi matrix");
    if (!is_hermitian(choi_, tol.eq_tol)) fail(ErrorCode::not_hermitian, "Choi matrix is not Hermitian");
    const double lmin = min_eigenvalue(choi_);
    if (lmin < -tol.psd_tol) {
      fail(ErrorCode::not_completely_positive,
           "Choi matrix has eigenvalue " + std::to_string(lmin));
    }
    const ComplexMatrix unit = heisenberg_unit();
    const double excess = max_eigenvalue(unit - identity(dim_in_));
    if (excess > tol.psd_tol) {
      fail(ErrorCode::trace_increasing, "Φᴴ(I) exceeds I by " + std::to_string(excess));
    }
    kind_ = approx_equal(identity(dim_in_), unit, tol.eq_tol) ? MapKind::channel : MapKind::operation;
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  Dims dims() const { return {dim_in_, dim_out_}; }
  const ComplexMatrix& choi() const { return choi_; }
  MapKind kind() const { return kind_; }
  bool is_channel() const { return kind_ == MapKind::channel; }

  /// Φᴴ(I) = (Tr_out J)ᵀ.
  ComplexMatrix heisenberg_unit() const {
    return partial_trace(choi_, dims(), 0).transpose();
  }

 private:
  Index dim_in_;
  Index dim_out_;
  ComplexMatrix choi_;
  MapKind kind_ = MapKind::operation;
};

/// Channel-only construction; rejects trace-decreasing maps.
inline CPMap make_channel(Index dim_in, Index dim_out, ComplexMatrix choi, const Tolerances& tol = {}) {
  CPMap map(dim_in, dim_out, std::move(choi), tol);
  if (!map.is_channel()) fail(ErrorCode::not_a_channel, "map is not trace preserving");
  return map;
}

inline CPMap null_operation(Index dim_in, Index dim_out) {
  return CPMap(dim_in, dim_out, zeros(dim_in * dim_out, dim_in * dim_out));
}

inline CPMap scaled(const CPMap& m, double factor, const Tolerances& tol = {}) {
  return CPMap(m.dim_in(), m.dim_out(), factor * m.choi(), tol);
}

inline void require_same_dims(const CPMap& a, const CPMap& b, const std::string& what) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) {
    fail(ErrorCode::dimension_mismatch, what + ": maps have different dimensions");
  }
}

inline bool same_map(const CPMap& a, const CPMap& b, double eq_tol) {
  return a.dim_in() == b.dim_in() && a.dim_out() == b.dim_out() &&
         approx_equal(a.choi(), b.choi(), eq_tol);
}

// ---------------------------------------------------------------------------
// Schrödinger and Heisenberg actions

/// Schrödinger action of a raw Choi matrix (not necessarily CP):
/// Tr_in[J (ρᵀ ⊗ I)] = Σ_ij ρ_ij J_(i,j) block.
inline ComplexMatrix apply_choi(const ComplexMatrix& choi, Dims dims, const ComplexMatrix& rho) {
  if (rho.rows() != dims.first || rho.cols() != dims.first || choi.rows() != dims.total()) {
    fail(ErrorCode::dimension_mismatch, "apply_s: input has wrong size");
  }
  const Index dk = dims.second;
  ComplexMatrix out = zeros(dk, dk);
  for (Index i = 0; i < dims.first; ++i) {
    for (Index j = 0; j < dims.first; ++j) {
      if (rho(i, j) != cplx(0.0, 0.0)) out += rho(i, j) * choi.block(i * dk, j * dk, dk, dk);
    }
  }
  return out;
}

inline ComplexMatrix apply_s(const CPMap& m, const ComplexMatrix& rho) {
  return apply_choi(m.choi(), m.dims(), rho);
}

/// Φᴴ(T)_(j,i) = tr[J_(i,j) block · T].
inline ComplexMatrix apply_h(const CPMap& m, const ComplexMatrix& t) {
  if (t.rows() != m.dim_out() || t.cols() != m.dim_out()) {
    fail(ErrorCode::dimension_mismatch, "apply_h: operator has wrong size");
  }
  const Index dk = m.dim_out();
  ComplexMatrix out(m.dim_in(), m.dim_in());
  for (Index i = 0; i < m.dim_in(); ++i) {
    for (Index j = 0; j < m.dim_in(); ++j) {
      out(j, i) = (m.choi().block(i * dk, j * dk, dk, dk) * t).trace();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kraus representation

/// Kraus operators K_j : H → K (dK × dH each) with Σ K_j†K_j ≤ I.
class KrausSet {
 public:
  KrausSet(Index dim_in, Index dim_out, std::vector<ComplexMatrix> ops, const Tolerances& tol = {})
      : dim_in_(dim_in), dim_out_(dim_out), ops_(std::move(ops)) {
    ComplexMatrix gram = zeros(dim_in_, dim_in_);
    for (const auto& k : ops_) {
      if (k.rows() != dim_out_ || k.cols() != dim_in_) {
        fail(ErrorCode::dimension_mismatch, "Kraus operator has shape " + std::to_string(k.rows()) + "x" +
                                                std::to_string(k.cols()));
      }
      require_finite(k, "Kraus operator");
      gram += k.adjoint() * k;
    }
    if (max_eigenvalue(gram - identity(dim_in_)) > tol.psd_tol) {
      fail(ErrorCode::trace_increasing, "Σ K†K exceeds the identity");
    }
  }

  /// Shape taken from the first operator.
  explicit KrausSet(std::vector<ComplexMatrix> ops, const Tolerances& tol = {})
      : KrausSet(ops.empty() ? 0 : ops.front().cols(), ops.empty() ? 0 : ops.front().rows(), ops, tol) {
    if (ops_.empty()) fail(ErrorCode::dimension_mismatch, "empty Kraus list needs explicit dims");
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

 private:
  Index dim_in_;
  Index dim_out_;
  std::vector<ComplexMatrix> ops_;
};

/// |K⟩⟩ with |K⟩⟩[i·dK + a] = K(a, i).
inline ComplexVector choi_vector(const ComplexMatrix& k) {
  const Index dk = k.rows();
  const Index dh = k.cols();
  ComplexVector v(dh * dk);
  for (Index i = 0; i < dh; ++i) {
    for (Index a = 0; a < dk; ++a) v(i * dk + a) = k(a, i);
  }
  return v;
}

inline ComplexMatrix kraus_from_vector(const ComplexVector& v, Index dim_in, Index dim_out) {
  ComplexMatrix k(dim_out, dim_in);
  for (Index i = 0; i < dim_in; ++i) {
    for (Index a = 0; a < dim_out; ++a) k(a, i) = v(i * dim_out + a);
  }
  return k;
}

inline ComplexMatrix choi_of_kraus_ops(const std::vector<ComplexMatrix>& ops, Index dim_in, Index dim_out) {
  ComplexMatrix choi = zeros(dim_in * dim_out, dim_in * dim_out);
  for (const auto& k : ops) {
    const ComplexVector v = choi_vector(k);
    choi += v * v.adjoint();
  }
  return choi;
}

inline CPMap choi_from_kraus(const KrausSet& k, const Tolerances& tol = {}) {
  return CPMap(k.dim_in(), k.dim_out(), choi_of_kraus_ops(k.ops(), k.dim_in(), k.dim_out()), tol);
}

/// Single-Kraus map ρ ↦ KρK†.
inline CPMap kraus_map(const ComplexMatrix& k, const Tolerances& tol = {}) {
  return choi_from_kraus(KrausSet(k.cols(), k.rows(), {k}, tol), tol);
}

/// Kraus operators from the Choi eigendecomposition; eigenvalues at or below
/// psd_tol·max(1, tr J) are dropped. Ordered by decreasing eigenvalue.
inline KrausSet kraus_from_choi(const CPMap& m, const Tolerances& tol = {}) {
  const HermEig eig = herm_eig(m.choi(), tol.eq_tol);
  const double floor = tol.psd_tol * std::max(1.0, m.choi().trace().real());
  std::vector<ComplexMatrix> ops;
  for (Index k = eig.evals.size() - 1; k >= 0; --k) {
    if (eig.evals(k) <= floor) break;
    ops.push_back(std::sqrt(eig.evals(k)) * kraus_from_vector(eig.evecs.col(k), m.dim_in(), m.dim_out()));
  }
  // Dropped eigenvalues may push Σ K†K marginally; validate with a loosened floor.
  Tolerances loose = tol;
  loose.psd_tol = std::max(tol.psd_tol, floor * static_cast<double>(m.choi().rows()));
  return KrausSet(m.dim_in(), m.dim_out(), std::move(ops), loose);
}

// ---------------------------------------------------------------------------
// Standard constructions

inline CPMap identity_channel(Index d) { return kraus_map(identity(d)); }

/// ρ ↦ √A ρ √A.
inline CPMap luders(const Effect& a, const Tolerances& tol = {}) {
  return kraus_map(mat_sqrt(a.matrix(), tol), tol);
}

/// Measure-and-prepare map ρ ↦ tr[Dρ]·σ, Choi Dᵀ ⊗ σ.
inline ComplexMatrix measure_prepare_choi(const ComplexMatrix& d, const ComplexMatrix& sigma) {
  return kron(d.transpose(), sigma);
}

/// ρ ↦ tr(ρ)·η on an input of dimension dim_in.
inline CPMap contraction_channel(const ComplexMatrix& eta, Index dim_in, const Tolerances& tol = {}) {
  require_density_matrix(eta, tol, "contraction target");
  if (dim_in <= 0) fail(ErrorCode::dimension_mismatch, "contraction input dim must be positive");
  return make_channel(dim_in, eta.rows(), measure_prepare_choi(identity(dim_in), eta), tol);
}

inline void require_distribution(const std::vector<double>& p, const Tolerances& tol) {
  if (p.empty()) fail(ErrorCode::invalid_distribution, "empty probability vector");
  double total = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < -tol.psd_tol) fail(ErrorCode::invalid_distribution, "negative probability");
    total += x;
  }
  if (std::abs(total - 1.0) > tol.eq_tol * 2.0) fail(ErrorCode::invalid_distribution, "probabilities do not sum to 1");
}

inline LabelSet numbered_labels(std::size_t n) {
  LabelSet out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

/// x ↦ p(x)·I with outcomes "0", "1", ...
inline Observable trivial_observable(const std::vector<double>& p, Index dim, const Tolerances& tol = {}) {
  require_distribution(p, tol);
  std::vector<std::pair<Label, ComplexMatrix>> entries;
  for (std::size_t i = 0; i < p.size(); ++i) entries.emplace_back(std::to_string(i), p[i] * identity(dim));
  return Observable(std::move(entries), tol);
}

/// Two-outcome observable {E, I − E} with outcomes "1" and "0".
inline Observable binary_observable(const Effect& e, const Tolerances& tol = {}) {
  return Observable({{"1", e.matrix()}, {"0", identity(e.dim()) - e.matrix()}}, tol);
}

// ---------------------------------------------------------------------------
// Four-effect decomposition

struct FourEffectDecomposition {
  std::array<cplx, 4> coeffs;
  std::vector<Effect> effects;

  ComplexMatrix resum() const {
    ComplexMatrix out = coeffs[0] * effects[0].matrix();
    for (std::size_t i = 1; i < 4; ++i) out += coeffs[i] * effects[i].matrix();
    return out;
  }
};

/// T = T_R + i·T_I with T_R, T_I Hermitian; each S splits as S₊ − S₋ with
/// S± = (‖S‖I ± S)/2 ≥ 0; each positive P becomes ‖P‖·(P/‖P‖).
inline FourEffectDecomposition four_effect_decomposition(const ComplexMatrix& t, const Tolerances& tol = {}) {
  require_square(t, "four_effect_decomposition input");
  require_finite(t, "four_effect_decomposition input");
  const Index d = t.rows();
  const ComplexMatrix re = 0.5 * (t + t.adjoint());
  const ComplexMatrix im = (t - t.adjoint()) / cplx(0.0, 2.0);
  FourEffectDecomposition out;
  const cplx signs[4] = {1.0, -1.0, cplx(0.0, 1.0), cplx(0.0, -1.0)};
  std::size_t slot = 0;
  for (const ComplexMatrix* s : {&re, &im}) {
    const ComplexMatrix herm = hermitian_part(*s);
    const double norm = herm_norm(herm);
    for (int sign : {+1, -1}) {
      const ComplexMatrix positive = 0.5 * (norm * identity(d) + static_cast<double>(sign) * herm);
      const double pnorm = herm_norm(positive);
      if (pnorm > 0.0) {
        out.coeffs[slot] = signs[slot] * pnorm;
        // Clamp roundoff so the normalised operator validates as an effect.
        out.effects.emplace_back(hermitian_part(positive / pnorm), tol);
      } else {
        out.coeffs[slot] = 0.0;
        out.effects.emplace_back(zeros(d, d), tol);
      }
      ++slot;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instrument

/// Outcome-indexed operations summing to a channel.
class Instrument {
 public:
  Instrument(LabelSet outcomes, std::vector<CPMap> branches, const Tolerances& tol = {})
      : outcomes_(std::move(outcomes)), branches_(std::move(branches)) {
    if (outcomes_.empty() || outcomes_.size() != branches_.size()) {
      fail(ErrorCode::dimension_mismatch, "instrument needs one branch per outcome");
    }
    std::set<Label> seen;
    for (const auto& l : outcomes_) {
      if (!seen.insert(l).second) fail(ErrorCode::duplicate_label, "instrument outcome '" + l + "'");
    }
    for (const auto& b : branches_) require_same_dims(branches_.front(), b, "instrument branches");
    const ComplexMatrix total = sum_choi(outcomes_);
    const ComplexMatrix unit = partial_trace(total, dims(), 0).transpose();
    if (!approx_equal(identity(dim_in()), unit, tol.eq_tol)) {
      fail(ErrorCode::instrument_not_channel, "instrument branches do not sum to a channel");
    }
  }

  const LabelSet& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  Index dim_in() const { return branches_.front().dim_in(); }
  Index dim_out() const { return branches_.front().dim_out(); }
  Dims dims() const { return {dim_in(), dim_out()}; }

  std::size_t index_of(const Label& label) const {
    const auto it = std::find(outcomes_.begin(), outcomes_.end(), label);
    if (it == outcomes_.end()) fail(ErrorCode::unknown_label, "instrument has no outcome '" + label + "'");
    return static_cast<std::size_t>(it - outcomes_.begin());
  }

  const CPMap& branch(const Label& label) const { return branches_[index_of(label)]; }
  const CPMap& branch_at(std::size_t i) const { return branches_.at(i); }
  const std::vector<CPMap>& branches() const { return branches_; }

  /// Choi matrix of I(X, ·).
  ComplexMatrix sum_choi(const LabelSet& subset) const {
    ComplexMatrix total = zeros(dims().total(), dims().total());
    for (const auto& l : subset) total += branch(l).choi();
    return total;
  }

 private:
  LabelSet outcomes_;
  std::vector<CPMap> branches_;
};

/// I(X, ·) as an operation.
inline CPMap instrument_part_op(const Instrument& ins, const LabelSet& subset, const Tolerances& tol = {}) {
  return CPMap(ins.dim_in(), ins.dim_out(), ins.sum_choi(subset), tol);
}

/// Iᴴ(X, I).
inline Effect instrument_part_effect(const Instrument& ins, const LabelSet& subset, const Tolerances& tol = {}) {
  return Effect(partial_trace(ins.sum_choi(subset), ins.dims(), 0).transpose(), tol);
}

inline CPMap total_channel(const Instrument& ins, const Tolerances& tol = {}) {
  return make_channel(ins.dim_in(), ins.dim_out(), ins.sum_choi(ins.outcomes()), tol);
}

/// x ↦ Iᴴ(x, I).
inline Observable induced_observable(const Instrument& ins, const Tolerances& tol = {}) {
  std::vector<std::pair<Label, ComplexMatrix>> entries;
  for (std::size_t i = 0; i < ins.size(); ++i) {
    entries.emplace_back(ins.outcomes()[i], ins.branch_at(i).heisenberg_unit());
  }
  return Observable(std::move(entries), tol);
}

/// Total function Ω → Ω′. The codomain fixes the order of Ω′ and may
/// contain labels with empty preimage.
struct PointerMap {
  std::map<Label, Label> image;
  LabelSet codomain;

  static PointerMap identity_on(const LabelSet& labels) {
    PointerMap f;
    for (const auto& l : labels) f.image[l] = l;
    f.codomain = labels;
    return f;
  }

  static PointerMap constant(const LabelSet& labels, const Label& target) {
    PointerMap f;
    for (const auto& l : labels) f.image[l] = target;
    f.codomain = {target};
    return f;
  }

  /// Codomain in order: declared labels, then images by first appearance.
  LabelSet ordered_codomain(const LabelSet& domain) const {
    LabelSet out = codomain;
    for (const auto& x : domain) {
      const auto it = image.find(x);
      if (it == image.end()) fail(ErrorCode::unknown_label, "pointer map has no image for '" + x + "'");
      if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
    }
    return out;
  }
};

/// I′(y, ·) = I(f⁻¹(y), ·).
inline Instrument relabel(const Instrument& ins, const PointerMap& f, const Tolerances& tol = {}) {
  const LabelSet target = f.ordered_codomain(ins.outcomes());
  std::vector<CPMap> branches;
  for (const auto& y : target) {
    ComplexMatrix choi = zeros(ins.dims().total(), ins.dims().total());
    for (std::size_t i = 0; i < ins.size(); ++i) {
      if (f.image.at(ins.outcomes()[i]) == y) choi += ins.branch_at(i).choi();
    }
    branches.emplace_back(ins.dim_in(), ins.dim_out(), std::move(choi), tol);
  }
  return Instrument(target, std::move(branches), tol);
}

// ---------------------------------------------------------------------------
// Part-of searches

namespace detail {

inline void require_search_bound(std::size_t n) {
  if (n > kMaxSearchOutcomes) {
    fail(ErrorCode::outcome_bound_exceeded, "outcome set of size " + std::to_string(n) +
                                                " exceeds the exhaustive-search bound " +
                                                std::to_string(kMaxSearchOutcomes));
  }
}

/// First subset X (in binary-counter order) with Σ_{x∈X} items[x] ≈ target.
inline std::optional<std::vector<std::size_t>> find_subset(const std::vector<ComplexMatrix>& items,
                                                           const ComplexMatrix& target, double eq_tol) {
  require_search_bound(items.size());
  const std::uint32_t n = static_cast<std::uint32_t>(items.size());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    ComplexMatrix total = zeros(target.rows(), target.cols());
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) total += items[i];
    }
    if (approx_equal(target, total, eq_tol)) {
      std::vector<std::size_t> out;
      for (std::uint32_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) out.push_back(i);
      }
      return out;
    }
  }
  return std::nullopt;
}

/// Backtracking search for an assignment item → target whose per-target sums
/// match. All items and targets are PSD, so a partial sum that already
/// exceeds its target prunes the branch.
class PointerSearch {
 public:
  PointerSearch(const std::vector<ComplexMatrix>& items, const std::vector<ComplexMatrix>& targets,
                const Tolerances& tol)
      : items_(items), targets_(targets), tol_(tol), assign_(items.size(), 0) {
    for (const auto& t : targets_) remaining_.push_back(t);
  }

  std::optional<std::vector<std::size_t>> run() {
    if (targets_.empty()) return std::nullopt;
    if (descend(0)) return assign_;
    return std::nullopt;
  }

 private:
  bool descend(std::size_t i) {
    if (i == items_.size()) {
      for (std::size_t y = 0; y < targets_.size(); ++y) {
        if (!approx_equal(targets_[y], targets_[y] - remaining_[y], tol_.eq_tol)) return false;
      }
      return true;
    }
    for (std::size_t y = 0; y < targets_.size(); ++y) {
      remaining_[y] -= items_[i];
      const double floor = -(tol_.psd_tol + tol_.eq_tol * (1.0 + targets_[y].norm()));
      if (min_eigenvalue(remaining_[y]) >= floor) {
        assign_[i] = y;
        if (descend(i + 1)) return true;
      }
      remaining_[y] += items_[i];
    }
    return false;
  }

  const std::vector<ComplexMatrix>& items_;
  const std::vector<ComplexMatrix>& targets_;
  Tolerances tol_;
  std::vector<ComplexMatrix> remaining_;
  std::vector<std::size_t> assign_;
};

inline LabelSet labels_at(const LabelSet& labels, const std::vector<std::size_t>& idx) {
  LabelSet out;
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

inline std::vector<ComplexMatrix> branch_units(const Instrument& ins) {
  std::vector<ComplexMatrix> out;
  for (const auto& b : ins.branches()) out.push_back(b.heisenberg_unit());
  return out;
}

inline std::vector<ComplexMatrix> branch_chois(const Instrument& ins) {
  std::vector<ComplexMatrix> out;
  for (const auto& b : ins.branches()) out.push_back(b.choi());
  return out;
}

inline std::optional<PointerMap> to_pointer(const Instrument& ins, const LabelSet& codomain,
                                            const std::optional<std::vector<std::size_t>>& assign) {
  if (!assign) return std::nullopt;
  PointerMap f;
  f.codomain = codomain;
  for (std::size_t i = 0; i < ins.size(); ++i) f.image[ins.outcomes()[i]] = codomain[(*assign)[i]];
  return f;
}

}  // namespace detail

/// Outcome subset X with Iᴴ(X, I) = E, if any.
inline std::optional<LabelSet> find_part(const Effect& e, const Instrument& ins, const Tolerances& tol = {}) {
  if (e.dim() != ins.dim_in()) fail(ErrorCode::dimension_mismatch, "effect and instrument input differ");
  const auto hit = detail::find_subset(detail::branch_units(ins), e.matrix(), tol.eq_tol);
  if (!hit) return std::nullopt;
  return detail::labels_at(ins.outcomes(), *hit);
}

/// Outcome subset X with I(X, ·) = Φ. Channels only need the total: a
/// channel is part of an instrument iff it equals I(Ω, ·).
inline std::optional<LabelSet> find_part(const CPMap& m, const Instrument& ins, const Tolerances& tol = {}) {
  require_same_dims(m, ins.branch_at(0), "is_part_of");
  if (m.is_channel()) {
    if (approx_equal(m.choi(), ins.sum_choi(ins.outcomes()), tol.eq_tol)) return ins.outcomes();
    return std::nullopt;
  }
  const auto hit = detail::find_subset(detail::branch_chois(ins), m.choi(), tol.eq_tol);
  if (!hit) return std::nullopt;
  return detail::labels_at(ins.outcomes(), *hit);
}

/// Pointer map f with A(y) = Iᴴ(f⁻¹(y), I), if any.
inline std::optional<PointerMap> find_part(const Observable& a, const Instrument& ins, const Tolerances& tol = {}) {
  if (a.dim() != ins.dim_in()) fail(ErrorCode::dimension_mismatch, "observable and instrument input differ");
  detail::require_search_bound(ins.size());
  std::vector<ComplexMatrix> targets;
  for (std::size_t y = 0; y < a.size(); ++y) targets.push_back(a.effect_at(y).matrix());
  const auto items = detail::branch_units(ins);
  return detail::to_pointer(ins, a.outcomes(), detail::PointerSearch(items, targets, tol).run());
}

/// Pointer map f with I′(y, ·) = I(f⁻¹(y), ·), if any.
inline std::optional<PointerMap> find_part(const Instrument& sub, const Instrument& ins, const Tolerances& tol = {}) {
  require_same_dims(sub.branch_at(0), ins.branch_at(0), "is_part_of");
  detail::require_search_bound(ins.size());
  std::vector<ComplexMatrix> targets = detail::branch_chois(sub);
  const auto items = detail::branch_chois(ins);
  return detail::to_pointer(ins, sub.outcomes(), detail::PointerSearch(items, targets, tol).run());
}

template <typename DeviceT>
bool is_part_of(const DeviceT& device, const Instrument& ins, const Tolerances& tol = {}) {
  return find_part(device, ins, tol).has_value();
}

// ---------------------------------------------------------------------------
// Instruments containing a given device

/// Iᴴ(0,T) = tr[ρ₀T]·E, Iᴴ(1,T) = tr[ρ₀T]·(I − E).
inline Instrument canonical_instrument(const Effect& e, const ComplexMatrix& rho0, const Tolerances& tol = {}) {
  require_density_matrix(rho0, tol, "anchor state");
  const Index dh = e.dim();
  const Index dk = rho0.rows();
  Instrument ins({"0", "1"},
                 {CPMap(dh, dk, measure_prepare_choi(e.matrix(), rho0), tol),
                  CPMap(dh, dk, measure_prepare_choi(identity(dh) - e.matrix(), rho0), tol)},
                 tol);
  if (!is_part_of(e, ins, tol)) fail(ErrorCode::internal, "canonical instrument lost its effect");
  return ins;
}

/// Iᴴ(x,T) = tr[ρ₀T]·A(x).
inline Instrument canonical_instrument(const Observable& a, const ComplexMatrix& rho0, const Tolerances& tol = {}) {
  require_density_matrix(rho0, tol, "anchor state");
  std::vector<CPMap> branches;
  for (std::size_t i = 0; i < a.size(); ++i) {
    branches.emplace_back(a.dim(), rho0.rows(), measure_prepare_choi(a.effect_at(i).matrix(), rho0), tol);
  }
  Instrument ins(a.outcomes(), std::move(branches), tol);
  if (!is_part_of(a, ins, tol)) fail(ErrorCode::internal, "canonical instrument lost its observable");
  return ins;
}

/// Iᴴ(0,T) = Φᴴ(T), Iᴴ(1,T) = tr[ρ₀T]·(I − Φᴴ(I)).
inline Instrument canonical_instrument(const CPMap& op, const ComplexMatrix& rho0, const Tolerances& tol = {}) {
  require_density_matrix(rho0, tol, "anchor state");
  if (rho0.rows() != op.dim_out()) fail(ErrorCode::dimension_mismatch, "anchor state must live on the output");
  const ComplexMatrix rest = identity(op.dim_in()) - op.heisenberg_unit();
  Instrument ins({"0", "1"}, {op, CPMap(op.dim_in(), op.dim_out(), measure_prepare_choi(rest, rho0), tol)}, tol);
  if (!is_part_of(op, ins, tol)) fail(ErrorCode::internal, "canonical instrument lost its operation");
  return ins;
}

/// I(x, ·) = p(x)·Λ(·).
inline Instrument weighted_instrument(const CPMap& channel, const std::vector<double>& p, const Tolerances& tol = {}) {
  if (!channel.is_channel()) fail(ErrorCode::not_a_channel, "weighted construction needs a channel");
  require_distribution(p, tol);
  std::vector<CPMap> branches;
  for (double px : p) branches.emplace_back(channel.dim_in(), channel.dim_out(), px * channel.choi(), tol);
  Instrument ins(numbered_labels(p.size()), std::move(branches), tol);
  if (!is_part_of(channel, ins, tol)) fail(ErrorCode::internal, "canonical instrument lost its channel");
  return ins;
}

// ---------------------------------------------------------------------------
// Tagged union over the device kinds

using Device = std::variant<Effect, Observable, CPMap, Instrument>;

enum class DeviceKind { effect, observable, operation, channel, instrument };

inline DeviceKind kind_of(const Device& d) {
  switch (d.index()) {
    case 0: return DeviceKind::effect;
    case 1: return DeviceKind::observable;
    case 2: return std::get<CPMap>(d).is_channel() ? DeviceKind::channel : DeviceKind::operation;
    default: return DeviceKind::instrument;
  }
}

inline std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::effect: return "effect";
    case DeviceKind::observable: return "observable";
    case DeviceKind::operation: return "operation";
    case DeviceKind::channel: return "channel";
    case DeviceKind::instrument: return "instrument";
  }
  return "unknown";
}

inline Index input_dim(const Device& d) {
  return std::visit(
      [](const auto& dev) -> Index {
        using T = std::decay_t<decltype(dev)>;
        if constexpr (std::is_same_v<T, CPMap> || std::is_same_v<T, Instrument>) {
          return dev.dim_in();
        } else {
          return dev.dim();
        }
      },
      d);
}

inline bool is_part_of(const Device& device, const Instrument& ins, const Tolerances& tol = {}) {
  return std::visit([&](const auto& dev) { return is_part_of(dev, ins, tol); }, device);
}

}  // namespace qdev
