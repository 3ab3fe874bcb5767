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

// Measurement models (V1, V2, η, U, F): a probe in state η on V1 couples to
// the system through U : H ⊗ V1 → K ⊗ V2 and the pointer F is read on V2.
// Tensor indices are system-major: (i, v) ↦ i·dV1 + v and (a, w) ↦ a·dV2 + w.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdev/devices.hpp"
#include "qdev/dilation.hpp"

namespace qdev {

class MeasurementModel {
 public:
  MeasurementModel(Index dim_in, Index dim_out, ComplexMatrix eta, ComplexMatrix u, Observable pointer,
                   const Tolerances& tol = {})
      : dim_in_(dim_in), dim_out_(dim_out), eta_(std::move(eta)), u_(std::move(u)), pointer_(std::move(pointer)) {
    require_density_matrix(eta_, tol, "probe state");
    dim_v1_ = eta_.rows();
    dim_v2_ = pointer_.dim();
    if (dim_in_ * dim_v1_ != dim_out_ * dim_v2_) {
      fail(ErrorCode::dimension_mismatch, "dH·dV1 must equal dK·dV2");
    }
    if (u_.rows() != dim_in_ * dim_v1_ || u_.cols() != dim_in_ * dim_v1_) {
      fail(ErrorCode::dimension_mismatch, "coupling unitary has wrong size");
    }
    require_finite(u_, "coupling unitary");
    const ComplexMatrix id = identity(u_.rows());
    if (!approx_equal(u_.adjoint() * u_, id, tol.eq_tol) || !approx_equal(u_ * u_.adjoint(), id, tol.eq_tol)) {
      fail(ErrorCode::not_unitary, "coupling is not unitary");
    }
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  Index dim_v1() const { return dim_v1_; }
  Index dim_v2() const { return dim_v2_; }
  const ComplexMatrix& eta() const { return eta_; }
  const ComplexMatrix& u() const { return u_; }
  const Observable& pointer() const { return pointer_; }

  MeasurementModel with_pointer(Observable pointer, const Tolerances& tol = {}) const {
    return MeasurementModel(dim_in_, dim_out_, eta_, u_, std::move(pointer), tol);
  }

  /// U(ρ ⊗ η)U†; linear in ρ, so it also accepts matrix units.
  ComplexMatrix evolve(const ComplexMatrix& rho) const { return u_ * kron(rho, eta_) * u_.adjoint(); }

 private:
  Index dim_in_;
  Index dim_out_;
  Index dim_v1_ = 0;
  Index dim_v2_ = 0;
  ComplexMatrix eta_;
  ComplexMatrix u_;
  Observable pointer_;
};

namespace detail {

/// tr_V2[ω (I ⊗ F)].
inline ComplexMatrix read_pointer(const MeasurementModel& m, const ComplexMatrix& omega, const ComplexMatrix& f) {
  return partial_trace(omega * kron(identity(m.dim_out()), f), {m.dim_out(), m.dim_v2()}, 0);
}

inline void require_state_on(const MeasurementModel& m, const ComplexMatrix& rho, const Tolerances& tol) {
  if (rho.rows() != m.dim_in()) fail(ErrorCode::dimension_mismatch, "input state has wrong dimension");
  require_density_matrix(rho, tol, "input state");
}

}  // namespace detail

/// p(X|ρ) = tr[U(ρ ⊗ η)U† (I ⊗ F(X))].
inline double model_probability(const MeasurementModel& m, const ComplexMatrix& rho, const LabelSet& subset,
                                const Tolerances& tol = {}) {
  detail::require_state_on(m, rho, tol);
  const ComplexMatrix f = m.pointer().subset_sum(subset);
  return detail::read_pointer(m, m.evolve(rho), f).trace().real();
}

/// ρ′_X = tr_V2[U(ρ ⊗ η)U† (I ⊗ F(X))], unnormalized.
inline ComplexMatrix model_poststate(const MeasurementModel& m, const ComplexMatrix& rho, const LabelSet& subset,
                                     const Tolerances& tol = {}) {
  detail::require_state_on(m, rho, tol);
  const ComplexMatrix f = m.pointer().subset_sum(subset);
  return hermitian_part(detail::read_pointer(m, m.evolve(rho), f));
}

/// Iˢ(y, ρ) = tr_V2[U(ρ ⊗ η)U† (I ⊗ F(f⁻¹(y)))].
inline Instrument model_instrument(const MeasurementModel& m, const PointerMap& f, const Tolerances& tol = {}) {
  const LabelSet& omega = m.pointer().outcomes();
  const LabelSet target = f.ordered_codomain(omega);
  const Index dh = m.dim_in();
  const Index dk = m.dim_out();
  std::vector<ComplexMatrix> evolved;
  for (Index i = 0; i < dh; ++i) {
    for (Index j = 0; j < dh; ++j) {
      ComplexMatrix unit = zeros(dh, dh);
      unit(i, j) = 1.0;
      evolved.push_back(m.evolve(unit));
    }
  }
  std::vector<CPMap> branches;
  for (const auto& y : target) {
    LabelSet pre;
    for (const auto& x : omega) {
      if (f.image.at(x) == y) pre.push_back(x);
    }
    const ComplexMatrix fy = m.pointer().subset_sum(pre);
    ComplexMatrix choi = zeros(dh * dk, dh * dk);
    for (Index i = 0; i < dh; ++i) {
      for (Index j = 0; j < dh; ++j) {
        choi.block(i * dk, j * dk, dk, dk) = detail::read_pointer(m, evolved[i * dh + j], fy);
      }
    }
    branches.emplace_back(dh, dk, hermitian_part(choi), tol);
  }
  return Instrument(target, std::move(branches), tol);
}

inline Instrument model_instrument(const MeasurementModel& m, const Tolerances& tol = {}) {
  return model_instrument(m, PointerMap::identity_on(m.pointer().outcomes()), tol);
}

/// Part of the model ⇔ part of the instrument it induces; pointer
/// relabelings are covered by the part-of searches themselves.
inline bool model_is_part_of(const MeasurementModel& m, const Device& device, const Tolerances& tol = {}) {
  return is_part_of(device, model_instrument(m, tol), tol);
}

namespace detail {

/// Completes orthonormal columns to a unitary: unassigned columns are
/// filled, in index order, by Gram-Schmidt over the canonical basis.
inline ComplexMatrix complete_unitary(Index n, const std::vector<std::pair<Index, ComplexVector>>& fixed) {
  ComplexMatrix u = zeros(n, n);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<ComplexVector> basis;
  for (const auto& [col, vec] : fixed) {
    u.col(col) = vec;
    taken[static_cast<std::size_t>(col)] = true;
    basis.push_back(vec);
  }
  Index next_col = 0;
  for (Index k = 0; k < n && static_cast<Index>(basis.size()) < n; ++k) {
    ComplexVector cand = ComplexVector::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) cand -= b * b.dot(cand);
    }
    const double norm = cand.norm();
    if (norm < 1e-6) continue;
    cand /= norm;
    while (taken[static_cast<std::size_t>(next_col)]) ++next_col;
    u.col(next_col) = cand;
    taken[static_cast<std::size_t>(next_col)] = true;
    basis.push_back(cand);
  }
  return u;
}

/// Shared part of the synthesis: with (A, V) the dilation of the total
/// channel, V1 = K ⊗ A, V2 = A ⊗ M with dim M = dH, η = |e₀⟩⟨e₀| and
/// U(ψ ⊗ e₀) = (Vψ) ⊗ e₀.
struct ModelFrame {
  Index dim_in = 0;
  Index dim_out = 0;
  Index dim_v1 = 0;
  Index dim_v2 = 0;
  ComplexMatrix eta;
  ComplexMatrix u;
};

inline ModelFrame model_frame(const StinespringDilation& dil) {
  ModelFrame fr;
  const Index dh = dil.dim_in;
  const Index dk = dil.dim_out;
  const Index da = dil.ancilla_dim;
  fr.dim_in = dh;
  fr.dim_out = dk;
  fr.dim_v1 = dk * da;
  fr.dim_v2 = dh * da;
  fr.eta = zeros(fr.dim_v1, fr.dim_v1);
  fr.eta(0, 0) = 1.0;
  const Index n = dh * fr.dim_v1;
  std::vector<std::pair<Index, ComplexVector>> fixed;
  for (Index i = 0; i < dh; ++i) {
    ComplexVector out = ComplexVector::Zero(n);
    for (Index a = 0; a < dk; ++a) {
      for (Index alpha = 0; alpha < da; ++alpha) out(a * fr.dim_v2 + alpha * dh) = dil.v(a * da + alpha, i);
    }
    fixed.emplace_back(i * fr.dim_v1, out);
  }
  fr.u = complete_unitary(n, fixed);
  return fr;
}

inline Observable lift_pointer(const Observable& ancilla, Index dim_m, const Tolerances& tol) {
  std::vector<std::pair<Label, ComplexMatrix>> entries;
  for (std::size_t x = 0; x < ancilla.size(); ++x) {
    entries.emplace_back(ancilla.outcomes()[x], kron(ancilla.effect_at(x).matrix(), identity(dim_m)));
  }
  return Observable(std::move(entries), tol);
}

inline MeasurementModel model_for(const ModelFrame& fr, const StinespringDilation& dil, const Instrument& ins,
                                  const Tolerances& tol) {
  const Observable pointer = lift_pointer(rn_observable(dil, ins, tol), fr.dim_in, tol);
  MeasurementModel m(fr.dim_in, fr.dim_out, fr.eta, fr.u, pointer, tol);
  const Instrument back = model_instrument(m, tol);
  for (std::size_t x = 0; x < ins.size(); ++x) {
    if (!approx_equal(back.branch_at(x).choi(), ins.branch_at(x).choi(), tol.eq_tol)) {
      fail(ErrorCode::internal, "synthesized model does not reproduce branch '" + ins.outcomes()[x] + "'");
    }
  }
  return m;
}

}  // namespace detail

/// Finite-dimensional model realizing an instrument; its induced
/// instrument is checked branch by branch before returning.
inline MeasurementModel synthesize_model(const Instrument& ins, const Tolerances& tol = {}) {
  const StinespringDilation dil = minimal_stinespring(total_channel(ins, tol), tol);
  return detail::model_for(detail::model_frame(dil), dil, ins, tol);
}

/// Two models with identical (V1, V2, η, U), differing only in the pointer.
inline std::pair<MeasurementModel, MeasurementModel> shared_model_pair(const Instrument& i1, const Instrument& i2,
                                                                       const Tolerances& tol = {}) {
  require_same_dims(i1.branch_at(0), i2.branch_at(0), "shared_model_pair");
  if (!approx_equal(i1.sum_choi(i1.outcomes()), i2.sum_choi(i2.outcomes()), tol.eq_tol)) {
    fail(ErrorCode::totals_differ, "instruments have different total channels");
  }
  const StinespringDilation dil = minimal_stinespring(total_channel(i1, tol), tol);
  const detail::ModelFrame fr = detail::model_frame(dil);
  return {detail::model_for(fr, dil, i1, tol), detail::model_for(fr, dil, i2, tol)};
}

/// U(ψ ⊗ φ) = φ ⊗ ψ with H = K = V1 = V2; the induced observable is the
/// pointer itself and the induced channel is the contraction to η.
inline MeasurementModel swap_model(const ComplexMatrix& eta, const Observable& pointer, const Tolerances& tol = {}) {
  const Index d = eta.rows();
  if (pointer.dim() != d) fail(ErrorCode::dimension_mismatch, "swap model needs equal dimensions");
  ComplexMatrix u = zeros(d * d, d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index v = 0; v < d; ++v) u(v * d + i, i * d + v) = 1.0;
  }
  return MeasurementModel(d, d, eta, u, pointer, tol);
}

}  // namespace qdev
