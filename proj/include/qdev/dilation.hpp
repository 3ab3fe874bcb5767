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

// Minimal Stinespring dilations Φᴴ(T) = V†(T ⊗ I_A)V and the Radon-Nikodym
// effects that express operations below a channel on its ancilla.
//
// V maps H into K ⊗ A with row index a·dA + α, so V(a·dA + α, i) = K_α(a, i)
// for the Kraus operators K_α of the map.

#include <optional>
#include <string>
#include <vector>

#include "qdev/compat.hpp"
#include "qdev/devices.hpp"
#include "qdev/order.hpp"

namespace qdev {

struct StinespringDilation {
  ComplexMatrix v;  // (dK·dA) × dH
  Index dim_in = 0;
  Index dim_out = 0;
  Index ancilla_dim = 0;
  bool minimal = false;

  /// V†(T ⊗ X)V for an ancilla operator X.
  ComplexMatrix heisenberg(const ComplexMatrix& t, const ComplexMatrix& x) const {
    return v.adjoint() * kron(t, x) * v;
  }

  ComplexMatrix heisenberg(const ComplexMatrix& t) const { return heisenberg(t, identity(ancilla_dim)); }

  /// The dilated map, rebuilt from V.
  CPMap source(const Tolerances& tol = {}) const {
    std::vector<ComplexMatrix> ops;
    for (Index alpha = 0; alpha < ancilla_dim; ++alpha) ops.push_back(kraus_operator(alpha));
    return CPMap(dim_in, dim_out, choi_of_kraus_ops(ops, dim_in, dim_out), tol);
  }

  ComplexMatrix kraus_operator(Index alpha) const {
    ComplexMatrix k(dim_out, dim_in);
    for (Index a = 0; a < dim_out; ++a) k.row(a) = v.row(a * ancilla_dim + alpha);
    return k;
  }
};

namespace detail {

inline Index numerical_rank(const ComplexMatrix& m, double rel = 1e-10) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  while (r < s.size() && s(r) > rel * s(0)) ++r;
  return r;
}

/// Span of {(|a⟩⟨b| ⊗ I)Vψ_i} has full dimension dK·dA.
inline bool spans_dilation_space(const ComplexMatrix& v, Index dim_in, Index dim_out, Index dim_a) {
  if (dim_a == 0) return true;
  ComplexMatrix cols(dim_out * dim_a, dim_out * dim_out * dim_in);
  Index c = 0;
  for (Index a = 0; a < dim_out; ++a) {
    for (Index b = 0; b < dim_out; ++b) {
      ComplexMatrix t = zeros(dim_out, dim_out);
      t(a, b) = 1.0;
      const ComplexMatrix moved = kron(t, identity(dim_a)) * v;
      for (Index i = 0; i < dim_in; ++i) cols.col(c++) = moved.col(i);
    }
  }
  return numerical_rank(cols) == dim_out * dim_a;
}

}  // namespace detail

/// dA = Choi rank; column α of the ancilla slot is √λ_α times the reshaped
/// Choi eigenvector.
inline StinespringDilation minimal_stinespring(const CPMap& m, const Tolerances& tol = {}) {
  const KrausSet ks = kraus_from_choi(m, tol);
  StinespringDilation d;
  d.dim_in = m.dim_in();
  d.dim_out = m.dim_out();
  d.ancilla_dim = static_cast<Index>(ks.size());
  d.v = zeros(d.dim_out * d.ancilla_dim, d.dim_in);
  for (Index alpha = 0; alpha < d.ancilla_dim; ++alpha) {
    const ComplexMatrix& k = ks.ops()[static_cast<std::size_t>(alpha)];
    for (Index a = 0; a < d.dim_out; ++a) d.v.row(a * d.ancilla_dim + alpha) = k.row(a);
  }
  d.minimal = detail::spans_dilation_space(d.v, d.dim_in, d.dim_out, d.ancilla_dim);
  if (!d.minimal) fail(ErrorCode::internal, "Choi eigenvectors did not give a minimal dilation");
  return d;
}

/// The unique ancilla effect E with Φᴴ(T) = V†(T ⊗ E)V, from the linear
/// system over all matrix units T = |a⟩⟨b|.
inline Effect radon_nikodym_effect(const StinespringDilation& dil, const CPMap& f, const Tolerances& tol = {}) {
  if (f.dim_in() != dil.dim_in || f.dim_out() != dil.dim_out) {
    fail(ErrorCode::dimension_mismatch, "operation and dilation have different dimensions");
  }
  if (!dil.minimal) fail(ErrorCode::not_minimal, "Radon-Nikodym extraction needs a minimal dilation");
  const Index da = dil.ancilla_dim;
  const Index dk = dil.dim_out;
  const Index dh = dil.dim_in;
  const Index eqs = dk * dk * dh * dh;
  ComplexMatrix system(eqs, da * da);
  ComplexVector rhs(eqs);
  Index row = 0;
  for (Index a = 0; a < dk; ++a) {
    for (Index b = 0; b < dk; ++b) {
      ComplexMatrix t = zeros(dk, dk);
      t(a, b) = 1.0;
      const ComplexMatrix target = apply_h(f, t);
      for (Index k = 0; k < da; ++k) {
        for (Index l = 0; l < da; ++l) {
          ComplexMatrix unit = zeros(da, da);
          unit(k, l) = 1.0;
          const ComplexMatrix image = dil.heisenberg(t, unit);
          for (Index i = 0; i < dh * dh; ++i) system(row + i, k * da + l) = image(i / dh, i % dh);
        }
      }
      for (Index i = 0; i < dh * dh; ++i) rhs(row + i) = target(i / dh, i % dh);
      row += dh * dh;
    }
  }
  const Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(system);
  if (cod.rank() < da * da) fail(ErrorCode::not_minimal, "Radon-Nikodym system is rank deficient");
  const ComplexVector sol = cod.solve(rhs);
  const double res = (system * sol - rhs).norm();
  if (res > tol.feas_tol * (1.0 + rhs.norm())) {
    fail(ErrorCode::not_dominated, "operation is not below the dilated channel (residual " + std::to_string(res) + ")");
  }
  ComplexMatrix e(da, da);
  for (Index k = 0; k < da; ++k) {
    for (Index l = 0; l < da; ++l) e(k, l) = sol(k * da + l);
  }
  const ComplexMatrix herm = hermitian_part(e);
  const RealVector ev = hermitian_eigenvalues(herm);
  if (ev.size() > 0 && (ev(0) < -tol.psd_tol || ev(ev.size() - 1) > 1.0 + tol.psd_tol)) {
    fail(ErrorCode::not_dominated, "ancilla operator leaves [0, I]; operation is not below the channel");
  }
  return Effect(herm, tol);
}

/// A(x) = Radon-Nikodym effect of the branch x.
inline Observable rn_observable(const StinespringDilation& dil, const Instrument& ins, const Tolerances& tol = {}) {
  const CPMap total = total_channel(ins, tol);
  if (!approx_equal(total.choi(), dil.source(tol).choi(), tol.eq_tol)) {
    fail(ErrorCode::totals_differ, "instrument total differs from the dilated channel");
  }
  std::vector<std::pair<Label, ComplexMatrix>> entries;
  for (std::size_t x = 0; x < ins.size(); ++x) {
    entries.emplace_back(ins.outcomes()[x], radon_nikodym_effect(dil, ins.branch_at(x), tol).matrix());
  }
  return Observable(std::move(entries), tol);
}

/// Unitary W on the ancilla with V₂ = (I ⊗ W)V₁; both dilations minimal and
/// of the same map.
inline ComplexMatrix intertwining_unitary(const StinespringDilation& d1, const StinespringDilation& d2,
                                          const Tolerances& tol = {}) {
  if (d1.ancilla_dim != d2.ancilla_dim || d1.dim_in != d2.dim_in || d1.dim_out != d2.dim_out) {
    fail(ErrorCode::dimension_mismatch, "dilations have different shapes");
  }
  const Index da = d1.ancilla_dim;
  // K₂_β = Σ_α W(β, α) K₁_α, i.e. C₂ = C₁ Wᵀ on vectorized Kraus operators.
  ComplexMatrix c1(d1.dim_in * d1.dim_out, da);
  ComplexMatrix c2(d1.dim_in * d1.dim_out, da);
  for (Index alpha = 0; alpha < da; ++alpha) {
    c1.col(alpha) = choi_vector(d1.kraus_operator(alpha));
    c2.col(alpha) = choi_vector(d2.kraus_operator(alpha));
  }
  const ComplexMatrix wt = Eigen::CompleteOrthogonalDecomposition<ComplexMatrix>(c1).solve(c2);
  const ComplexMatrix w = wt.transpose();
  if (!approx_equal(c1 * wt, c2, 1e3 * tol.eq_tol) || !approx_equal(w.adjoint() * w, identity(da), 1e3 * tol.eq_tol)) {
    fail(ErrorCode::not_unitary, "dilations are not related by an ancilla unitary");
  }
  return w;
}

/// Ancilla-level reading of a compatibility or weak-compatibility witness.
struct AncillaReport {
  bool weak = false;
  StinespringDilation dilation;
  Effect e{zeros(1, 1)};
  Effect f{zeros(1, 1)};
  bool commute = false;
  Answer coexistence = Answer::undecided;
};

/// Compatible witness: dilate its total, extract E, F for the two parts and
/// test their coexistence (expected yes). Weak witness: extract E, F from the
/// common upper channel and report them.
inline AncillaReport verify_ancilla_characterization(const CPMap& f1, const CPMap& f2, const Decision& d,
                                                     const DecideOptions& opt = {}) {
  const Tolerances& tol = opt.tol;
  if (d.answer != Answer::yes) fail(ErrorCode::missing_witness, "decision carries no witness");
  AncillaReport out;
  CPMap part1 = f1;
  CPMap part2 = f2;
  if (d.instrument) {
    out.dilation = minimal_stinespring(total_channel(*d.instrument, tol), tol);
    if (d.parts1.size() != 1 || d.parts2.size() != 1) fail(ErrorCode::missing_witness, "witness parts are not operations");
    part1 = instrument_part_op(*d.instrument, d.parts1.front().second, tol);
    part2 = instrument_part_op(*d.instrument, d.parts2.front().second, tol);
  } else if (d.upper_channel) {
    out.weak = true;
    out.dilation = minimal_stinespring(*d.upper_channel, tol);
  } else {
    fail(ErrorCode::missing_witness, "decision carries no instrument or channel");
  }
  out.e = radon_nikodym_effect(out.dilation, part1, tol);
  out.f = radon_nikodym_effect(out.dilation, part2, tol);
  out.commute = commute(out.e.matrix(), out.f.matrix(), tol);
  out.coexistence = coexistent_effects(out.e, out.f, opt).answer;
  return out;
}

}  // namespace qdev
