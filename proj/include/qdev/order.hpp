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

// CP order between operations, purity, the rank-1 channel family and the
// closed-form detectors for trivial devices.

#include <optional>
#include <string>
#include <vector>

#include "qdev/devices.hpp"

namespace qdev {

/// Number of Choi eigenvalues above psd_tol·tr(J).
inline Index choi_rank(const CPMap& m, const Tolerances& tol = {}) {
  const double scale = m.choi().trace().real();
  if (scale <= 0.0) return 0;
  const RealVector ev = hermitian_eigenvalues(m.choi());
  Index rank = 0;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > tol.psd_tol * scale) ++rank;
  }
  return rank;
}

/// a ≤ b: the difference b − a is completely positive. Trace
/// non-increase of the difference follows from that of b.
inline bool cp_leq(const CPMap& a, const CPMap& b, const Tolerances& tol = {}) {
  require_same_dims(a, b, "cp_leq");
  return min_eigenvalue(b.choi() - a.choi()) >= -tol.psd_tol;
}

inline bool comparable(const CPMap& a, const CPMap& b, const Tolerances& tol = {}) {
  return cp_leq(a, b, tol) || cp_leq(b, a, tol);
}

/// Choi rank one.
inline bool is_pure(const CPMap& m, const Tolerances& tol = {}) { return choi_rank(m, tol) == 1; }

/// Σ Φᵢᴴ(I) ≤ I, i.e. the Choi sum is itself an operation.
inline bool sum_is_operation(const CPMap& a, const CPMap& b, const Tolerances& tol = {}) {
  require_same_dims(a, b, "sum_is_operation");
  return max_eigenvalue(a.heisenberg_unit() + b.heisenberg_unit() - identity(a.dim_in())) <= tol.psd_tol;
}

/// Two pure operations are compatible iff they are comparable or their sum
/// is an operation.
inline bool pure_pair_compatible(const CPMap& a, const CPMap& b, const Tolerances& tol = {}) {
  if (!is_pure(a, tol) || !is_pure(b, tol)) fail(ErrorCode::not_pure, "pure_pair_compatible needs pure operations");
  return comparable(a, b, tol) || sum_is_operation(a, b, tol);
}

/// I − Φᴴ(I) written as d·|u⟩⟨u|; d = 0 when Φ is a channel.
struct RankOneDeficiency {
  double weight = 0.0;
  ComplexVector direction;
};

inline RankOneDeficiency rank1_deficiency(const CPMap& phi, const Tolerances& tol = {}) {
  const ComplexMatrix deficit = identity(phi.dim_in()) - phi.heisenberg_unit();
  const HermEig eig = herm_eig(hermitian_part(deficit), tol.eq_tol);
  const Index n = eig.evals.size();
  if (n >= 2 && eig.evals(n - 2) > tol.psd_tol) {
    fail(ErrorCode::rank_condition, "I − Φᴴ(I) has rank above one");
  }
  RankOneDeficiency out;
  out.direction = eig.evecs.col(n - 1);
  out.weight = eig.evals(n - 1) > tol.psd_tol ? eig.evals(n - 1) : 0.0;
  return out;
}

/// Λ(ρ) = Φ(ρ) + tr[(I − Φᴴ(I))ρ]·ξ, the channel above Φ with completion ξ.
inline CPMap rank1_channel_family(const CPMap& phi, const ComplexMatrix& xi, const Tolerances& tol = {}) {
  rank1_deficiency(phi, tol);
  require_density_matrix(xi, tol, "completion state");
  if (xi.rows() != phi.dim_out()) fail(ErrorCode::dimension_mismatch, "completion state lives on the output");
  const ComplexMatrix deficit = identity(phi.dim_in()) - phi.heisenberg_unit();
  return make_channel(phi.dim_in(), phi.dim_out(), phi.choi() + measure_prepare_choi(deficit, xi), tol);
}

/// Outcome of intersecting two rank-1 channel families. When the families
/// meet, `channel` is a common member with completions xi1, xi2; otherwise
/// `separating_input` is a state on which no choice of completions makes the
/// two families agree.
struct UpperChannelCertificate {
  bool equal = false;
  std::optional<CPMap> channel;
  std::optional<ComplexMatrix> xi1;
  std::optional<ComplexMatrix> xi2;
  std::optional<ComplexMatrix> separating_input;
  std::string reason;
};

namespace detail {

/// Pure states e_k, (e_k + e_l)/√2, (e_k + i·e_l)/√2; their projectors span L(H).
inline std::vector<ComplexMatrix> spanning_pure_states(Index d) {
  std::vector<ComplexMatrix> out;
  auto push = [&](const ComplexVector& v) { out.push_back(v * v.adjoint()); };
  for (Index k = 0; k < d; ++k) push(ComplexVector::Unit(d, k));
  for (Index k = 0; k < d; ++k) {
    for (Index l = k + 1; l < d; ++l) {
      push((ComplexVector::Unit(d, k) + ComplexVector::Unit(d, l)) / std::sqrt(2.0));
      push((ComplexVector::Unit(d, k) + cplx(0.0, 1.0) * ComplexVector::Unit(d, l)) / std::sqrt(2.0));
    }
  }
  return out;
}

inline ComplexVector normalized(const ComplexVector& v) { return v / v.norm(); }

}  // namespace detail

/// Decides whether {Φ₁ + D₁ᵀ⊗ξ₁} and {Φ₂ + D₂ᵀ⊗ξ₂} share a channel. Solved
/// directly: inputs orthogonal to one deficiency direction force the other
/// completion state, so the candidate pair is unique unless the directions
/// are parallel, in which case only the difference d₂ξ₂ − d₁ξ₁ is fixed.
inline UpperChannelCertificate rank1_upper_channels_equal(const CPMap& phi1, const CPMap& phi2,
                                                          const Tolerances& tol = {}) {
  require_same_dims(phi1, phi2, "rank1_upper_channels_equal");
  const RankOneDeficiency r1 = rank1_deficiency(phi1, tol);
  const RankOneDeficiency r2 = rank1_deficiency(phi2, tol);
  const Index dh = phi1.dim_in();
  const Index dk = phi1.dim_out();
  const ComplexMatrix delta = phi1.choi() - phi2.choi();
  const Dims dims = phi1.dims();
  auto diff = [&](const ComplexMatrix& rho) { return apply_choi(delta, dims, rho); };
  UpperChannelCertificate cert;

  auto finish_with = [&](const ComplexMatrix& xi1, const ComplexMatrix& xi2) {
    const CPMap lam1 = rank1_channel_family(phi1, xi1, tol);
    const CPMap lam2 = rank1_channel_family(phi2, xi2, tol);
    cert.xi1 = xi1;
    cert.xi2 = xi2;
    if (approx_equal(lam1.choi(), lam2.choi(), tol.eq_tol)) {
      cert.equal = true;
      cert.channel = lam1;
      cert.reason = "common channel found";
      return;
    }
    for (const auto& rho : detail::spanning_pure_states(dh)) {
      if (!approx_equal(apply_s(lam1, rho), apply_s(lam2, rho), tol.eq_tol)) {
        cert.separating_input = rho;
        break;
      }
    }
    cert.reason = "forced completions give different channels";
  };

  const bool has1 = r1.weight > 0.0;
  const bool has2 = r2.weight > 0.0;
  const bool parallel =
      !has1 || !has2 || std::abs(std::abs(r1.direction.dot(r2.direction)) - 1.0) <= 1e3 * tol.eq_tol;

  if (!parallel) {
    // a ⊥ u₁ leaves Λ₁(aa†) = Φ₁(aa†), which fixes ξ₂; b ⊥ u₂ fixes ξ₁.
    const ComplexVector& u1 = r1.direction;
    const ComplexVector& u2 = r2.direction;
    const ComplexVector a = detail::normalized(u2 - u1 * u1.dot(u2));
    const ComplexVector b = detail::normalized(u1 - u2 * u2.dot(u1));
    const ComplexMatrix rho_a = a * a.adjoint();
    const ComplexMatrix rho_b = b * b.adjoint();
    const ComplexMatrix xi2 = hermitian_part(diff(rho_a) / (r2.weight * std::norm(u2.dot(a))));
    const ComplexMatrix xi1 = hermitian_part(-diff(rho_b) / (r1.weight * std::norm(u1.dot(b))));
    if (!is_density_matrix(xi2, tol)) {
      cert.separating_input = rho_a;
      cert.xi2 = xi2;
      cert.reason = "input orthogonal to the first deficiency forces a non-state second completion";
      return cert;
    }
    if (!is_density_matrix(xi1, tol)) {
      cert.separating_input = rho_b;
      cert.xi1 = xi1;
      cert.reason = "input orthogonal to the second deficiency forces a non-state first completion";
      return cert;
    }
    finish_with(xi1, xi2);
    return cert;
  }

  const ComplexMatrix mixed = maximally_mixed(dk);
  if (!has1 && !has2) {
    finish_with(mixed, mixed);
    if (!cert.equal) cert.reason = "distinct channels";
    return cert;
  }

  // Parallel deficiencies: completions enter only through ⟨u|ρ|u⟩·W with
  // W = d₂ξ₂ − d₁ξ₁ = Δ(uu†).
  const ComplexVector u = has1 ? r1.direction : r2.direction;
  const ComplexMatrix rho_u = u * u.adjoint();
  const ComplexMatrix w = hermitian_part(diff(rho_u));
  for (const auto& rho : detail::spanning_pure_states(dh)) {
    const double overlap = (u.adjoint() * rho * u)(0, 0).real();
    if (!approx_equal(diff(rho), overlap * w, tol.eq_tol)) {
      cert.separating_input = rho;
      cert.reason = "outputs differ on an input where completions cannot compensate";
      return cert;
    }
  }
  const HermEig eig = herm_eig(w, tol.eq_tol);
  const ComplexMatrix w_plus = spectral_map(eig, [](double l) { return l > 0.0 ? l : 0.0; });
  const ComplexMatrix w_minus = spectral_map(eig, [](double l) { return l < 0.0 ? -l : 0.0; });
  const double slack = r1.weight - w_minus.trace().real();
  if (slack < -tol.psd_tol) {
    cert.separating_input = rho_u;
    cert.reason = "completion difference needs more negative weight than available";
    return cert;
  }
  const ComplexMatrix rest = std::max(slack, 0.0) * mixed;
  const ComplexMatrix xi1 = has1 ? ComplexMatrix((w_minus + rest) / r1.weight) : mixed;
  const ComplexMatrix xi2 = has2 ? ComplexMatrix((w_plus + rest) / r2.weight) : mixed;
  finish_with(hermitian_part(xi1 / xi1.trace().real()), hermitian_part(xi2 / xi2.trace().real()));
  return cert;
}

// ---------------------------------------------------------------------------
// Trivial devices

inline bool is_trivial_effect(const Effect& e, const Tolerances& tol = {}) {
  const double level = e.matrix().trace().real() / static_cast<double>(e.dim());
  return approx_equal(e.matrix(), level * identity(e.dim()), tol.eq_tol);
}

inline bool is_null_operation(const CPMap& m, const Tolerances& tol = {}) {
  return m.choi().norm() <= tol.eq_tol;
}

/// η with Λ(ρ) = tr(ρ)·η, if Λ is such a channel.
inline std::optional<ComplexMatrix> is_contraction_channel(const CPMap& m, const Tolerances& tol = {}) {
  if (!m.is_channel()) return std::nullopt;
  const ComplexMatrix eta = apply_s(m, maximally_mixed(m.dim_in()));
  if (!approx_equal(m.choi(), measure_prepare_choi(identity(m.dim_in()), eta), tol.eq_tol)) return std::nullopt;
  return eta;
}

inline bool is_projection(const Effect& e, const Tolerances& tol = {}) {
  return approx_equal(e.matrix() * e.matrix(), e.matrix(), tol.eq_tol);
}

inline bool commute(const ComplexMatrix& a, const ComplexMatrix& b, const Tolerances& tol = {}) {
  return commutator(a, b).norm() <= tol.eq_tol * (1.0 + a.norm() * b.norm());
}

/// [Φᴴ(T), E] = 0 for all T; checked on a Hermitian basis of L(K).
inline bool commutes_with_range(const CPMap& m, const Effect& e, const Tolerances& tol = {}) {
  if (e.dim() != m.dim_in()) fail(ErrorCode::dimension_mismatch, "effect must live on the map's input");
  for (const auto& basis : hermitian_basis(m.dim_out())) {
    if (!commute(apply_h(m, basis), e.matrix(), tol)) return false;
  }
  return true;
}

}  // namespace qdev
