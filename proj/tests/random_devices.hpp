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

// Seeded generators for property tests. Everything is drawn from a
// caller-owned std::mt19937_64 so a failing case is reproducible from its seed.

#include <algorithm>
#include <random>
#include <vector>

#include "qdev/devices.hpp"

namespace qdev::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ComplexMatrix random_complex(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = cplx(g(rng), g(rng));
  }
  return m;
}

inline ComplexMatrix random_hermitian(Rng& rng, Index d) { return hermitian_part(random_complex(rng, d, d)); }

/// Haar-ish unitary: Q factor of a Gaussian matrix with the phases of R's
/// diagonal divided out.
inline ComplexMatrix random_unitary(Rng& rng, Index d) {
  const Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(rng, d, d));
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) q.col(i) *= std::abs(r(i, i)) / r(i, i);
  return q;
}

/// rows ≥ cols; orthonormal columns.
inline ComplexMatrix random_isometry(Rng& rng, Index rows, Index cols) {
  const Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(rng, rows, cols));
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

inline ComplexVector random_pure_vector(Rng& rng, Index d) {
  ComplexVector v = random_complex(rng, d, 1).col(0);
  return v / v.norm();
}

inline ComplexMatrix random_pure_state(Rng& rng, Index d) {
  const ComplexVector v = random_pure_vector(rng, d);
  return v * v.adjoint();
}

inline ComplexMatrix random_state(Rng& rng, Index d) {
  const ComplexMatrix g = random_complex(rng, d, d);
  const ComplexMatrix p = g * g.adjoint();
  return p / p.trace().real();
}

/// U diag(λ) U† with λ uniform in [lo, hi].
inline ComplexMatrix random_effect_matrix(Rng& rng, Index d, double lo = 0.0, double hi = 1.0) {
  const ComplexMatrix u = random_unitary(rng, d);
  RealVector ev(d);
  for (Index i = 0; i < d; ++i) ev(i) = uniform(rng, lo, hi);
  return hermitian_part(u * ev.cast<cplx>().asDiagonal() * u.adjoint());
}

/// n Kraus operators of a random channel, cut from one isometry.
/// At least ⌈dh/dk⌉ operators, since a dh → dk channel needs that many.
inline std::vector<ComplexMatrix> random_channel_kraus(Rng& rng, Index dh, Index dk, Index n) {
  n = std::max(n, (dh + dk - 1) / dk);
  const ComplexMatrix v = random_isometry(rng, dk * n, dh);
  std::vector<ComplexMatrix> ops;
  for (Index a = 0; a < n; ++a) ops.push_back(v.block(a * dk, 0, dk, dh));
  return ops;
}

inline CPMap random_channel(Rng& rng, Index dh, Index dk, Index n) {
  return choi_from_kraus(KrausSet(dh, dk, random_channel_kraus(rng, dh, dk, n)));
}

/// Channel Kraus operators pre-composed with √A for a random effect A, so
/// Φᴴ(I) = A.
inline CPMap random_operation(Rng& rng, Index dh, Index dk, Index n) {
  const ComplexMatrix root = mat_sqrt(random_effect_matrix(rng, dh));
  std::vector<ComplexMatrix> ops;
  for (const auto& k : random_channel_kraus(rng, dh, dk, n)) ops.push_back(k * root);
  return choi_from_kraus(KrausSet(dh, dk, ops));
}

/// Kraus operators of a random channel dealt round-robin onto the outcomes.
inline Instrument random_instrument(Rng& rng, Index dh, Index dk, std::size_t outcomes, Index kraus_per_outcome) {
  const auto ops = random_channel_kraus(rng, dh, dk, static_cast<Index>(outcomes) * kraus_per_outcome);
  std::vector<std::vector<ComplexMatrix>> groups(outcomes);
  for (std::size_t i = 0; i < ops.size(); ++i) groups[i % outcomes].push_back(ops[i]);
  std::vector<CPMap> branches;
  for (const auto& g : groups) branches.push_back(choi_from_kraus(KrausSet(dh, dk, g)));
  return Instrument(numbered_labels(outcomes), std::move(branches));
}

}  // namespace qdev::testing
