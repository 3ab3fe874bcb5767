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

// Dense complex linear algebra used by every other header: Kronecker
// products, partial traces, Hermitian spectra, PSD projection and operator
// bases. Everything here is a pure function of its arguments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qdev/errors.hpp"

namespace qdev {

using cplx = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Numerical thresholds shared by validation, predicates and the solver.
struct Tolerances {
  double eq_tol = 1e-9;    // relative Frobenius equality
  double psd_tol = 1e-9;   // eigenvalue floor for positivity
  double feas_tol = 1e-7;  // affine residual accepted by the feasibility engine
};

inline void require_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorCode::non_finite, what + " has NaN/Inf entries");
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::dimension_mismatch,
         what + " must be square, got " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
  }
}

inline ComplexMatrix identity(Index d) { return ComplexMatrix::Identity(d, d); }

inline ComplexMatrix zeros(Index rows, Index cols) {
  return ComplexMatrix::Zero(rows, cols);
}

/// Trace of a square matrix.
inline cplx trace(const ComplexMatrix& m) { return m.trace(); }

/// Frobenius inner product tr(a† b).
inline cplx frob_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::dimension_mismatch, "frob_inner operands differ in shape");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

/// ‖a − b‖_F ≤ eq_tol·(1 + ‖a‖_F).
inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                         double eq_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= eq_tol * (1.0 + a.norm());
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).norm() <= tol * (1.0 + h.norm());
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

/// Kronecker product, first factor is the slow index:
/// (a⊗b)(i·b.rows+k, j·b.cols+l) = a(i,j)·b(k,l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

/// Bipartite split of a square matrix of side dims.first·dims.second.
struct Dims {
  Index first = 1;
  Index second = 1;
  Index total() const { return first * second; }
  Index operator[](int slot) const { return slot == 0 ? first : second; }
};

/// Trace over the slot not kept; keep = 0 returns the first factor.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, Dims dims, int keep) {
  if (dims.first <= 0 || dims.second <= 0) {
    fail(ErrorCode::dimension_mismatch, "partial_trace dims must be positive");
  }
  if (m.rows() != dims.total() || m.cols() != dims.total()) {
    fail(ErrorCode::dimension_mismatch,
         "partial_trace: matrix side " + std::to_string(m.rows()) +
             " does not match dims " + std::to_string(dims.first) + "x" +
             std::to_string(dims.second));
  }
  if (keep != 0 && keep != 1) {
    fail(ErrorCode::dimension_mismatch, "partial_trace: keep must be 0 or 1");
  }
  const Index d0 = dims.first;
  const Index d1 = dims.second;
  if (keep == 0) {
    ComplexMatrix out = ComplexMatrix::Zero(d0, d0);
    for (Index i = 0; i < d0; ++i) {
      for (Index j = 0; j < d0; ++j) {
        out(i, j) = m.block(i * d1, j * d1, d1, d1).trace();
      }
    }
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
  for (Index i = 0; i < d0; ++i) out += m.block(i * d1, i * d1, d1, d1);
  return out;
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct HermEig {
  RealVector evals;
  ComplexMatrix evecs;  // columns are eigenvectors
};

/// Deterministic Hermitian eigendecomposition (Householder tridiagonalisation
/// followed by implicit QL, as implemented by Eigen's self-adjoint solver).
/// The input is symmetrised before decomposition.
inline HermEig herm_eig(const ComplexMatrix& h, double eq_tol = Tolerances{}.eq_tol) {
  require_square(h, "herm_eig input");
  require_finite(h, "herm_eig input");
  if (!is_hermitian(h, eq_tol)) {
    fail(ErrorCode::not_hermitian, "herm_eig input is not Hermitian");
  }
  if (h.rows() == 0) return {RealVector(0), ComplexMatrix(0, 0)};
  const Eigen::MatrixXcd sym = hermitian_part(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::internal, "eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Eigenvalues only, ascending. No Hermiticity check: the Hermitian part is
/// used. Hot path for the feasibility engine.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& h) {
  if (h.rows() == 0) return RealVector(0);
  const Eigen::MatrixXcd sym = hermitian_part(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& h) {
  if (h.rows() == 0) return 0.0;
  return hermitian_eigenvalues(h)(0);
}

inline double max_eigenvalue(const ComplexMatrix& h) {
  if (h.rows() == 0) return 0.0;
  const RealVector ev = hermitian_eigenvalues(h);
  return ev(ev.size() - 1);
}

/// Operator norm of a Hermitian matrix (largest |eigenvalue|).
inline double herm_norm(const ComplexMatrix& h) {
  if (h.rows() == 0) return 0.0;
  return hermitian_eigenvalues(h).cwiseAbs().maxCoeff();
}

/// Rebuilds U·diag(f(λ))·U†.
template <typename F>
ComplexMatrix spectral_map(const HermEig& eig, F&& f) {
  const Index n = eig.evals.size();
  ComplexMatrix scaled = eig.evecs;
  for (Index k = 0; k < n; ++k) scaled.col(k) *= f(eig.evals(k));
  return scaled * eig.evecs.adjoint();
}

inline bool is_psd(const ComplexMatrix& h, double tol) {
  if (h.rows() != h.cols() || !h.allFinite()) return false;
  if (!is_hermitian(h, Tolerances{}.eq_tol)) return false;
  return min_eigenvalue(h) >= -tol;
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to zero.
inline ComplexMatrix project_psd(const ComplexMatrix& h,
                                 double eq_tol = Tolerances{}.eq_tol) {
  const HermEig eig = herm_eig(h, eq_tol);
  return spectral_map(eig, [](double l) { return l > 0.0 ? l : 0.0; });
}

/// Principal square root of a PSD matrix.
inline ComplexMatrix mat_sqrt(const ComplexMatrix& p, const Tolerances& tol = {}) {
  const HermEig eig = herm_eig(p, tol.eq_tol);
  if (eig.evals.size() > 0 && eig.evals(0) < -tol.psd_tol) {
    fail(ErrorCode::not_psd, "mat_sqrt: eigenvalue " + std::to_string(eig.evals(0)) +
                                 " below -psd_tol");
  }
  return spectral_map(eig, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
}

/// Orthonormal (Frobenius) basis of the d×d Hermitian matrices: the
/// normalised identity, then symmetric/antisymmetric off-diagonal pairs,
/// then the traceless diagonal elements. For d = 2 this is the Pauli basis
/// {I, σx, σy, σz}/√2.
inline std::vector<ComplexMatrix> hermitian_basis(Index d) {
  if (d <= 0) fail(ErrorCode::dimension_mismatch, "hermitian_basis needs d > 0");
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  basis.push_back(identity(d) / std::sqrt(static_cast<double>(d)));
  const double r2 = 1.0 / std::sqrt(2.0);
  const cplx i1(0.0, 1.0);
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      ComplexMatrix sym = zeros(d, d);
      sym(j, k) = r2;
      sym(k, j) = r2;
      basis.push_back(sym);
      ComplexMatrix anti = zeros(d, d);
      anti(j, k) = -i1 * r2;
      anti(k, j) = i1 * r2;
      basis.push_back(anti);
    }
  }
  for (Index l = 1; l < d; ++l) {
    ComplexMatrix diag = zeros(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index j = 0; j < l; ++j) diag(j, j) = norm;
    diag(l, l) = -static_cast<double>(l) * norm;
    basis.push_back(diag);
  }
  return basis;
}

/// Real coordinates of a Hermitian matrix that make the Euclidean norm equal
/// the Frobenius norm: diagonal entries, then √2·Re and √2·Im of the strict
/// upper triangle, row by row.
inline RealVector hermitian_to_real(const ComplexMatrix& h) {
  const Index d = h.rows();
  RealVector v(d * d);
  Index pos = 0;
  for (Index i = 0; i < d; ++i) v(pos++) = h(i, i).real();
  const double s2 = std::sqrt(2.0);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      v(pos++) = s2 * h(i, j).real();
      v(pos++) = s2 * h(i, j).imag();
    }
  }
  return v;
}

inline ComplexMatrix real_to_hermitian(const Eigen::Ref<const RealVector>& v, Index d) {
  if (v.size() != d * d) {
    fail(ErrorCode::dimension_mismatch, "real_to_hermitian: length mismatch");
  }
  ComplexMatrix h(d, d);
  Index pos = 0;
  for (Index i = 0; i < d; ++i) h(i, i) = v(pos++);
  const double s2 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      const double re = v(pos++) * s2;
      const double im = v(pos++) * s2;
      h(i, j) = cplx(re, im);
      h(j, i) = cplx(re, -im);
    }
  }
  return h;
}

/// Orthonormal basis (columns) for the span of eigenvectors of a Hermitian
/// matrix whose eigenvalues exceed `floor`.
inline ComplexMatrix range_basis(const ComplexMatrix& h, double floor) {
  const HermEig eig = herm_eig(h);
  std::vector<Index> keep;
  for (Index k = 0; k < eig.evals.size(); ++k) {
    if (eig.evals(k) > floor) keep.push_back(k);
  }
  ComplexMatrix q(h.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    q.col(static_cast<Index>(c)) = eig.evecs.col(keep[c]);
  }
  return q;
}

/// Orthonormal basis of the intersection of the column spans of two
/// isometries.
inline ComplexMatrix intersect_ranges(const ComplexMatrix& qa, const ComplexMatrix& qb) {
  const Index d = qa.rows();
  if (qa.cols() == 0 || qb.cols() == 0) return ComplexMatrix(d, 0);
  // Vectors in both spans are the null space of (I − Pa) + (I − Pb).
  const ComplexMatrix gap =
      2.0 * identity(d) - qa * qa.adjoint() - qb * qb.adjoint();
  const HermEig eig = herm_eig(gap);
  std::vector<Index> keep;
  for (Index k = 0; k < eig.evals.size(); ++k) {
    if (eig.evals(k) < 1e-9) keep.push_back(k);
  }
  ComplexMatrix q(d, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    q.col(static_cast<Index>(c)) = eig.evecs.col(keep[c]);
  }
  return q;
}

/// Density-matrix check: Hermitian, PSD within psd_tol, unit trace within eq_tol.
inline bool is_density_matrix(const ComplexMatrix& rho, const Tolerances& tol = {}) {
  if (rho.rows() != rho.cols() || rho.rows() == 0 || !rho.allFinite()) return false;
  if (!is_hermitian(rho, tol.eq_tol)) return false;
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol.eq_tol * (1.0 + rho.norm())) return false;
  return min_eigenvalue(rho) >= -tol.psd_tol;
}

inline void require_density_matrix(const ComplexMatrix& rho, const Tolerances& tol,
                                   const std::string& what) {
  if (!is_density_matrix(rho, tol)) {
    fail(ErrorCode::invalid_state, what + " is not a density matrix");
  }
}

inline ComplexMatrix maximally_mixed(Index d) {
  return identity(d) / static_cast<double>(d);
}

namespace pauli {

inline ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

inline ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// P_{±j} = (I ± σ_j)/2 for j ∈ {'x','y','z'}.
inline ComplexMatrix projector(char axis, int sign = +1) {
  const ComplexMatrix s = axis == 'x' ? x() : axis == 'y' ? y() : z();
  return 0.5 * (identity(2) + static_cast<double>(sign) * s);
}

}  // namespace pauli

}  // namespace qdev
