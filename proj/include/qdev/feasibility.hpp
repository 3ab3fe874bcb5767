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

// PSD feasibility over stacked Hermitian blocks with affine constraints.
//
// Each block X may be restricted to a face {Q Y Q† : Y ⪰ 0} given by an
// isometry Q; the unknowns are the real coordinates of the Y's. The affine
// set is handled by an exact SVD projector, the cone by per-block
// eigenvalue clamping, and the two are combined by Dykstra's method.
// Boundary solutions (no Slater point) are finished by a Gauss-Newton
// polish on low-rank factors; infeasibility is certified by the separating
// direction between the Dykstra iterates.

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qdev/matkit.hpp"

namespace qdev {

struct FeasBlock {
  std::string name;
  Index side = 0;
  std::optional<ComplexMatrix> face;  // side × r isometry

  Index free_dim() const { return face ? face->cols() : side; }
};

/// Partial trace applied to a term before it enters a constraint; `keep`
/// selects the surviving tensor slot as in partial_trace.
struct PartialTraceSpec {
  Dims dims;
  int keep = 0;
};

struct FeasTerm {
  std::size_t block = 0;
  double weight = 1.0;
  std::optional<PartialTraceSpec> reduce;
};

/// Σ weight·reduce(X_block) = rhs.
struct FeasConstraint {
  std::vector<FeasTerm> terms;
  ComplexMatrix rhs;
  std::string label;
};

class FeasibilityProblem {
 public:
  std::size_t add_block(std::string name, Index side, std::optional<ComplexMatrix> face = std::nullopt) {
    if (side <= 0) fail(ErrorCode::dimension_mismatch, "block '" + name + "' needs a positive side");
    if (face) {
      if (face->rows() != side) fail(ErrorCode::dimension_mismatch, "face of block '" + name + "' has wrong rows");
      if (face->cols() > 0 && !approx_equal(face->adjoint() * *face, identity(face->cols()), 1e-9)) {
        fail(ErrorCode::internal, "face of block '" + name + "' is not an isometry");
      }
    }
    blocks_.push_back({std::move(name), side, std::move(face)});
    return blocks_.size() - 1;
  }

  void add_constraint(FeasConstraint c) {
    require_square(c.rhs, "constraint right-hand side");
    require_finite(c.rhs, "constraint right-hand side");
    if (!is_hermitian(c.rhs, 1e-9)) fail(ErrorCode::not_hermitian, "constraint right-hand side must be Hermitian");
    for (const auto& t : c.terms) {
      if (t.block >= blocks_.size()) fail(ErrorCode::internal, "constraint references an undeclared block");
      const Index side = blocks_[t.block].side;
      if (t.reduce) {
        if (t.reduce->dims.total() != side) {
          fail(ErrorCode::dimension_mismatch, "partial trace dims do not match block '" + blocks_[t.block].name + "'");
        }
        const Index out = t.reduce->keep == 0 ? t.reduce->dims.first : t.reduce->dims.second;
        if (out != c.rhs.rows()) fail(ErrorCode::dimension_mismatch, "reduced block does not match right-hand side");
      } else if (side != c.rhs.rows()) {
        fail(ErrorCode::dimension_mismatch, "block '" + blocks_[t.block].name + "' does not match right-hand side");
      }
    }
    constraints_.push_back(std::move(c));
  }

  const std::vector<FeasBlock>& blocks() const { return blocks_; }
  const std::vector<FeasConstraint>& constraints() const { return constraints_; }

 private:
  std::vector<FeasBlock> blocks_;
  std::vector<FeasConstraint> constraints_;
};

// ---------------------------------------------------------------------------
// Constraint encoders

/// Σ wᵢ X_{bᵢ} = target.
inline FeasConstraint encode_sum_constraint(const std::vector<std::pair<std::size_t, double>>& blocks,
                                            const ComplexMatrix& target, std::string label = "sum") {
  FeasConstraint c;
  for (const auto& [b, w] : blocks) c.terms.push_back({b, w, std::nullopt});
  c.rhs = target;
  c.label = std::move(label);
  return c;
}

/// Σ Tr_slot X_{bᵢ} = target over the listed blocks.
inline FeasConstraint encode_partial_trace_constraint(const std::vector<std::size_t>& blocks, Dims dims, int keep,
                                                      const ComplexMatrix& target,
                                                      std::string label = "partial_trace") {
  FeasConstraint c;
  for (auto b : blocks) c.terms.push_back({b, 1.0, PartialTraceSpec{dims, keep}});
  c.rhs = target;
  c.label = std::move(label);
  return c;
}

/// Φᴴ(I) = E for a Choi block, i.e. Tr_out J = Eᵀ.
inline FeasConstraint encode_heisenberg_unit_constraint(const std::vector<std::size_t>& blocks, Dims dims,
                                                        const ComplexMatrix& effect,
                                                        std::string label = "heisenberg_unit") {
  if (effect.rows() != dims.first) fail(ErrorCode::dimension_mismatch, "effect does not match the block input");
  return encode_partial_trace_constraint(blocks, dims, 0, effect.transpose(), std::move(label));
}

// ---------------------------------------------------------------------------
// Outcome

enum class FeasVerdict { feasible, infeasible, undecided };

inline std::string_view to_string(FeasVerdict v) {
  switch (v) {
    case FeasVerdict::feasible: return "feasible";
    case FeasVerdict::infeasible: return "infeasible";
    case FeasVerdict::undecided: return "undecided";
  }
  return "unknown";
}

struct FeasibilityOutcome {
  FeasVerdict verdict = FeasVerdict::undecided;
  std::vector<ComplexMatrix> witness;  // one per block, present iff feasible
  std::optional<double> margin;        // estimate of max over the affine set of min eigenvalue
  std::optional<double> certified_bound;
  double residual = 0.0;
  long iterations = 0;
  bool affine_inconsistent = false;
};

struct SolveOptions {
  int max_iter = 50000;
  int bisection_steps = 40;
  std::ostream* trace = nullptr;
};

namespace detail {

class FeasibilityEngine {
 public:
  FeasibilityEngine(const FeasibilityProblem& p, const Tolerances& tol, const SolveOptions& opt)
      : p_(p), tol_(tol), opt_(opt) {
    Index n = 0;
    for (const auto& b : p_.blocks()) {
      offset_.push_back(n);
      n += b.free_dim() * b.free_dim();
    }
    n_ = n;
    build_rows();
    factor();
  }

  FeasibilityOutcome run() {
    FeasibilityOutcome out;
    if (inconsistent_) {
      out.verdict = FeasVerdict::infeasible;
      out.affine_inconsistent = true;
      out.residual = affine_gap_;
      out.margin = -std::numeric_limits<double>::infinity();
      log("affine inconsistent gap=" + fmt(affine_gap_));
      return out;
    }
    if (n_ == 0) {
      out.verdict = FeasVerdict::feasible;
      out.witness = assemble(y0_);
      out.residual = residual(y0_);
      return out;
    }

    Attempt first = dykstra(0.0, opt_.max_iter, true);
    out.iterations = first.iterations;
    if (first.feasible) {
      out.verdict = FeasVerdict::feasible;
      out.witness = assemble(first.point);
      out.residual = residual(first.point);
      out.margin = min_block_eig(first.point);
      log("feasible iter=" + std::to_string(first.iterations) + " residual=" + fmt(out.residual));
      return out;
    }

    double hi_cert = first.bound;
    auto [estimate, cert] = bisect(&out.iterations);
    hi_cert = std::min(hi_cert, cert);
    if (hi_cert < std::numeric_limits<double>::infinity()) out.certified_bound = hi_cert;
    out.margin = std::min(estimate, hi_cert);
    out.residual = residual(first.point);
    out.verdict = hi_cert < -tol_.feas_tol ? FeasVerdict::infeasible : FeasVerdict::undecided;
    log(std::string(to_string(out.verdict)) + " margin=" + fmt(*out.margin) + " certified=" + fmt(hi_cert));
    return out;
  }

 private:
  struct Attempt {
    bool feasible = false;
    RealVector point;
    double bound = std::numeric_limits<double>::infinity();
    long iterations = 0;
  };

  // --- setup ---------------------------------------------------------------

  void build_rows() {
    std::vector<RealVector> rows;
    std::vector<double> rhs;
    for (const auto& c : p_.constraints()) {
      const Index m = c.rhs.rows();
      for (const auto& h : hermitian_basis(m)) {
        RealVector row = RealVector::Zero(n_);
        for (const auto& t : c.terms) {
          const FeasBlock& blk = p_.blocks()[t.block];
          if (blk.free_dim() == 0) continue;
          ComplexMatrix coeff = t.weight * adjoint_reduce(t, h);
          if (blk.face) coeff = blk.face->adjoint() * coeff * *blk.face;
          row.segment(offset_[t.block], blk.free_dim() * blk.free_dim()) += hermitian_to_real(hermitian_part(coeff));
        }
        rows.push_back(std::move(row));
        rhs.push_back(frob_inner(h, c.rhs).real());
      }
    }
    a_ = RealMatrix::Zero(static_cast<Index>(rows.size()), n_);
    b_ = RealVector::Zero(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a_.row(static_cast<Index>(i)) = rows[i].transpose();
      b_(static_cast<Index>(i)) = rhs[i];
    }
  }

  static ComplexMatrix adjoint_reduce(const FeasTerm& t, const ComplexMatrix& h) {
    if (!t.reduce) return h;
    const Dims d = t.reduce->dims;
    return t.reduce->keep == 0 ? kron(h, identity(d.second)) : kron(identity(d.first), h);
  }

  void factor() {
    if (n_ == 0) {
      y0_ = RealVector::Zero(0);
      null_ = RealMatrix::Zero(0, 0);
      affine_gap_ = b_.norm();
      inconsistent_ = affine_gap_ > tol_.feas_tol * (1.0 + b_.norm());
      return;
    }
    if (a_.rows() == 0) {
      y0_ = RealVector::Zero(n_);
      null_ = RealMatrix::Identity(n_, n_);
    } else {
      Eigen::BDCSVD<RealMatrix> svd(a_, Eigen::ComputeThinU | Eigen::ComputeFullV);
      const RealVector& s = svd.singularValues();
      const double cutoff = 1e-10 * (s.size() > 0 ? s(0) : 0.0);
      Index rank = 0;
      while (rank < s.size() && s(rank) > cutoff) ++rank;
      const RealMatrix& u = svd.matrixU();
      const RealMatrix& v = svd.matrixV();
      RealVector coef = u.leftCols(rank).transpose() * b_;
      for (Index k = 0; k < rank; ++k) coef(k) /= s(k);
      y0_ = v.leftCols(rank) * coef;
      null_ = v.rightCols(n_ - rank);
    }
    affine_gap_ = residual(y0_);
    inconsistent_ = affine_gap_ > tol_.feas_tol * (1.0 + b_.norm());

    identity_vec_ = RealVector::Zero(n_);
    for (std::size_t k = 0; k < p_.blocks().size(); ++k) {
      const Index r = p_.blocks()[k].free_dim();
      if (r > 0) identity_vec_.segment(offset_[k], r * r) = hermitian_to_real(identity(r));
    }
    const double leak = null_.cols() > 0 ? (null_.transpose() * identity_vec_).norm() : 0.0;
    identity_in_rowspace_ = leak <= 1e-9 * (1.0 + identity_vec_.norm());
  }

  // --- primitives ----------------------------------------------------------

  double residual(const RealVector& y) const { return a_.rows() == 0 ? 0.0 : (a_ * y - b_).norm(); }

  RealVector project_affine(const RealVector& y) const {
    if (null_.cols() == 0) return y0_;
    return y0_ + null_ * (null_.transpose() * y);
  }

  ComplexMatrix block_of(const RealVector& y, std::size_t k) const {
    const Index r = p_.blocks()[k].free_dim();
    return real_to_hermitian(y.segment(offset_[k], r * r), r);
  }

  RealVector project_cone(const RealVector& y, double shift) const {
    RealVector out(n_);
    for (std::size_t k = 0; k < p_.blocks().size(); ++k) {
      const Index r = p_.blocks()[k].free_dim();
      if (r == 0) continue;
      const HermEig eig = herm_eig(block_of(y, k), std::numeric_limits<double>::infinity());
      out.segment(offset_[k], r * r) =
          hermitian_to_real(spectral_map(eig, [shift](double l) { return l > shift ? l : shift; }));
    }
    return out;
  }

  double min_block_eig(const RealVector& y) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p_.blocks().size(); ++k) {
      if (p_.blocks()[k].free_dim() > 0) m = std::min(m, min_eigenvalue(block_of(y, k)));
    }
    return m;
  }

  /// Upper bound on the margin from a direction Z normal to the affine set:
  /// for Z ⪰ 0, every affine point X ⪰ tI has ⟨Z, y₀⟩ = ⟨Z, X⟩ ≥ t·tr Z.
  double certificate(const RealVector& x, const RealVector& y) const {
    RealVector z = y - x;
    if (null_.cols() > 0) z -= null_ * (null_.transpose() * z);
    if (z.norm() <= 1e-14) return std::numeric_limits<double>::infinity();
    const double lam = min_block_eig(z);
    if (lam < 0.0) {
      if (!identity_in_rowspace_) return std::numeric_limits<double>::infinity();
      z -= lam * identity_vec_;
    }
    const double tr = z.dot(identity_vec_);
    if (tr <= 1e-14) return std::numeric_limits<double>::infinity();
    return z.dot(y0_) / tr;
  }

  // --- Gauss-Newton polish on X_k = B_k B_k† ------------------------------

  std::optional<RealVector> polish(const RealVector& y) const {
    double scale = 1.0;
    std::vector<HermEig> eigs;
    for (std::size_t k = 0; k < p_.blocks().size(); ++k) {
      const Index r = p_.blocks()[k].free_dim();
      eigs.push_back(r > 0 ? herm_eig(block_of(y, k), std::numeric_limits<double>::infinity()) : HermEig{});
      if (r > 0) scale = std::max(scale, eigs.back().evals(r - 1));
    }
    std::set<std::vector<Index>> tried;
    for (double thr : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      std::vector<Index> ranks;
      for (std::size_t k = 0; k < eigs.size(); ++k) {
        Index rank = 0;
        for (Index i = 0; i < eigs[k].evals.size(); ++i) {
          if (eigs[k].evals(i) > thr * scale) ++rank;
        }
        ranks.push_back(rank);
      }
      if (!tried.insert(ranks).second) continue;
      if (auto hit = gauss_newton(eigs, ranks)) return hit;
    }
    return std::nullopt;
  }

  std::optional<RealVector> gauss_newton(const std::vector<HermEig>& eigs, const std::vector<Index>& ranks) const {
    const std::size_t nb = p_.blocks().size();
    std::vector<ComplexMatrix> factors(nb);
    Index params = 0;
    for (std::size_t k = 0; k < nb; ++k) {
      const Index r = p_.blocks()[k].free_dim();
      factors[k] = ComplexMatrix::Zero(r, ranks[k]);
      for (Index c = 0; c < ranks[k]; ++c) {
        const Index src = r - 1 - c;
        factors[k].col(c) = std::sqrt(std::max(eigs[k].evals(src), 0.0)) * eigs[k].evecs.col(src);
      }
      params += 2 * r * ranks[k];
    }
    auto stacked = [&](const std::vector<ComplexMatrix>& f) {
      RealVector y = RealVector::Zero(n_);
      for (std::size_t k = 0; k < nb; ++k) {
        const Index r = p_.blocks()[k].free_dim();
        if (r > 0) y.segment(offset_[k], r * r) = hermitian_to_real(f[k] * f[k].adjoint());
      }
      return y;
    };
    const double target = 1e-12 * (1.0 + b_.norm());
    RealVector y = stacked(factors);
    double res = residual(y);
    for (int it = 0; it < 40 && res > target; ++it) {
      RealMatrix jac(a_.rows(), params);
      Index col = 0;
      for (std::size_t k = 0; k < nb; ++k) {
        const Index r = p_.blocks()[k].free_dim();
        for (Index i = 0; i < r; ++i) {
          for (Index j = 0; j < ranks[k]; ++j) {
            for (cplx unit : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
              // d(BB†) = E B† + B E† for E = unit·|i⟩⟨j|.
              ComplexMatrix eb = ComplexMatrix::Zero(r, r);
              eb.row(i) = unit * factors[k].col(j).adjoint();
              const ComplexMatrix d = eb + eb.adjoint();
              RealVector dy = RealVector::Zero(n_);
              dy.segment(offset_[k], r * r) = hermitian_to_real(d);
              jac.col(col++) = a_ * dy;
            }
          }
        }
      }
      const RealVector f = a_ * y - b_;
      const RealVector step = Eigen::CompleteOrthogonalDecomposition<RealMatrix>(jac).solve(-f);
      col = 0;
      for (std::size_t k = 0; k < nb; ++k) {
        const Index r = p_.blocks()[k].free_dim();
        for (Index i = 0; i < r; ++i) {
          for (Index j = 0; j < ranks[k]; ++j) {
            factors[k](i, j) += cplx(step(col), step(col + 1));
            col += 2;
          }
        }
      }
      y = stacked(factors);
      const double next = residual(y);
      if (!(next < res)) {
        res = next;
        break;
      }
      res = next;
    }
    if (res <= target) return y;
    return std::nullopt;
  }

  // --- Dykstra -------------------------------------------------------------

  Attempt dykstra(double shift, long cap, bool allow_polish) const {
    Attempt out;
    RealVector x = y0_;
    RealVector p = RealVector::Zero(n_);
    RealVector y = x;
    long next_polish = 200;
    const double floor = shift - tol_.psd_tol;
    for (long it = 1; it <= cap; ++it) {
      y = project_cone(x + p, shift);
      p = x + p - y;
      x = project_affine(y);
      out.iterations = it;
      if (it % 10 == 0 || it == cap) {
        const double lam = min_block_eig(x);
        if (lam >= floor) {
          out.feasible = true;
          out.point = x;
          return out;
        }
      }
      if (it == next_polish || it == cap) {
        next_polish *= 2;
        const double bound = certificate(x, y);
        out.bound = std::min(out.bound, bound);
        log("dykstra shift=" + fmt(shift) + " iter=" + std::to_string(it) + " gap=" + fmt((x - y).norm()) +
            " min_eig=" + fmt(min_block_eig(x)) + " bound=" + fmt(bound));
        if (out.bound < shift - tol_.feas_tol && out.bound < -tol_.feas_tol) {
          out.point = x;
          return out;
        }
        if (allow_polish && shift == 0.0) {
          if (auto hit = polish(y)) {
            out.feasible = true;
            out.point = *hit;
            log("polish succeeded iter=" + std::to_string(it));
            return out;
          }
        }
      }
    }
    out.point = x;
    out.bound = std::min(out.bound, certificate(x, y));
    return out;
  }

  /// Bisection on the shift t in X ⪰ tI. Returns (estimate, best certified bound).
  std::pair<double, double> bisect(long* iterations) const {
    double rhs_norm = 0.0;
    for (const auto& c : p_.constraints()) rhs_norm = std::max(rhs_norm, herm_norm(c.rhs));
    double lo = -1.0 - rhs_norm;
    double hi = 1.0;
    double cert = std::numeric_limits<double>::infinity();
    const long cap = std::max(200, opt_.max_iter / 50);
    for (int step = 0; step < opt_.bisection_steps; ++step) {
      const double mid = 0.5 * (lo + hi);
      const Attempt a = dykstra(mid, cap, false);
      *iterations += a.iterations;
      cert = std::min(cert, a.bound);
      if (a.feasible) {
        lo = mid;
      } else {
        hi = std::min(mid, std::max(cert, lo));
      }
      log("bisect step=" + std::to_string(step) + " lo=" + fmt(lo) + " hi=" + fmt(hi) + " cert=" + fmt(cert));
      if (hi - lo < 1e-9) break;
    }
    return {0.5 * (lo + hi), cert};
  }

  std::vector<ComplexMatrix> assemble(const RealVector& y) const {
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < p_.blocks().size(); ++k) {
      const FeasBlock& blk = p_.blocks()[k];
      if (blk.free_dim() == 0) {
        out.push_back(zeros(blk.side, blk.side));
        continue;
      }
      const ComplexMatrix inner = block_of(y, k);
      out.push_back(blk.face ? ComplexMatrix(*blk.face * inner * blk.face->adjoint()) : inner);
    }
    return out;
  }

  void log(const std::string& line) const {
    if (opt_.trace) *opt_.trace << line << '\n';
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
  }

  const FeasibilityProblem& p_;
  Tolerances tol_;
  SolveOptions opt_;
  std::vector<Index> offset_;
  Index n_ = 0;
  RealMatrix a_;
  RealVector b_;
  RealVector y0_;
  RealMatrix null_;
  RealVector identity_vec_;
  bool identity_in_rowspace_ = false;
  bool inconsistent_ = false;
  double affine_gap_ = 0.0;
};

}  // namespace detail

/// Deterministic for fixed inputs: fixed start (the minimum-norm affine
/// point), fixed iteration and polish schedule, fixed bisection window.
inline FeasibilityOutcome solve(const FeasibilityProblem& p, const Tolerances& tol = {},
                                const SolveOptions& opt = {}) {
  return detail::FeasibilityEngine(p, tol, opt).run();
}

/// Residual of a block assignment against the problem's constraints.
inline double constraint_residual(const FeasibilityProblem& p, const std::vector<ComplexMatrix>& blocks) {
  if (blocks.size() != p.blocks().size()) fail(ErrorCode::dimension_mismatch, "witness has wrong block count");
  double worst = 0.0;
  for (const auto& c : p.constraints()) {
    ComplexMatrix lhs = zeros(c.rhs.rows(), c.rhs.cols());
    for (const auto& t : c.terms) {
      const ComplexMatrix& x = blocks[t.block];
      lhs += t.weight * (t.reduce ? partial_trace(x, t.reduce->dims, t.reduce->keep) : x);
    }
    worst = std::max(worst, (lhs - c.rhs).norm());
  }
  return worst;
}

}  // namespace qdev
