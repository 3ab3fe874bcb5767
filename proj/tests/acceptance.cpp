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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qdev/cli.hpp"
#include "qdev/qdev.hpp"
#include "random_devices.hpp"

namespace {

using namespace qdev;
using qdev::testing::Rng;
namespace fx = qdev::fixtures;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/// ‖Φ₁(B) − Φ₂(B)‖ maximized over the Pauli basis.
double pauli_action_gap(const CPMap& a, const CPMap& b) {
  double worst = 0.0;
  for (const auto& p : {identity(2), pauli::x(), pauli::y(), pauli::z()}) {
    worst = std::max(worst, (apply_s(a, p) - apply_s(b, p)).norm());
  }
  return worst;
}

Result criterion_1() {
  const CPMap f1 = fx::luders_px();
  const CPMap f2 = fx::half_sigma_x();
  const Verdict v = classify(f1, f2);
  if (v.relation != Relation::weakly_compatible_only) return {false, "relation " + std::string(to_string(v.relation))};
  const CPMap& lam = *v.weak->upper_channel;
  const double gap = pauli_action_gap(lam, fx::dephasing_x());
  if (gap <= 1e-7) return {true, "common channel matches rho/2 + sx rho sx/2 (gap " + fmt(gap) + ")"};
  // Any other common upper channel is acceptable once re-validated.
  const bool valid = lam.is_channel() && cp_leq(f1, lam) && cp_leq(f2, lam);
  return {valid, std::string(valid ? "re-validated" : "invalid") + " common channel (gap to rho/2 + sx rho sx/2 " + fmt(gap) + ")"};
}

Result criterion_2() {
  const CPMap f1 = fx::luders_px();
  const CPMap f2 = fx::luders_pz();
  const Verdict v = classify(f1, f2);
  DecideOptions slow;
  slow.fast_paths = false;
  const Decision engine = weakly_compatible_ops(f1, f2, slow);
  const UpperChannelCertificate oracle = rank1_upper_channels_equal(f1, f2);
  const double margin = engine.margin.value_or(0.0);
  const bool ok = v.relation == Relation::strongly_incompatible && engine.answer == Answer::no && margin < -1e-7 &&
                  !oracle.equal;
  return {ok, std::string(to_string(v.relation)) + ", engine margin " + fmt(margin) + ", rank-1 oracle " +
                  (oracle.equal ? "equal" : "different")};
}

Result relation_is(const Device& a, const Device& b, Relation want) {
  const Verdict v = classify(a, b);
  return {v.relation == want, std::string(to_string(v.relation)) + " [" + v.compat.route + (v.weak ? "; " + v.weak->route : "") + "]"};
}

Result criterion_5() {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cmd_table1({}, out, err);
  const std::string expected_grid =
      "                                    op-op   op-ef   ef-ef   \n"
      "compatible                          ✓       ✓       ✓       \n"
      "incompatible but weakly compatible  (✓)     (✓)     ✓       \n"
      "strongly incompatible               (✓)     (✓)     ×       \n";
  const bool grid_ok = code == 0 && out.str().rfind(expected_grid, 0) == 0;

  Rng rng(5);
  int strong = 0;
  int undecided = 0;
  for (int i = 0; i < 500; ++i) {
    const Index d = 2 + (i % 5 == 4 ? 1 : 0);
    const Effect e1(testing::random_effect_matrix(rng, d));
    const Effect e2(testing::random_effect_matrix(rng, d));
    const Verdict v = classify(e1, e2);
    if (v.relation == Relation::strongly_incompatible) ++strong;
    if (v.relation == Relation::undecided) ++undecided;
  }
  return {grid_ok && strong == 0, std::string(grid_ok ? "table pattern matches" : "table pattern differs") +
                                      "; 500 random effect pairs: " + std::to_string(strong) + " strongly incompatible, " +
                                      std::to_string(undecided) + " undecided"};
}

Result criterion_6() {
  // Φ₁(ρ) = tr(ρ)I/3 and Φ₂(ρ) = (tr(ρ)I + ρᵀ)/3 on a qubit; the transpose
  // map has the swap operator as Choi matrix.
  const Index d = 2;
  ComplexMatrix swap = zeros(d * d, d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
  }
  const ComplexMatrix j1 = identity(d * d) / 3.0;
  const CPMap f1(d, d, j1);
  const CPMap f2(d, d, j1 + swap / 3.0);
  const bool leq = cp_leq(f1, f2);
  Rng rng(6);
  double worst = 1.0;
  for (int i = 0; i < 200; ++i) {
    const ComplexMatrix rho = testing::random_pure_state(rng, d);
    worst = std::min(worst, min_eigenvalue(hermitian_part(apply_s(f2, rho) - apply_s(f1, rho))));
  }
  return {!leq && worst >= -1e-10,
          std::string("cp_leq ") + (leq ? "true" : "false") + ", min eigenvalue of difference on 200 pure inputs " + fmt(worst)};
}

/// Pure qubit pairs drawn away from the boundary of the compatible set:
/// a third have ‖K₁‖² + ‖K₂‖² ≤ 0.8 (sum clearly an operation), a third are
/// K₂ = cK₁ with |c| ≤ 0.9 (comparable), and a third have large non-parallel
/// Kraus operators whose sum exceeds the identity by at least 0.2.
Result criterion_7() {
  Rng rng(7);
  DecideOptions slow;
  slow.fast_paths = false;
  int disagree = 0;
  int undecided = 0;
  int drawn = 0;
  for (int i = 0; drawn < 200; ++i) {
    ComplexMatrix k1 = testing::random_complex(rng, 2, 2);
    ComplexMatrix k2 = testing::random_complex(rng, 2, 2);
    const int cls = drawn % 3;
    if (cls == 0) {
      const double s1 = testing::uniform(rng, 0.05, 0.6);
      const double s2 = testing::uniform(rng, 0.05, 0.8 - s1);
      k1 *= std::sqrt(s1) / k1.operatorNorm();
      k2 *= std::sqrt(s2) / k2.operatorNorm();
    } else if (cls == 1) {
      k1 *= testing::uniform(rng, 0.3, 1.0) / k1.operatorNorm();
      const double phase = testing::uniform(rng, 0.0, 6.283185307179586);
      k2 = testing::uniform(rng, 0.2, 0.9) * std::polar(1.0, phase) * k1;
    } else {
      k1 *= testing::uniform(rng, 0.85, 1.0) / k1.operatorNorm();
      k2 *= testing::uniform(rng, 0.85, 1.0) / k2.operatorNorm();
      const double overlap = std::abs(choi_vector(k1).dot(choi_vector(k2))) / (k1.norm() * k2.norm());
      const double excess = max_eigenvalue(k1.adjoint() * k1 + k2.adjoint() * k2) - 1.0;
      if (overlap > 0.95 || excess < 0.2) continue;
    }
    ++drawn;
    const CPMap a = kraus_map(k1);
    const CPMap b = kraus_map(k2);
    const bool oracle = pure_pair_compatible(a, b);
    const Decision d = op_op_compatible(a, b, slow);
    if (d.answer == Answer::undecided) {
      ++undecided;
    } else if ((d.answer == Answer::yes) != oracle) {
      ++disagree;
    }
  }
  return {disagree == 0 && undecided == 0,
          "200 pairs: " + std::to_string(disagree) + " disagreements, " + std::to_string(undecided) + " undecided"};
}

Result criterion_8() {
  Rng rng(8);
  double duality = 0.0;
  double roundtrip = 0.0;
  double resum = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index dh = 2 + i % 2;
    const Index dk = 2 + (i / 2) % 2;
    const CPMap m = testing::random_operation(rng, dh, dk, 1 + i % 3);
    const ComplexMatrix rho = testing::random_state(rng, dh);
    const ComplexMatrix t = testing::random_complex(rng, dk, dk);
    duality = std::max(duality, std::abs((apply_s(m, rho) * t).trace() - (rho * apply_h(m, t)).trace()));
    const CPMap back = choi_from_kraus(kraus_from_choi(m));
    for (const auto& b : hermitian_basis(dh)) roundtrip = std::max(roundtrip, (apply_s(back, b) - apply_s(m, b)).norm());
    const ComplexMatrix x = testing::random_complex(rng, dh, dh);
    resum = std::max(resum, (four_effect_decomposition(x).resum() - x).norm());
  }
  return {duality <= 1e-9 && roundtrip <= 1e-9 && resum <= 1e-10,
          "duality " + fmt(duality) + ", Kraus/Choi roundtrip " + fmt(roundtrip) + ", four-effect resum " + fmt(resum)};
}

/// Φ with Kraus operators L_β = Σ_α (√E₀)(β, α) K_α, so Φᴴ(T) = V†(T ⊗ E₀)V.
CPMap below_dilation(const StinespringDilation& dil, const ComplexMatrix& e0) {
  const ComplexMatrix root = mat_sqrt(e0);
  std::vector<ComplexMatrix> ops;
  for (Index beta = 0; beta < dil.ancilla_dim; ++beta) {
    ComplexMatrix l = zeros(dil.dim_out, dil.dim_in);
    for (Index alpha = 0; alpha < dil.ancilla_dim; ++alpha) l += root(beta, alpha) * dil.kraus_operator(alpha);
    ops.push_back(l);
  }
  return choi_from_kraus(KrausSet(dil.dim_in, dil.dim_out, ops));
}

Result criterion_9() {
  Rng rng(9);
  double worst = 0.0;
  int raised = 0;
  for (int i = 0; i < 50; ++i) {
    const Index dh = 2 + i % 2;
    const Index dk = 2;
    const Index da = 2 + i % 2;
    const StinespringDilation dil = minimal_stinespring(testing::random_channel(rng, dh, dk, da));
    const ComplexMatrix e0 = testing::random_effect_matrix(rng, dil.ancilla_dim, 0.0, 0.5);
    const CPMap f = below_dilation(dil, e0);
    worst = std::max(worst, (radon_nikodym_effect(dil, f).matrix() - e0).norm());
    // Adding 0.3 of a random pure operation leaves the range of the dilated
    // channel's Choi matrix, so the result is no longer below it.
    const ComplexMatrix k = testing::random_complex(rng, dk, dh);
    const CPMap extra = kraus_map(k / k.operatorNorm());
    const CPMap perturbed(dh, dk, f.choi() + 0.3 * extra.choi());
    try {
      radon_nikodym_effect(dil, perturbed);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::not_dominated) ++raised;
    }
  }
  return {worst <= 1e-8 && raised == 50,
          "recovery error " + fmt(worst) + ", not-dominated raised on " + std::to_string(raised) + "/50 perturbed maps"};
}

Result criterion_10() {
  Rng rng(10);
  double branch = 0.0;
  double prob = 0.0;
  double pointer = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index dh = 1 + i % 3;
    const Index dk = 1 + (i / 3) % 3;
    const std::size_t n = 1 + static_cast<std::size_t>(i % 4);
    const Instrument ins = testing::random_instrument(rng, dh, dk, n, 1 + (i / 4) % 2);
    const MeasurementModel m = synthesize_model(ins);
    const Instrument back = model_instrument(m);
    for (std::size_t x = 0; x < n; ++x) branch = std::max(branch, (back.branch_at(x).choi() - ins.branch_at(x).choi()).norm());
    const ComplexMatrix rho = testing::random_state(rng, dh);
    double total = 0.0;
    for (const auto& x : m.pointer().outcomes()) total += model_probability(m, rho, {x});
    prob = std::max(prob, std::abs(total - 1.0));
    // A different pointer on the same (η, U): the trivial observable.
    const MeasurementModel other = m.with_pointer(trivial_observable({0.25, 0.75}, m.dim_v2()));
    pointer = std::max(pointer, (total_channel(model_instrument(other)).choi() - total_channel(back).choi()).norm());
  }
  return {branch <= 1e-8 && prob <= 1e-10 && pointer <= 1e-12,
          "branch error " + fmt(branch) + ", probability sum error " + fmt(prob) + ", pointer dependence " + fmt(pointer)};
}

Result criterion_11() {
  const Verdict v = classify(fx::luders_px(), fx::half_sigma_x());
  if (!v.weak || !v.weak->instrument_pair) return {false, "no weak witness instruments"};
  const auto& [i1, i2] = *v.weak->instrument_pair;
  const auto [m1, m2] = shared_model_pair(i1, i2);
  const bool same_eta = m1.eta().rows() == m2.eta().rows() &&
                        std::memcmp(m1.eta().data(), m2.eta().data(), sizeof(cplx) * m1.eta().size()) == 0;
  const bool same_u = m1.u().rows() == m2.u().rows() &&
                      std::memcmp(m1.u().data(), m2.u().data(), sizeof(cplx) * m1.u().size()) == 0;
  bool pointers_differ = false;
  for (std::size_t x = 0; x < std::min(m1.pointer().size(), m2.pointer().size()); ++x) {
    pointers_differ = pointers_differ || !approx_equal(m1.pointer().effect_at(x).matrix(), m2.pointer().effect_at(x).matrix(), 1e-9);
  }
  double err = 0.0;
  const Instrument b1 = model_instrument(m1);
  const Instrument b2 = model_instrument(m2);
  for (std::size_t x = 0; x < i1.size(); ++x) err = std::max(err, (b1.branch_at(x).choi() - i1.branch_at(x).choi()).norm());
  for (std::size_t x = 0; x < i2.size(); ++x) err = std::max(err, (b2.branch_at(x).choi() - i2.branch_at(x).choi()).norm());
  return {same_eta && same_u && pointers_differ && err <= 1e-8,
          std::string("eta ") + (same_eta ? "byte-equal" : "differs") + ", U " + (same_u ? "byte-equal" : "differs") +
              ", pointers " + (pointers_differ ? "differ" : "coincide") + ", induced-instrument error " + fmt(err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"1 weak operation pair (Luders Px, sx.sx/2)", criterion_1},
      {"2 strong operation pair (Luders Px, Luders Pz), dual path", criterion_2},
      {"3 weak effect-operation pair (Px, Luders Pz)",
       [] { return relation_is(fx::px(), fx::luders_pz(), Relation::weakly_compatible_only); }},
      {"4 strong effect-operation pair (Px, Luders(Pz + P-z/2))",
       [] { return relation_is(fx::px(), fx::luders_soft_z(), Relation::strongly_incompatible); }},
      {"5 relation table and effect pairs", criterion_5},
      {"6 transposition counterexample to the CP order", criterion_6},
      {"7 solver vs pure-pair oracle", criterion_7},
      {"8 duality, Kraus/Choi and four-effect properties", criterion_8},
      {"9 Radon-Nikodym inversion", criterion_9},
      {"10 model synthesis faithfulness", criterion_10},
      {"11 shared-model realization of the weak pair", criterion_11},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.pass) ++failed;
    std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << r.detail << " (" << fmt(secs) << " s)\n";
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
