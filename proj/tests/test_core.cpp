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

// matkit, devices and order.

#include <gtest/gtest.h>

#include "qdev/qdev.hpp"
#include "random_devices.hpp"

namespace qdev {
namespace {

using testing::Rng;

ComplexMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

double gap(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).norm(); }

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

// ---------------------------------------------------------------------------
// matkit

TEST(Kron, IdentityAndPaulis) {
  EXPECT_LT(gap(kron(identity(2), identity(2)), identity(4)), 1e-15);
  const ComplexMatrix k = kron(pauli::x(), pauli::z());
  EXPECT_LT(gap(k.block(0, 0, 2, 2), zeros(2, 2)), 1e-15);
  EXPECT_LT(gap(k.block(0, 2, 2, 2), pauli::z()), 1e-15);
  EXPECT_LT(gap(k.block(2, 0, 2, 2), pauli::z()), 1e-15);
}

TEST(Kron, IndexFormula) {
  Rng rng(11);
  const ComplexMatrix a = testing::random_complex(rng, 3, 3);
  const ComplexMatrix b = testing::random_complex(rng, 3, 3);
  const ComplexMatrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 9);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index r = 0; r < 3; ++r)
        for (Index c = 0; c < 3; ++c) EXPECT_EQ(k(i * 3 + r, j * 3 + c), a(i, j) * b(r, c));
}

TEST(Kron, AssociativeAndBilinear) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = testing::random_complex(rng, 2, 3);
    const ComplexMatrix b = testing::random_complex(rng, 3, 2);
    const ComplexMatrix c = testing::random_complex(rng, 2, 2);
    const ComplexMatrix b2 = testing::random_complex(rng, 3, 2);
    const cplx s(0.3, -1.2);
    EXPECT_LT(gap(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-10);
    EXPECT_LT(gap(kron(a, b + s * b2), kron(a, b) + s * kron(a, b2)), 1e-10);
  }
}

TEST(PartialTrace, ProductAndIdentity) {
  Rng rng(13);
  const ComplexMatrix a = testing::random_complex(rng, 2, 2);
  const ComplexMatrix b = testing::random_complex(rng, 3, 3);
  EXPECT_LT(gap(partial_trace(kron(a, b), {2, 3}, 0), b.trace() * a), 1e-12);
  EXPECT_LT(gap(partial_trace(kron(a, b), {2, 3}, 1), a.trace() * b), 1e-12);
  EXPECT_LT(gap(partial_trace(identity(4), {2, 2}, 1), 2.0 * identity(2)), 1e-15);
}

TEST(PartialTrace, TracePreserving) {
  Rng rng(14);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix m = testing::random_hermitian(rng, 6);
    EXPECT_NEAR(std::abs(partial_trace(m, {2, 3}, 0).trace() - m.trace()), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(partial_trace(m, {2, 3}, 1).trace() - m.trace()), 0.0, 1e-12);
  }
  EXPECT_EQ(code_of([] { partial_trace(identity(5), {2, 3}, 0); }), ErrorCode::dimension_mismatch);
}

TEST(HermEig, Spectra) {
  const HermEig z = herm_eig(pauli::z());
  EXPECT_NEAR(z.evals(0), -1.0, 1e-15);
  EXPECT_NEAR(z.evals(1), 1.0, 1e-15);
  const HermEig p = herm_eig(pauli::projector('x'));
  EXPECT_NEAR(p.evals(0), 0.0, 1e-15);
  EXPECT_NEAR(p.evals(1), 1.0, 1e-15);
  EXPECT_EQ(code_of([] { herm_eig(mat2(0, 1, 0, 0)); }), ErrorCode::not_hermitian);
}

TEST(HermEig, ReconstructionAndDeterminism) {
  Rng rng(15);
  const ComplexMatrix h = testing::random_hermitian(rng, 8);
  const HermEig e = herm_eig(h);
  const ComplexMatrix back = e.evecs * e.evals.cast<cplx>().asDiagonal() * e.evecs.adjoint();
  EXPECT_LT(gap(back, h), 1e-10);
  EXPECT_LT(gap(e.evecs.adjoint() * e.evecs, identity(8)), 1e-10);
  for (Index i = 1; i < 8; ++i) EXPECT_LE(e.evals(i - 1), e.evals(i));
  const HermEig again = herm_eig(h);
  EXPECT_EQ(e.evals, again.evals);
  EXPECT_EQ(e.evecs, again.evecs);
}

TEST(ProjectPsd, ClampAndFixedPoint) {
  EXPECT_LT(gap(project_psd(pauli::z()), pauli::projector('z')), 1e-14);
  const ComplexMatrix p = pauli::projector('y');
  EXPECT_LT(gap(project_psd(p), p), 1e-14);
  EXPECT_EQ(code_of([] { project_psd(mat2(0, 1, 0, 0)); }), ErrorCode::not_hermitian);
}

TEST(ProjectPsd, NearestAndIdempotent) {
  Rng rng(16);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix h = testing::random_hermitian(rng, 3);
    const ComplexMatrix p = project_psd(h);
    EXPECT_TRUE(is_psd(p, 1e-12));
    EXPECT_LT(gap(project_psd(p), p), 1e-12);
    const double best = gap(p, h);
    for (int k = 0; k < 200; ++k) {
      const ComplexMatrix candidate = project_psd(p + 0.3 * testing::random_hermitian(rng, 3));
      EXPECT_GE(gap(candidate, h), best - 1e-12);
    }
  }
}

TEST(HermitianBasis, PauliAndOrthonormal) {
  const auto b = hermitian_basis(2);
  ASSERT_EQ(b.size(), 4u);
  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<ComplexMatrix> paulis{s * identity(2), s * pauli::x(), s * pauli::y(), s * pauli::z()};
  for (const auto& p : paulis) {
    bool found = false;
    for (const auto& m : b) found = found || gap(m, p) < 1e-14 || gap(m, -p) < 1e-14;
    EXPECT_TRUE(found);
  }
  for (Index d : {2, 3, 4}) {
    const auto basis = hermitian_basis(d);
    ASSERT_EQ(static_cast<Index>(basis.size()), d * d);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      EXPECT_TRUE(is_hermitian(basis[i], 1e-14));
      for (std::size_t j = 0; j < basis.size(); ++j) {
        EXPECT_NEAR(std::abs(frob_inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)), 0.0, 1e-14);
      }
    }
  }
}

TEST(HermitianBasis, ExpandResum) {
  Rng rng(17);
  const ComplexMatrix h = testing::random_hermitian(rng, 4);
  ComplexMatrix back = zeros(4, 4);
  for (const auto& b : hermitian_basis(4)) back += frob_inner(b, h).real() * b;
  EXPECT_LT(gap(back, h), 1e-12);
  EXPECT_LT(gap(real_to_hermitian(hermitian_to_real(h), 4), h), 1e-12);
}

TEST(MatSqrt, Cases) {
  const ComplexMatrix p = pauli::projector('x');
  EXPECT_LT(gap(mat_sqrt(p), p), 1e-14);
  EXPECT_LT(gap(mat_sqrt(4.0 * identity(2)), 2.0 * identity(2)), 1e-14);
  Rng rng(18);
  const ComplexMatrix g = testing::random_complex(rng, 5, 5);
  const ComplexMatrix q = g * g.adjoint();
  const ComplexMatrix r = mat_sqrt(q);
  EXPECT_LT(gap(r * r, q), 1e-10);
  EXPECT_TRUE(is_psd(r, 1e-12));
  EXPECT_EQ(code_of([] { mat_sqrt(pauli::z()); }), ErrorCode::not_psd);
}

TEST(Predicates, ScaleFreeEquality) {
  const ComplexMatrix big = 1e6 * identity(2);
  EXPECT_TRUE(approx_equal(big, big + 1e-4 * identity(2), 1e-9));
  EXPECT_FALSE(approx_equal(identity(2), identity(2) + 1e-4 * identity(2), 1e-9));
  EXPECT_TRUE(is_psd(pauli::projector('z'), 1e-9));
  EXPECT_FALSE(is_psd(pauli::z(), 1e-9));
}

TEST(Matkit, RejectsNonFinite) {
  ComplexMatrix m = identity(2);
  m(0, 1) = std::nan("");
  EXPECT_EQ(code_of([&] { Effect e(m); }), ErrorCode::non_finite);
}

// ---------------------------------------------------------------------------
// devices

TEST(Effect, Validation) {
  EXPECT_NO_THROW(Effect(pauli::projector('x')));
  EXPECT_EQ(code_of([] { Effect e(1.5 * identity(2)); }), ErrorCode::invalid_effect);
  EXPECT_EQ(code_of([] { Effect e(pauli::z()); }), ErrorCode::invalid_effect);
  EXPECT_EQ(code_of([] { Effect e(mat2(0.5, 0.1, 0.0, 0.5)); }), ErrorCode::not_hermitian);
}

TEST(Observable, ValidationAndSubsets) {
  const Observable a({{"+", pauli::projector('x')}, {"-", pauli::projector('x', -1)}});
  EXPECT_LT(gap(a.subset_sum({"+", "-"}), identity(2)), 1e-15);
  EXPECT_EQ(code_of([&] { a.effect("0"); }), ErrorCode::unknown_label);
  EXPECT_EQ(code_of([] { Observable b({{"a", pauli::projector('x')}}); }), ErrorCode::observable_not_normalized);
  EXPECT_EQ(code_of([] { Observable b({{"a", 0.5 * identity(2)}, {"a", 0.5 * identity(2)}}); }), ErrorCode::duplicate_label);
}

TEST(CPMap, KindAndValidation) {
  EXPECT_TRUE(identity_channel(2).is_channel());
  EXPECT_FALSE(fixtures::luders_px().is_channel());
  EXPECT_EQ(code_of([] { CPMap m(2, 2, 2.0 * identity(4)); }), ErrorCode::trace_increasing);
  ComplexMatrix bad = identity(4) * 0.25;
  bad(0, 0) = -0.1;
  EXPECT_EQ(code_of([&] { CPMap m(2, 2, bad); }), ErrorCode::not_completely_positive);
  EXPECT_EQ(code_of([] { make_channel(2, 2, 0.25 * identity(4)); }), ErrorCode::not_a_channel);
  EXPECT_EQ(code_of([] { CPMap m(2, 3, identity(4)); }), ErrorCode::dimension_mismatch);
}

TEST(ChoiFromKraus, IdentityChannel) {
  const CPMap id = choi_from_kraus(KrausSet({identity(2)}));
  ComplexMatrix expected = zeros(4, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) expected(i * 2 + i, j * 2 + j) = 1.0;
  EXPECT_LT(gap(id.choi(), expected), 1e-15);
  EXPECT_NEAR(id.choi().trace().real(), 2.0, 1e-15);
  EXPECT_TRUE(id.is_channel());
}

TEST(ChoiFromKraus, LudersPx) {
  const CPMap m = choi_from_kraus(KrausSet({pauli::projector('x')}));
  Rng rng(21);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix rho = testing::random_state(rng, 2);
    const ComplexMatrix p = pauli::projector('x');
    EXPECT_LT(gap(apply_s(m, rho), p * rho * p), 1e-14);
  }
  EXPECT_EQ(code_of([] { KrausSet k(2, 2, {identity(3)}); }), ErrorCode::dimension_mismatch);
}

TEST(KrausFromChoi, Examples) {
  const KrausSet id = kraus_from_choi(identity_channel(2));
  ASSERT_EQ(id.size(), 1u);
  const ComplexMatrix k = id.ops()[0];
  EXPECT_LT(gap(k.adjoint() * k, identity(2)), 1e-12);
  EXPECT_NEAR(std::abs(k(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(k(0, 0) - k(1, 1)), 0.0, 1e-12);

  const CPMap reset = contraction_channel(pauli::projector('z'), 2);
  const KrausSet rk = kraus_from_choi(reset);
  ASSERT_EQ(rk.size(), 2u);
  for (const auto& op : rk.ops()) {
    EXPECT_NEAR(std::abs(op(1, 0)) + std::abs(op(1, 1)), 0.0, 1e-12);
    EXPECT_EQ(Eigen::JacobiSVD<ComplexMatrix>(op).rank(), 1);
  }
  const CPMap back = choi_from_kraus(rk);
  for (const auto& b : hermitian_basis(2)) EXPECT_LT(gap(apply_s(back, b), b.trace() * pauli::projector('z')), 1e-12);

  const KrausSet lz = kraus_from_choi(fixtures::luders_pz());
  ASSERT_EQ(lz.size(), 1u);
  const ComplexMatrix& z = lz.ops()[0];
  EXPECT_NEAR(std::abs(z(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(z.norm(), 1.0, 1e-12);
}

TEST(KrausChoi, RoundtripProperty) {
  Rng rng(22);
  for (int t = 0; t < 30; ++t) {
    const CPMap m = testing::random_operation(rng, 2 + t % 2, 1 + t % 3, 1 + t % 4);
    const CPMap back = choi_from_kraus(kraus_from_choi(m));
    for (const auto& b : hermitian_basis(m.dim_in())) EXPECT_LT(gap(apply_s(back, b), apply_s(m, b)), 1e-9);
  }
}

TEST(Apply, DualityAndUnitality) {
  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    const CPMap ch = testing::random_channel(rng, 2, 3, 2);
    EXPECT_LT(gap(apply_h(ch, identity(3)), identity(2)), 1e-12);
    const CPMap m = testing::random_operation(rng, 3, 2, 3);
    const ComplexMatrix rho = testing::random_state(rng, 3);
    const ComplexMatrix t2 = testing::random_complex(rng, 2, 2);
    EXPECT_LT(std::abs((apply_s(m, rho) * t2).trace() - (rho * apply_h(m, t2)).trace()), 1e-10);
  }
  const ComplexMatrix out = apply_s(fixtures::luders_px(), pauli::projector('z'));
  EXPECT_LT(gap(out, 0.5 * pauli::projector('x')), 1e-14);
  EXPECT_EQ(code_of([] { apply_s(fixtures::luders_px(), identity(3)); }), ErrorCode::dimension_mismatch);
}

TEST(FourEffects, Examples) {
  const auto id = four_effect_decomposition(identity(2));
  EXPECT_LT(gap(id.resum(), identity(2)), 1e-14);
  bool has_identity = false;
  for (const auto& e : id.effects) has_identity = has_identity || gap(e.matrix(), identity(2)) < 1e-14;
  EXPECT_TRUE(has_identity);
  const ComplexMatrix t = pauli::x() + cplx(0, 1) * pauli::y();
  EXPECT_LT(gap(four_effect_decomposition(t).resum(), t), 1e-12);
  const ComplexMatrix px = pauli::projector('x');
  EXPECT_LT(gap(four_effect_decomposition(px).resum(), px), 1e-14);
  Rng rng(24);
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix r = testing::random_complex(rng, 3, 3);
    EXPECT_LT(gap(four_effect_decomposition(r).resum(), r), 1e-10);
  }
}

TEST(InstrumentParts, DerivedQuantities) {
  const Instrument ins = fixtures::luders_x_instrument();
  EXPECT_LT(gap(instrument_part_effect(ins, {"+"}).matrix(), pauli::projector('x')), 1e-14);
  EXPECT_LT(gap(instrument_part_effect(ins, {"+", "-"}).matrix(), identity(2)), 1e-14);
  EXPECT_LT(gap(instrument_part_op(ins, {"+"}).choi(), fixtures::luders_px().choi()), 1e-14);
  EXPECT_TRUE(total_channel(ins).is_channel());
  EXPECT_LT(gap(total_channel(ins).choi(), fixtures::dephasing_x().choi()), 1e-14);
  const Observable a = induced_observable(ins);
  EXPECT_LT(gap(a.effect("-").matrix(), pauli::projector('x', -1)), 1e-14);
  const Instrument merged = relabel(ins, PointerMap::constant(ins.outcomes(), "all"));
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_LT(gap(merged.branch_at(0).choi(), fixtures::dephasing_x().choi()), 1e-14);
  EXPECT_EQ(code_of([&] { instrument_part_effect(ins, {"?"}); }), ErrorCode::unknown_label);
  EXPECT_EQ(code_of([] { Instrument bad({"a"}, {fixtures::luders_px()}); }), ErrorCode::instrument_not_channel);
}

TEST(PartOf, Searches) {
  const Instrument ins = fixtures::luders_x_instrument();
  EXPECT_TRUE(is_part_of(fixtures::px(), ins));
  EXPECT_FALSE(is_part_of(fixtures::pz(), ins));
  EXPECT_TRUE(is_part_of(Effect(identity(2)), ins));
  EXPECT_TRUE(is_part_of(fixtures::luders_px(), ins));
  EXPECT_FALSE(is_part_of(fixtures::luders_pz(), ins));
  EXPECT_TRUE(is_part_of(fixtures::dephasing_x(), ins));
  EXPECT_FALSE(is_part_of(identity_channel(2), ins));
  const Observable swapped({{"a", pauli::projector('x', -1)}, {"b", pauli::projector('x')}});
  const auto f = find_part(swapped, ins);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->image.at("+"), "b");
  EXPECT_TRUE(is_part_of(trivial_observable({1.0}, 2), ins));
}

TEST(PartOf, OutcomeBound) {
  std::vector<double> p(kMaxSearchOutcomes + 1, 1.0 / static_cast<double>(kMaxSearchOutcomes + 1));
  const Instrument big = weighted_instrument(identity_channel(2), p);
  EXPECT_EQ(code_of([&] { find_part(fixtures::half_identity(), big); }), ErrorCode::outcome_bound_exceeded);
}

TEST(CanonicalInstruments, ContainTheirDevice) {
  const ComplexMatrix rho0 = maximally_mixed(2);
  EXPECT_TRUE(is_part_of(fixtures::px(), canonical_instrument(fixtures::px(), rho0)));
  const Observable a({{"0", pauli::projector('z')}, {"1", pauli::projector('z', -1)}});
  EXPECT_TRUE(is_part_of(a, canonical_instrument(a, rho0)));
  EXPECT_TRUE(is_part_of(fixtures::half_sigma_x(), canonical_instrument(fixtures::half_sigma_x(), rho0)));
  const Instrument w = weighted_instrument(fixtures::dephasing_x(), {0.25, 0.75});
  EXPECT_TRUE(is_part_of(fixtures::dephasing_x(), w));
  EXPECT_LT(gap(w.branch_at(1).choi(), 0.75 * fixtures::dephasing_x().choi()), 1e-14);
  EXPECT_EQ(code_of([] { weighted_instrument(fixtures::luders_px(), std::vector<double>{1.0}); }), ErrorCode::not_a_channel);
  EXPECT_EQ(code_of([] { weighted_instrument(identity_channel(2), std::vector<double>{0.5, 0.6}); }),
            ErrorCode::invalid_distribution);
}

TEST(ChannelPart, OnlyTheTotal) {
  // A channel sits in an instrument only as the full outcome set.
  const Instrument ins = weighted_instrument(identity_channel(2), {0.5, 0.5});
  EXPECT_TRUE(is_part_of(identity_channel(2), ins));
  EXPECT_FALSE(is_part_of(fixtures::dephasing_x(), ins));
}

// ---------------------------------------------------------------------------
// order

TEST(CpOrder, Basics) {
  const CPMap lx = fixtures::luders_px();
  EXPECT_TRUE(cp_leq(fixtures::half_luders_px(), lx));
  EXPECT_FALSE(cp_leq(lx, fixtures::half_luders_px()));
  EXPECT_TRUE(cp_leq(lx, fixtures::dephasing_x()));
  EXPECT_TRUE(cp_leq(fixtures::half_sigma_x(), fixtures::dephasing_x()));
  EXPECT_TRUE(comparable(lx, fixtures::half_luders_px()));
  EXPECT_FALSE(comparable(lx, fixtures::luders_pz()));
  EXPECT_TRUE(cp_leq(null_operation(2, 2), lx));
}

TEST(CpOrder, TranspositionCounterexample) {
  ComplexMatrix swap = zeros(4, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) swap(i * 2 + j, j * 2 + i) = 1.0;
  const CPMap f1(2, 2, identity(4) / 3.0);
  const CPMap f2(2, 2, identity(4) / 3.0 + swap / 3.0);
  EXPECT_FALSE(cp_leq(f1, f2));
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix rho = testing::random_pure_state(rng, 2);
    EXPECT_GE(min_eigenvalue(hermitian_part(apply_s(f2, rho) - apply_s(f1, rho))), -1e-10);
  }
}

TEST(PurePairs, Criterion) {
  EXPECT_FALSE(pure_pair_compatible(fixtures::luders_px(), fixtures::half_sigma_x()));
  EXPECT_TRUE(pure_pair_compatible(fixtures::luders_px(), fixtures::half_luders_px()));
  EXPECT_FALSE(pure_pair_compatible(fixtures::luders_px(), fixtures::luders_pz()));
  const CPMap a = kraus_map(0.5 * pauli::x());
  const CPMap b = kraus_map(0.5 * pauli::z());
  EXPECT_TRUE(pure_pair_compatible(a, b));
  EXPECT_EQ(code_of([] { pure_pair_compatible(fixtures::dephasing_x(), fixtures::luders_px()); }), ErrorCode::not_pure);
  EXPECT_EQ(choi_rank(fixtures::dephasing_x()), 2);
  EXPECT_TRUE(is_pure(fixtures::half_sigma_x()));
}

TEST(Rank1Family, ChannelsAboveOperation) {
  const CPMap lx = fixtures::luders_px();
  const RankOneDeficiency d = rank1_deficiency(lx);
  EXPECT_NEAR(d.weight, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(d.direction.dot(ComplexVector(pauli::projector('x', -1).col(0).normalized()))), 1.0, 1e-12);
  Rng rng(32);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix xi = testing::random_state(rng, 2);
    const CPMap lam = rank1_channel_family(lx, xi);
    EXPECT_TRUE(lam.is_channel());
    EXPECT_TRUE(cp_leq(lx, lam));
  }
  EXPECT_EQ(code_of([] { rank1_deficiency(fixtures::half_sigma_x()); }), ErrorCode::rank_condition);
}

TEST(Rank1Family, UpperChannelOracle) {
  const auto strong = rank1_upper_channels_equal(fixtures::luders_px(), fixtures::luders_pz());
  EXPECT_FALSE(strong.equal);
  EXPECT_FALSE(strong.reason.empty());
  // Luders Px and Luders P-x: Λ(ρ) = PxρPx + P₋xρP₋x lies above both.
  const CPMap lmx = luders(Effect(pauli::projector('x', -1)));
  const auto weak = rank1_upper_channels_equal(fixtures::luders_px(), lmx);
  ASSERT_TRUE(weak.equal);
  ASSERT_TRUE(weak.channel.has_value());
  EXPECT_TRUE(cp_leq(fixtures::luders_px(), *weak.channel));
  EXPECT_TRUE(cp_leq(lmx, *weak.channel));
}

TEST(TrivialDevices, Detectors) {
  EXPECT_TRUE(is_trivial_effect(fixtures::half_identity()));
  EXPECT_FALSE(is_trivial_effect(fixtures::px()));
  EXPECT_TRUE(is_null_operation(null_operation(2, 2)));
  EXPECT_FALSE(is_null_operation(fixtures::luders_px()));
  const auto eta = is_contraction_channel(contraction_channel(pauli::projector('y'), 2));
  ASSERT_TRUE(eta.has_value());
  EXPECT_LT(gap(*eta, pauli::projector('y')), 1e-12);
  EXPECT_FALSE(is_contraction_channel(identity_channel(2)).has_value());
  EXPECT_TRUE(is_projection(fixtures::pz()));
  EXPECT_FALSE(is_projection(fixtures::half_identity()));
  EXPECT_TRUE(commute(pauli::z(), pauli::projector('z')));
  EXPECT_FALSE(commute(pauli::z(), pauli::x()));
  EXPECT_TRUE(commutes_with_range(fixtures::luders_pz(), fixtures::pz()));
  EXPECT_FALSE(commutes_with_range(fixtures::luders_pz(), fixtures::px()));
}

}  // namespace
}  // namespace qdev
