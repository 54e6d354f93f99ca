"""Tests for cotrajectories, trajectories and the entropy values built from them."""

import math
import random

import pytest
from hypothesis import given, strategies as st, settings

from entrolab.config import Budget
from entrolab.entropy import (
    EntropyValue,
    alg_entropy_H,
    base_entropies,
    bernoulli_certificate,
    bernoulli_infinity,
    cotrajectory_indices,
    cotrajectory_indices_truncated,
    cover_oracle,
    ent_algebraic,
    ent_star,
    ent_star_tau,
    first_verifiable_step,
    h_star,
    h_top_linear,
    structural_bound,
    trajectory_bound,
)
from entrolab.errors import BudgetExhausted, TruncationTooLarge
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    abelian_groups_up_to,
    count_endomorphisms,
    enumerate_endomorphisms,
    enumerate_subgroups,
    image,
    induced_endomorphism,
    is_invariant,
    restrict_endomorphism,
    subgroup_from_generators,
    whole,
)
from entrolab.linalg import IntMatrix, unimodular_inverse
from entrolab.topology import explicit_base, natural_base, product_base
from entrolab.window import (
    KernelRuleSubgroup,
    LatticeEndo,
    LatticeGroup,
    WindowGroup,
    WindowSubgroup,
    automorphism_inverse,
    base_subgroup,
    banded,
    enumerate_sublattices,
    identity_endo,
    left_shift,
    product_endo,
    product_group,
    relabel_endo,
    right_shift,
    two_sided_shift,
)


def difference_map(G):
    """``(x_q) -> (x_q + x_{q+1})``."""
    one = Homomorphism.identity(G.base)
    return banded(G, 0, [[(0, one), (-1, one)]])


def test_entropy_value_arithmetic():
    assert EntropyValue.exact(2) + EntropyValue.exact(3) == EntropyValue.exact(6)
    assert (EntropyValue.exact(2) + EntropyValue.exact(3, "heuristic")).mode == "heuristic"
    assert (EntropyValue.exact(2) + EntropyValue.at_least(3)).kind == "at_least"
    assert (EntropyValue.infinite(["c"]) + EntropyValue.exact(2)).kind == "infinite"
    assert EntropyValue.exact(3).scaled(2) == EntropyValue.exact(9)
    assert EntropyValue.infinite(["c"]).scaled(0).is_zero
    assert EntropyValue.exact(4).compare(EntropyValue.exact(2)) == 1
    assert EntropyValue.infinite(["c"]).compare(EntropyValue.exact(2)) == 1
    with pytest.raises(ValueError):
        EntropyValue.at_least(2).compare(EntropyValue.exact(2))


def test_entropy_value_validation_and_json():
    with pytest.raises(ValueError):
        EntropyValue("exact", 0, "proven")
    with pytest.raises(ValueError):
        EntropyValue("infinite")
    with pytest.raises(ValueError):
        EntropyValue("exact", 2, None)
    value = EntropyValue.exact(8, "heuristic")
    assert value.to_json() == {"kind": "exact", "alpha": 8, "mode": "heuristic"}
    assert EntropyValue.from_json(value.to_json()) == value
    assert EntropyValue.at_least(2, {"max_steps": 4}).to_json()["budget"] == {"max_steps": 4}
    assert str(EntropyValue.exact(1)) == "0"
    assert str(EntropyValue.exact(4)) == "log 4"
    assert str(EntropyValue.at_least(2)) == ">= log 2"


# Feature: entrolab, Property 11: Left Shift Cotrajectory Law
# **Validates: entropy h_star, cotrajectory_indices**
@settings(max_examples=20, deadline=None)
@given(
    moduli=st.sampled_from([(2,), (3,), (4,), (2, 2)]),
    m=st.integers(min_value=1, max_value=5),
)
def test_left_shift_cotrajectory(moduli, m):
    G = WindowGroup(FinAbGroup(moduli))
    N = base_subgroup(G, m)
    k = G.base.order
    value, trace = h_star(left_shift(G), N)
    assert value == EntropyValue.exact(k)
    assert trace.mode == "proven"
    assert cotrajectory_indices(left_shift(G), N, 4) == [k ** (m + n) for n in range(4)]


def test_stationary_chains_have_zero_entropy(binary_sum):
    N = base_subgroup(binary_sum, 3)
    assert h_star(right_shift(binary_sum), N)[0].is_zero
    value, trace = h_star(identity_endo(binary_sum), N)
    assert value.is_zero
    assert trace.stabilized_at == 1


def test_two_sided_shift_cotrajectory(shift_base):
    Z = WindowGroup(shift_base, "Z")
    value, _ = h_star(two_sided_shift(Z), base_subgroup(Z, 2))
    assert value == EntropyValue.exact(shift_base.order)


def test_heuristic_acceptance(binary_sum):
    phi = difference_map(binary_sum)
    value, trace = h_star(phi, base_subgroup(binary_sum, 2), Budget(max_steps=8, confirm_window=3))
    assert value == EntropyValue.exact(2, "heuristic")
    assert trace.stabilized_at == 1
    assert trace.ratios == (2, 2, 2)


def test_budget_exhaustion_carries_partial_result(binary_sum):
    phi = difference_map(binary_sum)
    with pytest.raises(BudgetExhausted) as info:
        h_star(phi, base_subgroup(binary_sum, 2), Budget(max_steps=2, confirm_window=3))
    assert info.value.partial.kind == "at_least"
    assert len(info.value.trace.steps) == 2


def test_truncated_model_agrees_with_window_arithmetic():
    G = WindowGroup(FinAbGroup((3,)), "N", "product")
    for phi in (left_shift(G), right_shift(G), difference_map(G)):
        N = base_subgroup(G, 2)
        assert cotrajectory_indices_truncated(phi, N, 5) == cotrajectory_indices(phi, N, 5)


def test_structural_bounds(binary_sum):
    assert structural_bound(left_shift(binary_sum)) == 2
    assert structural_bound(right_shift(binary_sum)) == 1
    assert trajectory_bound(right_shift(binary_sum)) == 2
    assert structural_bound(difference_map(binary_sum)) == 2
    Z = WindowGroup(FinAbGroup((3,)), "Z")
    assert structural_bound(two_sided_shift(Z)) == 3
    assert structural_bound(Homomorphism.identity(FinAbGroup((4,)))) == 1


def test_adjoint_entropy_of_shifts(shift_base, small_budget):
    G = WindowGroup(shift_base)
    assert ent_star_tau(left_shift(G), product_base(G), small_budget) == EntropyValue.exact(shift_base.order)
    assert ent_star_tau(right_shift(G), product_base(G), small_budget).is_zero


def test_adjoint_entropy_of_products(small_budget):
    G2, G3 = WindowGroup(FinAbGroup((2,))), WindowGroup(FinAbGroup((3,)))
    phi = product_endo(left_shift(G2), left_shift(G3))
    value = ent_star_tau(phi, product_base(product_group(G2, G3)), small_budget)
    assert value.same_value(EntropyValue.exact(6))


def test_adjoint_entropy_on_other_carriers(small_budget):
    K = FinAbGroup((2, 4))
    for phi in list(enumerate_endomorphisms(K))[:10]:
        assert ent_star(phi, small_budget).is_zero
    Z = LatticeGroup(1)
    assert ent_star(LatticeEndo.multiplication(Z, 2), small_budget).is_zero
    with pytest.raises(ValueError, match="carrier"):
        ent_star_tau(LatticeEndo.multiplication(Z, 2), natural_base(FinAbGroup((2,))), small_budget)


def test_algebraic_entropy(shift_base, small_budget):
    G = WindowGroup(shift_base)
    assert ent_algebraic(right_shift(G), small_budget) == EntropyValue.exact(shift_base.order)
    assert ent_algebraic(left_shift(G), small_budget).is_zero
    assert ent_algebraic(LatticeEndo.multiplication(LatticeGroup(2), 3)).is_zero
    K = FinAbGroup((6,))
    value, _ = alg_entropy_H(Homomorphism.multiplication(K, 5), whole(K))
    assert value.is_zero
    with pytest.raises(ValueError, match="direct sums"):
        ent_algebraic(left_shift(G.with_flavor("product")), small_budget)


def test_topological_entropy(small_budget):
    G = WindowGroup(FinAbGroup((2, 2)), "N", "product")
    assert h_top_linear(left_shift(G), product_base(G), small_budget) == EntropyValue.exact(4)
    with pytest.raises(ValueError, match="compact"):
        h_top_linear(left_shift(G.with_flavor("direct_sum")), product_base(G.with_flavor("direct_sum")))


def test_parallel_members_match_sequential(binary_sum, small_budget):
    phi = left_shift(binary_sum)
    members = product_base(binary_sum).prefix(4)
    sequential = base_entropies(lambda N: h_star(phi, N, small_budget), members)
    parallel = base_entropies(lambda N: h_star(phi, N, small_budget), members, jobs=3)
    assert [r.value for r in sequential] == [r.value for r in parallel]


def test_cover_oracle(small_budget):
    G = WindowGroup(FinAbGroup((2,)), "N", "product")
    N = base_subgroup(G, 1)
    assert [cover_oracle(left_shift(G), N, n) for n in range(1, 5)] == [2, 4, 8, 16]
    assert cover_oracle(right_shift(G), N, 4) == 2
    K = FinAbGroup((4,))
    assert cover_oracle(Homomorphism.identity(K), whole(K), 3) == 1
    with pytest.raises(TruncationTooLarge):
        cover_oracle(left_shift(G), N, 3, Budget(truncation_bound=4))
    with pytest.raises(ValueError):
        cover_oracle(left_shift(G), N, 0)


def test_bernoulli_certificate():
    certificate = bernoulli_certificate(2, 2, 4)
    assert certificate.verdict == "verified"
    assert certificate.alpha_lower == 4
    assert certificate.n_start == 2
    assert certificate.to_json()["skipped"] == [1]
    assert [c.n for c in certificate.checks] == [2, 3, 4]
    assert first_verifiable_step(KernelRuleSubgroup(WindowGroup(FinAbGroup((3,))), 3)) == 1


@pytest.mark.parametrize("shift", ["left", "two_sided"])
def test_bernoulli_certificate_variants(shift):
    certificate = bernoulli_certificate(3, 2, 3, shift)
    assert certificate.verdict == "verified"
    assert certificate.alpha_lower == 9
    assert [c.n for c in certificate.checks] == [2, 3]


def test_bernoulli_certificate_arguments():
    with pytest.raises(ValueError, match="prime"):
        bernoulli_certificate(4, 2, 3)
    with pytest.raises(ValueError, match="at least 2"):
        bernoulli_certificate(2, 1, 3)
    with pytest.raises(ValueError, match="shift"):
        bernoulli_certificate(2, 2, 3, "sideways")
    with pytest.raises(ValueError, match="first verifiable step"):
        bernoulli_certificate(2, 2, 1)


def test_bernoulli_infinity():
    value = bernoulli_infinity(3, [2, 3], 4)
    assert value.kind == "infinite"
    assert [c.m for c in value.certificate] == [2, 3]
    assert value.to_json()["certificate"][0]["verdict"] == "verified"


# --- quotients, invariant subgroups and conjugation --------------------------------


def endomorphisms_of(G):
    """Strategy for endomorphisms of ``G``; entry ``(j, i)`` is a multiple of ``m_j / gcd(m_i, m_j)``."""
    r = G.rank
    entries = [st.sampled_from(range(0, mj, mj // math.gcd(mi, mj))) for mj in G.moduli for mi in G.moduli]
    return st.tuples(*entries).map(
        lambda v: Homomorphism(G, G, IntMatrix.from_rows([v[j * r:(j + 1) * r] for j in range(r)], cols=r))
    )


def assert_quotient_law(phi):
    G = phi.source
    subgroups = enumerate_subgroups(G)
    adjoint = ent_star(phi)
    for H in subgroups:
        if H.index == 1 or not is_invariant(phi, H):
            continue
        q, induced = induced_endomorphism(phi, H)
        for N in subgroups:
            if not H.is_subset(N):
                continue
            NH = image(q.projection, N)
            assert cotrajectory_indices(induced, NH, 4) == cotrajectory_indices(phi, N, 4)
            assert h_star(induced, NH)[0].same_value(h_star(phi, N)[0])
        assert ent_star(induced).compare(adjoint) <= 0


def assert_restriction_law(phi):
    adjoint = ent_star(phi)
    for H in enumerate_subgroups(phi.source):
        if H.order == 1 or not is_invariant(phi, H):
            continue
        presentation, restricted = restrict_endomorphism(phi, H)
        assert presentation.group.order == H.order
        assert ent_star(restricted).same_value(adjoint)


SMALL_GROUPS = [G for G in abelian_groups_up_to(8) if G.order > 1 and count_endomorphisms(G) <= 64]


@pytest.mark.parametrize("G", SMALL_GROUPS, ids=str)
def test_quotient_law_on_every_endomorphism(G):
    for phi in enumerate_endomorphisms(G):
        assert_quotient_law(phi)


@pytest.mark.parametrize("G", SMALL_GROUPS, ids=str)
def test_restriction_law_on_every_endomorphism(G):
    for phi in enumerate_endomorphisms(G):
        assert_restriction_law(phi)


# Feature: entrolab, Property 14: Quotient and Invariant-Subgroup Laws
# **Validates: entropy h_star, ent_star; finab induced_endomorphism, restrict_endomorphism**
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_quotient_and_restriction_laws_up_to_order_16(data):
    groups = [G for G in abelian_groups_up_to(16) if 1 < G.order and count_endomorphisms(G) <= 4096]
    G = data.draw(st.sampled_from(groups))
    phi = data.draw(endomorphisms_of(G))
    assert_quotient_law(phi)
    assert_restriction_law(phi)


@pytest.mark.slow
def test_restriction_law_up_to_order_64():
    rng = random.Random(64)
    for G in abelian_groups_up_to(64)[1:]:
        r = G.rank
        rows = [[rng.randrange(0, mj, mj // math.gcd(mi, mj)) for mi in G.moduli] for mj in G.moduli]
        assert_restriction_law(Homomorphism(G, G, IntMatrix.from_rows(rows, cols=r)))


def test_quotient_law_on_a_non_split_quotient():
    G = FinAbGroup((2, 4))
    phi = Homomorphism(G, G, IntMatrix.from_rows([[1, 1], [2, 3]]))
    H = [H for H in enumerate_subgroups(G) if H.order == 2 and is_invariant(phi, H)][0]
    q, induced = induced_endomorphism(phi, H)
    assert q.quotient.order == 4
    for N in enumerate_subgroups(G):
        if H.is_subset(N):
            assert cotrajectory_indices(induced, image(q.projection, N), 3) == cotrajectory_indices(phi, N, 3)


def test_conjugation_by_unimodular_change_of_basis():
    Z2 = LatticeGroup(2)
    U = IntMatrix.from_rows([[2, 1], [1, 1]])
    U_inv = unimodular_inverse(U)
    for rows in ([[2, 1], [0, 3]], [[1, 1], [0, 1]], [[0, -1], [1, 0]]):
        A = LatticeEndo(Z2, IntMatrix.from_rows(rows))
        B = A.conjugate(U)
        for L in enumerate_sublattices(2, 6):
            moved = L.preimage(U_inv)
            assert moved.index == L.index
            assert cotrajectory_indices(B, moved, 4) == cotrajectory_indices(A, L, 4)
    A = LatticeEndo(Z2, IntMatrix.from_rows([[1, 1], [0, 1]]))
    budget = Budget(base_prefix=6)
    assert ent_star(A.conjugate(U), budget).same_value(ent_star(A, budget))
    assert ent_star_tau(A.conjugate(U), natural_base(Z2), budget).same_value(ent_star_tau(A, natural_base(Z2), budget))


def test_conjugation_by_finite_group_automorphism():
    G = FinAbGroup((2, 4))
    phi = Homomorphism(G, G, IntMatrix.from_rows([[1, 1], [2, 3]]))
    xi = Homomorphism(G, G, IntMatrix.from_rows([[1, 0], [2, 1]]))
    conjugate = xi.compose(phi).compose(automorphism_inverse(xi))
    members = enumerate_subgroups(G)[:5]
    moved = [image(xi, N) for N in members]
    for N, M in zip(members, moved):
        assert M.index == N.index
        assert cotrajectory_indices(conjugate, M, 4) == cotrajectory_indices(phi, N, 4)
        assert h_star(conjugate, M)[0].same_value(h_star(phi, N)[0])
    assert ent_star_tau(conjugate, explicit_base(G, moved)).same_value(ent_star_tau(phi, explicit_base(G, members)))


def test_conjugation_by_coordinate_automorphism():
    K = FinAbGroup((2, 2))
    G = WindowGroup(K)
    one = Homomorphism.identity(K)
    c = Homomorphism(K, K, IntMatrix.from_rows([[0, 1], [1, 1]]))
    alpha = Homomorphism(K, K, IntMatrix.from_rows([[1, 1], [0, 1]]))
    B = G.block(0, 2)
    section = subgroup_from_generators(B, [B.element([1, 0, 0, 1])])
    N = WindowSubgroup.create(G, 0, 2, section)
    for phi in (banded(G, 0, [[(0, c), (-1, one)]]), banded(G, -1, [[(0, c)]]), left_shift(G)):
        relabelled = relabel_endo(phi, alpha)
        assert cotrajectory_indices(relabelled, N.map_blocks(alpha), 5) == cotrajectory_indices(phi, N, 5)
    for m in range(1, 4):
        assert base_subgroup(G, m).map_blocks(alpha) == base_subgroup(G, m)
    budget = Budget(max_steps=24, confirm_window=4, base_prefix=3)
    phi = banded(G, -1, [[(0, c)]])
    value = ent_star_tau(relabel_endo(phi, alpha), product_base(G), budget)
    assert value.same_value(ent_star_tau(phi, product_base(G), budget))
    assert value.alpha == 4
