"""Tests for lattice groups, window groups and banded endomorphisms."""

import math

import pytest
from hypothesis import given, strategies as st, settings

from entrolab.errors import AmbientMismatch, UnsupportedBandPattern
from entrolab.finab import FinAbGroup, Homomorphism, enumerate_subgroups
from entrolab.linalg import IntMatrix, Lattice
from entrolab.window import (
    FACTORIALS,
    KernelRuleSubgroup,
    LatticeEndo,
    LatticeGroup,
    SparseElement,
    SupportedSubgroup,
    WindowGroup,
    WindowSubgroup,
    automorphism_inverse,
    banded,
    base_subgroup,
    compose,
    enumerate_sublattices,
    identity_endo,
    image_supported,
    inverse,
    left_shift,
    membership_kernel_rule,
    power,
    preimage_window,
    product_endo,
    product_group,
    product_subgroup,
    reflect_endo,
    relabel_endo,
    right_shift,
    translate_endo,
    truncated_endo,
    truncation,
    two_sided_inverse,
    two_sided_shift,
    zero_endo,
)

K2 = FinAbGroup((2,))
K3 = FinAbGroup((3,))


def e(G, i, value=1):
    return SparseElement.unit(G, i, value)


def test_factorials_are_exact_beyond_64_bits():
    assert FACTORIALS.factorial(29) == math.factorial(29)
    assert FACTORIALS.factorial(29) > 2**64
    assert FACTORIALS.floor_index(120) == 5
    assert FACTORIALS.floor_index(119) == 4


def test_window_group_validation():
    with pytest.raises(ValueError, match="index set"):
        WindowGroup(K2, "Q")
    with pytest.raises(ValueError, match="nontrivial"):
        WindowGroup(FinAbGroup((1,)))
    assert str(WindowGroup(K2)) == "(Z(2))^(N)"


def test_sparse_elements():
    G = WindowGroup(K3)
    x = SparseElement.from_mapping(G, {5: 1, 2: 3, 10**30: 2})
    assert x.support == (5, 10**30)
    assert (x + x).at(5) == (2,)
    assert (x - x).is_zero()
    assert (2 * x).at(10**30) == (1,)
    assert x.restrict(4, 6).coords == (0, 1)
    with pytest.raises(AmbientMismatch):
        SparseElement.zero(WindowGroup(K3, "N", "product"))


def test_window_subgroup_is_trimmed():
    G = WindowGroup(K2)
    # vanishing at index 1 only, described on [0, 3)
    N = WindowSubgroup.from_generators(G, 0, 3, [[1, 0, 0], [0, 0, 1]])
    assert N == WindowSubgroup.zero_window(G, 1, 2)
    assert N.window == (1, 2)
    assert N.index == 2


@pytest.mark.parametrize("index_set, exponent", [("N", 1), ("Z", 2)])
def test_base_subgroup_index(index_set, exponent):
    G = WindowGroup(FinAbGroup((2, 3)), index_set)
    for m in range(0, 4):
        assert base_subgroup(G, m).index == 6 ** (exponent * m)


def test_window_subgroup_lattice_operations():
    G = WindowGroup(K2)
    N1, N2 = base_subgroup(G, 1), base_subgroup(G, 2)
    M = WindowSubgroup.zero_window(G, 1, 3)
    assert N2.is_subset(N1)
    assert not N1.is_subset(N2)
    assert N1.intersect(M) == WindowSubgroup.zero_window(G, 0, 3)
    assert N2.sum(M) == WindowSubgroup.zero_window(G, 1, 2)
    assert e(G, 7) in N2
    assert e(G, 1) not in N2
    assert N1.translate(2) == WindowSubgroup.zero_window(G, 2, 3)


# Feature: entrolab, Property 9: Shift Preimages Move Windows
# **Validates: window preimage_window**
@settings(max_examples=50, deadline=None)
@given(m=st.integers(min_value=1, max_value=6), base=st.sampled_from([K2, K3, FinAbGroup((2, 2))]))
def test_shift_preimages(m, base):
    G = WindowGroup(base)
    assert preimage_window(left_shift(G), base_subgroup(G, m)) == WindowSubgroup.zero_window(G, 1, m + 1)
    assert preimage_window(right_shift(G), base_subgroup(G, m)) == base_subgroup(G, m - 1)
    Z = WindowGroup(base, "Z")
    N = base_subgroup(Z, m)
    assert preimage_window(two_sided_shift(Z), N) == N.translate(-1)


def _small_band_maps(G):
    K = G.base
    one = Homomorphism.identity(K)
    minus = Homomorphism.multiplication(K, -1)
    maps = [
        identity_endo(G),
        zero_endo(G),
        banded(G, 0, [[(0, one), (-1, minus)]]),
        banded(G, 1, [[(0, one)], [(-2, one), (0, minus)]]),
    ]
    if G.index_set == "N":
        return maps + [left_shift(G), right_shift(G)]
    return maps + [two_sided_shift(G), two_sided_inverse(G)]


@pytest.mark.parametrize("index_set", ["N", "Z"])
@pytest.mark.parametrize(
    "K, span", [(K2, 4), (K3, 2), (FinAbGroup((4,)), 2), (FinAbGroup((2, 2)), 2)], ids=["Z2", "Z3", "Z4", "Z2xZ2"]
)
def test_preimage_window_matches_brute_force(K, span, index_set):
    G = WindowGroup(K, index_set)
    lo = 0 if index_set == "N" else -(span // 2)
    hi = lo + span
    # every map below moves an index by at most one
    start = G.clamp(lo - 1)
    elements = [SparseElement.from_block(G, start, x) for x in G.block(start, hi + 1).elements()]
    windows = [(a, b) for a in range(lo, hi) for b in range(a + 1, hi + 1)]
    for phi in _small_band_maps(G):
        images = [phi.apply(x) for x in elements]
        for a, b in windows:
            for S in enumerate_subgroups(G.block(a, b)):
                N = WindowSubgroup.create(G, a, b, S)
                P = preimage_window(phi, N)
                for x, y in zip(elements, images):
                    assert P.contains(x) == N.contains(y), f"{phi}, {N}, {x}"


def test_shift_actions():
    G = WindowGroup(K2)
    assert right_shift(G).apply(e(G, 0)) == e(G, 1)
    assert left_shift(G).apply(e(G, 0)).is_zero()
    assert left_shift(G).apply(e(G, 1)) == e(G, 0)
    assert image_supported(right_shift(G), SupportedSubgroup.at(G, 0)) == SupportedSubgroup.at(G, 1)


def test_preimage_translations():
    G, Z = WindowGroup(K2), WindowGroup(K2, "Z")
    assert left_shift(G).preimage_translation() == 1
    assert right_shift(G).preimage_translation() is None
    assert right_shift(G).image_translation() == 1
    assert two_sided_shift(Z).preimage_translation() == -1


def test_composition_and_powers():
    G = WindowGroup(K2)
    assert power(left_shift(G), 3).apply(e(G, 3)) == e(G, 0)
    identity = compose(left_shift(G), right_shift(G))
    for i in range(4):
        assert identity.apply(e(G, i)) == e(G, i)
    with pytest.raises(UnsupportedBandPattern):
        compose(right_shift(G), left_shift(G))


def test_relabelling_conjugations():
    Z = WindowGroup(K3, "Z")
    assert inverse(two_sided_shift(Z)) == two_sided_inverse(Z)
    assert reflect_endo(two_sided_shift(Z)) == two_sided_inverse(Z)
    assert translate_endo(two_sided_shift(Z), 5) == two_sided_shift(Z)
    doubling = Homomorphism.multiplication(K3, 2)
    assert automorphism_inverse(doubling) == doubling
    assert relabel_endo(two_sided_shift(Z), doubling).pattern == two_sided_shift(Z).pattern
    N = base_subgroup(Z, 2)
    assert N.reflect() == WindowSubgroup.zero_window(Z, -1, 3)


def test_banded_maps():
    G = WindowGroup(K3)
    one = Homomorphism.identity(K3)
    # x_i -> x_i + 2 x_{i+1}
    phi = banded(G, 0, [[(0, one), (-1, Homomorphism.multiplication(K3, 2))]])
    assert phi.reach() == (-1, 0)
    assert phi.apply(e(G, 1)) == SparseElement.from_mapping(G, {0: 2, 1: 1})
    with pytest.raises(UnsupportedBandPattern, match="repeated"):
        banded(G, 0, [[(0, one), (0, one)]])
    with pytest.raises(UnsupportedBandPattern):
        banded(G, 0, [[(0, Homomorphism.identity(K2))]])


def test_product_carriers():
    G2, G3 = WindowGroup(K2), WindowGroup(K3)
    phi = product_endo(left_shift(G2), right_shift(G3))
    G = product_group(G2, G3)
    assert G.base == FinAbGroup((2, 3))
    x = SparseElement.from_mapping(G, {1: (1, 1)})
    assert phi.apply(x) == SparseElement.from_mapping(G, {0: (1, 0), 2: (0, 1)})
    assert product_subgroup(base_subgroup(G2, 1), base_subgroup(G3, 2)).index == 2 * 9


def test_truncation():
    G = WindowGroup(K2, "N", "product")
    assert truncation(G, -2, 3).order == 8
    psi = truncated_endo(left_shift(G), 0, 3)
    assert psi.matrix == IntMatrix.from_rows([[0, 1, 0], [0, 0, 1], [0, 0, 0]])


def test_kernel_rule_subgroup():
    G = WindowGroup(K2)
    N = KernelRuleSubgroup(G, 2)
    assert N.index == 4
    assert N.slots(1) == (1,)
    assert N.slots(2) == (2,)
    assert N.position(1, 1) == 3
    assert N.slots(3) == (1,)
    assert e(G, 3) not in N
    assert (e(G, 1) + e(G, 3)) in N
    assert e(G, 4) in N


@st.composite
def kernel_rule_cases(draw):
    """A kernel-rule subgroup and two elements supported near its rule positions up to ``29!``."""
    p = draw(st.sampled_from([2, 3]))
    m = draw(st.integers(min_value=1, max_value=4))
    sign = draw(st.sampled_from([1, -1]))
    N = KernelRuleSubgroup(WindowGroup(FinAbGroup((p,))), m, sign)
    indices = set(range(1, m + 1))
    for j in range(1, m + 1):
        for n in range(1, (30 - j) // m + 1):
            q = N.position(n, j)
            indices.update(i for i in (q - 1, q, q + 1) if i >= 0)
    pool = sorted(indices)

    def element():
        support = draw(st.lists(st.sampled_from(pool), max_size=6, unique=True))
        return SparseElement.from_mapping(N.ambient, {i: draw(st.integers(1, p - 1)) for i in support})

    return N, element(), element()


def _into_kernel(N, x):
    """``x`` minus its head correction; the head index ``j`` feeds slot ``j`` alone."""
    v = N.evaluate(x).coords
    return x - SparseElement.from_mapping(N.ambient, {j: v[j - 1] for j in range(1, N.m + 1)})


# Feature: entrolab, Property 13: Kernel-Rule Subgroups Are Closed
# **Validates: window KernelRuleSubgroup, membership_kernel_rule**
@settings(max_examples=100, deadline=None)
@given(case=kernel_rule_cases())
def test_kernel_rule_closure(case):
    N, x, y = case
    assert N.evaluate(x + y) == N.evaluate(x) + N.evaluate(y)
    assert N.evaluate(-x) == -N.evaluate(x)
    assert (x in N) == N.evaluate(x).is_zero()
    a, b = _into_kernel(N, x), _into_kernel(N, y)
    for z in (a, b, a + b, -a, a - b):
        assert z in N
        assert membership_kernel_rule(N, z)


def test_kernel_rule_positions_up_to_29_factorial():
    G = WindowGroup(K2)
    for sign in (1, -1):
        N = KernelRuleSubgroup(G, 3, sign)
        for n in range(1, 10):
            for j in range(1, 4):
                assert N.slots(N.position(n, j)) == (j,)
        top = N.position(9, 3)
        assert N.witness_position(9, 3) == math.factorial(29)
        assert e(G, 3) + e(G, top) in N
        assert e(G, 2) + e(G, top) not in N


def test_lattice_groups():
    Z1 = LatticeGroup(1)
    doubling = LatticeEndo.multiplication(Z1, 2)
    assert doubling.preimage(Z1.multiple(2)) == Z1.whole()
    assert doubling.preimage(Z1.multiple(4)) == Z1.multiple(2)
    assert len(enumerate_sublattices(1, 5)) == 5
    Z2 = LatticeGroup(2)
    A = LatticeEndo(Z2, IntMatrix.from_rows([[1, 1], [0, 1]]))
    U = IntMatrix.from_rows([[0, 1], [1, 0]])
    assert A.conjugate(U).matrix == IntMatrix.from_rows([[1, 0], [1, 1]])
    assert A.power(3).matrix == IntMatrix.from_rows([[1, 3], [0, 1]])
    with pytest.raises(ValueError):
        LatticeGroup(0)
    assert Lattice.scaled(2, 3).index == 9
