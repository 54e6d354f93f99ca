"""Tests for finite abelian groups, subgroups and homomorphisms."""

import itertools

import pytest
from hypothesis import given, strategies as st, settings

from entrolab.errors import AmbientMismatch, OrderBoundExceeded
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    abelian_groups,
    abelian_groups_up_to,
    count_endomorphisms,
    direct_sum_hom,
    direct_sum_subgroup,
    enumerate_endomorphisms,
    enumerate_subgroups,
    image,
    induced_endomorphism,
    kernel,
    multiple_subgroup,
    preimage,
    present_subgroup,
    quotient_invariants,
    quotient_map,
    restrict_endomorphism,
    subgroup_from_generators,
    subgroup_intersect,
    subgroup_sum,
    trivial,
    whole,
)
from entrolab.linalg import IntMatrix

SMALL_GROUPS = [G for G in abelian_groups_up_to(16) if G.rank]

groups = st.sampled_from(SMALL_GROUPS)


@st.composite
def group_with_endomorphism(draw):
    G = draw(st.sampled_from([G for G in SMALL_GROUPS if G.order <= 8]))
    phi = draw(st.sampled_from(list(enumerate_endomorphisms(G))))
    return G, phi


def test_element_arithmetic():
    G = FinAbGroup((4, 6))
    x, y = G.element([3, 5]), G.element([2, 4])
    assert (x + y).coords == (1, 3)
    assert (x - y).coords == (1, 1)
    assert (-x).coords == (1, 1)
    assert (3 * x).coords == (1, 3)
    assert x.order() == 12
    assert G.zero().is_zero()


def test_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        FinAbGroup((2,)).element([1]) + FinAbGroup((3,)).element([1])


def test_invalid_homomorphism_rejected():
    with pytest.raises(ValueError, match="does not define a homomorphism"):
        Homomorphism(FinAbGroup((2,)), FinAbGroup((3,)), IntMatrix.from_rows([[1]]))


def test_abelian_group_counts():
    # number of partitions per prime exponent
    assert len(abelian_groups(16)) == 5
    assert len(abelian_groups(36)) == 4
    assert FinAbGroup((2, 3)).is_isomorphic(FinAbGroup((6,)))
    assert FinAbGroup((2, 6)).invariant_factors() == (2, 6)


@pytest.mark.parametrize(
    "moduli, expected",
    [((2,), 2), ((2, 2), 5), ((4, 2), 8), ((2, 2, 2), 16), ((6,), 4), ((3, 3), 6)],
)
def test_subgroup_counts(moduli, expected):
    assert len(enumerate_subgroups(FinAbGroup(moduli))) == expected


def test_order_bound():
    with pytest.raises(OrderBoundExceeded):
        enumerate_subgroups(FinAbGroup((2,) * 9), order_bound=256)


# Feature: entrolab, Property 7: Subgroup Lattice Laws
# **Validates: finab intersect/sum/index**
@settings(max_examples=60, deadline=None)
@given(G=groups, data=st.data())
def test_subgroup_lattice_laws(G, data):
    subgroups = enumerate_subgroups(G)
    A = data.draw(st.sampled_from(subgroups))
    B = data.draw(st.sampled_from(subgroups))
    meet, join = subgroup_intersect(A, B), subgroup_sum(A, B)
    assert meet.is_subset(A) and A.is_subset(join)
    assert meet.order * join.order == A.order * B.order
    assert A.order * A.index == G.order
    assert all(A.contains(x) for x in meet.elements())


# Feature: entrolab, Property 8: Homomorphism Theorems
# **Validates: finab preimage/image/kernel/quotient**
@settings(max_examples=60, deadline=None)
@given(pair=group_with_endomorphism(), data=st.data())
def test_first_isomorphism_theorem(pair, data):
    G, phi = pair
    H = data.draw(st.sampled_from(enumerate_subgroups(G)))
    assert kernel(phi).order * image(phi, whole(G)).order == G.order
    assert image(phi, preimage(phi, H)).is_subset(H)
    assert H.is_subset(preimage(phi, image(phi, H)))
    assert all(H.contains(phi(x)) for x in preimage(phi, H).elements())


@settings(max_examples=60, deadline=None)
@given(G=groups, data=st.data())
def test_quotient_map(G, data):
    H = data.draw(st.sampled_from([H for H in enumerate_subgroups(G) if H.index > 1]))
    q = quotient_map(H)
    assert q.quotient.order == H.index
    assert kernel(q.projection) == H
    assert image(q.projection, whole(G)) == whole(q.quotient)
    assert quotient_invariants(G, H) == q.quotient.invariant_factors()
    for y in q.quotient.elements():
        assert q.projection(q.lift(y)) == y


def test_induced_and_restricted_endomorphisms():
    G = FinAbGroup((4, 2))
    phi = Homomorphism(G, G, IntMatrix.from_rows([[1, 2], [1, 1]]))
    H = multiple_subgroup(G, 2)
    q, induced = induced_endomorphism(phi, H)
    for x in G.elements():
        assert q.projection(phi(x)) == induced(q.projection(x))
    presentation, restricted = restrict_endomorphism(phi, H)
    for y in presentation.group.elements():
        assert presentation.inclusion(restricted(y)) == phi(presentation.inclusion(y))


def test_present_subgroup_is_isomorphic_onto():
    G = FinAbGroup((4, 6))
    H = subgroup_from_generators(G, [G.element([2, 3])])
    presentation = present_subgroup(H)
    assert presentation.group.order == H.order
    assert image(presentation.inclusion, whole(presentation.group)) == H
    assert kernel(presentation.inclusion) == trivial(presentation.group)


@pytest.mark.parametrize("moduli", [(2,), (4,), (2, 2), (2, 4), (6,), (3, 3)])
def test_endomorphism_enumeration_is_complete(moduli):
    G = FinAbGroup(moduli)
    endomorphisms = list(enumerate_endomorphisms(G))
    assert len(endomorphisms) == count_endomorphisms(G)
    assert len(set(endomorphisms)) == len(endomorphisms)


def test_power_and_compose():
    G = FinAbGroup((5,))
    phi = Homomorphism.multiplication(G, 2)
    assert phi.power(4) == Homomorphism.identity(G)
    assert phi.compose(phi) == Homomorphism.multiplication(G, 4)
    assert phi.power(0) == Homomorphism.identity(G)
    assert phi.is_injective()
    assert not Homomorphism.multiplication(FinAbGroup((4,)), 2).is_injective()


def test_direct_sums():
    G1, G2 = FinAbGroup((2,)), FinAbGroup((3,))
    phi = direct_sum_hom(Homomorphism.identity(G1), Homomorphism.zero(G2, G2))
    assert phi.source == FinAbGroup((2, 3))
    assert kernel(phi).order == 3
    H = direct_sum_subgroup(whole(G1), trivial(G2))
    assert H.order == 2
    assert list(itertools.islice(H.elements(), 3))[1].coords == (1, 0)
