"""Tests for topology bases, residuals and continuity checks."""

import pytest
from hypothesis import given, strategies as st, settings

from entrolab.errors import AmbientMismatch, NoStabilization
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    enumerate_subgroups,
    subgroup_from_generators,
    subgroup_intersect,
    trivial,
    whole,
)
from entrolab.linalg import IntMatrix, Lattice
from entrolab.topology import (
    discrete_base,
    explicit_base,
    index_of,
    intersect,
    is_continuous,
    is_finer,
    natural_base,
    preimage_of,
    product_base,
    product_of_bases,
    profinite_base,
    quotient_base,
    residual_subgroup,
)
from entrolab.window import (
    LatticeGroup,
    WindowGroup,
    base_subgroup,
    left_shift,
    product_subgroup,
)

groups = st.lists(st.sampled_from([2, 3, 4, 6]), min_size=1, max_size=2).map(lambda m: FinAbGroup(tuple(m)))


def test_profinite_base_on_finite_groups():
    tau = profinite_base(FinAbGroup((2, 2)))
    assert tau.exhaustive
    assert len(tau.elements(1)) == 5
    assert len(tau.prefix(2)) == 2
    assert [index_of(N) for N in tau][0] == 1


def test_profinite_base_on_integers():
    tau = profinite_base(LatticeGroup(1), max_index=6)
    assert not tau.exhaustive
    assert tau.params == {"max_index": 6}
    assert len(list(tau)) == 6
    with pytest.raises(ValueError, match="product base"):
        profinite_base(WindowGroup(FinAbGroup((2,))))


def test_natural_base():
    tau = natural_base(FinAbGroup((4,)))
    assert [N.index for N in tau] == [1, 2, 4]
    Z = LatticeGroup(1)
    assert natural_base(Z).prefix(3) == [Z.whole(), Z.multiple(2), Z.multiple(3)]


def test_product_base_and_products(binary_sum):
    assert product_base(binary_sum).prefix(3) == [base_subgroup(binary_sum, m) for m in (1, 2, 3)]
    G3 = WindowGroup(FinAbGroup((3,)))
    tau = product_of_bases(product_base(binary_sum), product_base(G3))
    assert tau.carrier == WindowGroup(FinAbGroup((2, 3)))
    assert tau.prefix(2)[1] == product_subgroup(base_subgroup(binary_sum, 2), base_subgroup(G3, 2))

    finite = product_of_bases(natural_base(FinAbGroup((2,))), natural_base(FinAbGroup((3,))))
    assert finite.exhaustive
    assert sorted(N.index for N in finite) == [1, 2, 3, 6]


def test_explicit_base_checks_members():
    G = FinAbGroup((4,))
    with pytest.raises(ValueError, match="at least one"):
        explicit_base(G, [])
    with pytest.raises(AmbientMismatch):
        explicit_base(G, [whole(FinAbGroup((2,)))])
    with pytest.raises(AmbientMismatch):
        explicit_base(LatticeGroup(2), [Lattice.whole(1)])


# Feature: entrolab, Property 10: Profinite Bases Are Directed
# **Validates: topology TopologyBase.is_directed**
@settings(max_examples=30, deadline=None)
@given(G=groups)
def test_profinite_bases_are_directed(G):
    tau = profinite_base(G)
    assert tau.is_directed(len(tau.elements(1)))
    assert is_finer(discrete_base(G), natural_base(G), 8)


def test_residual_structural_rules(binary_sum):
    report = residual_subgroup(natural_base(LatticeGroup(2)), 4)
    assert (report.trivial, report.exact, report.rule) == (True, True, "residually_finite")
    report = residual_subgroup(product_base(binary_sum), 4)
    assert report.rule == "hausdorff"
    assert report.subgroup is None


def test_residual_of_finite_bases():
    G = FinAbGroup((2, 4))
    report = residual_subgroup(profinite_base(G), 4)
    assert report.trivial and report.exact
    assert report.subgroup == trivial(G)

    H = subgroup_from_generators(G, [G.element((1, 0))])
    report = residual_subgroup(explicit_base(G, [H]), 4)
    assert report.subgroup == H
    assert not report.trivial


def test_residual_of_truncated_prefix():
    Z = LatticeGroup(1)
    still_shrinking = explicit_base(Z, [Z.multiple(2), Z.multiple(4)], exhaustive=False)
    with pytest.raises(NoStabilization):
        residual_subgroup(still_shrinking, 2)
    settled = explicit_base(Z, [Z.multiple(2), Z.multiple(4), Z.multiple(4)], exhaustive=False)
    report = residual_subgroup(settled, 3)
    assert report.subgroup == Z.multiple(4)
    assert not report.exact


def test_quotient_base():
    G = FinAbGroup((4,))
    H = subgroup_from_generators(G, [G.element((2,))])
    q, tau = quotient_base(profinite_base(G), H)
    assert q.quotient.order == 2
    assert [N.index for N in tau] == [1, 2]
    with pytest.raises(AmbientMismatch):
        quotient_base(natural_base(LatticeGroup(1)), H)


def test_continuity(binary_sum):
    assert is_continuous(left_shift(binary_sum), product_base(binary_sum), 3)
    G = FinAbGroup((2, 2))
    swap = Homomorphism(G, G, IntMatrix.from_rows([[0, 1], [1, 0]]))
    first = subgroup_from_generators(G, [G.element((1, 0))])
    assert not is_continuous(swap, explicit_base(G, [first]), 1)
    assert is_continuous(swap, profinite_base(G), 5)
    assert not is_finer(explicit_base(G, [whole(G)]), profinite_base(G), 5)


def test_member_dispatch():
    G = FinAbGroup((6,))
    A, B = enumerate_subgroups(G)[1:3]
    assert intersect(A, B) == subgroup_intersect(A, B)
    doubling = Homomorphism.multiplication(G, 2)
    assert preimage_of(trivial(G), doubling).order == 2
    with pytest.raises(TypeError):
        index_of("not a subgroup")
