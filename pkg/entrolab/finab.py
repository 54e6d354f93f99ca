"""Finite abelian groups ``Z(m_1) + ... + Z(m_r)`` and their homomorphisms.

A subgroup ``H`` of ``G`` is stored as the full-rank lattice ``L`` in
``Z^r`` that projects onto it, so ``diag(m) Z^r <= L`` and ``H = L / diag(m)``.
All subgroup operations reduce to lattice operations in ``entrolab.linalg``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import sympy
from sympy.utilities.iterables import partitions

from entrolab.errors import AmbientMismatch, OrderBoundExceeded
from entrolab.linalg import IntMatrix, Lattice, smith_normal_form, unimodular_inverse


@dataclass(frozen=True)
class FinAbGroup:
    """Direct sum of cyclic groups with the given moduli."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        for m in moduli:
            if m < 1:
                raise ValueError(f"moduli must be positive, got {m}")
        object.__setattr__(self, "moduli", moduli)

    @classmethod
    def cyclic(cls, m: int) -> "FinAbGroup":
        return cls((m,))

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.moduli) if self.moduli else 1

    def relations(self) -> IntMatrix:
        return IntMatrix.diagonal(self.moduli)

    def element(self, coords: Sequence[int]) -> "GroupElement":
        """Element with the given coordinates, reduced into range."""
        if len(coords) != self.rank:
            raise AmbientMismatch(f"{len(coords)} coordinates given for a group of rank {self.rank}")
        return GroupElement(self, tuple(int(c) % m for c, m in zip(coords, self.moduli)))

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def unit(self, i: int) -> "GroupElement":
        coords = [0] * self.rank
        coords[i] = 1
        return self.element(coords)

    def elements(self) -> Iterator["GroupElement"]:
        for coords in itertools.product(*(range(m) for m in self.moduli)):
            yield GroupElement(self, coords)

    def power(self, k: int) -> "FinAbGroup":
        """``G^k`` as a group of rank ``k * rank``."""
        return FinAbGroup(self.moduli * k)

    def direct_sum(self, other: "FinAbGroup") -> "FinAbGroup":
        return FinAbGroup(self.moduli + other.moduli)

    def invariant_factors(self) -> tuple[int, ...]:
        """Canonical decomposition ``d_1 | d_2 | ...`` with every ``d_i > 1``."""
        _, D, _ = smith_normal_form(self.relations())
        return tuple(d for d in D.diagonal_entries() if d > 1)

    def is_isomorphic(self, other: "FinAbGroup") -> bool:
        return self.invariant_factors() == other.invariant_factors()

    def __str__(self) -> str:
        return " + ".join(f"Z({m})" for m in self.moduli) or "0"


@dataclass(frozen=True)
class GroupElement:
    ambient: FinAbGroup
    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != self.ambient.rank:
            raise AmbientMismatch(f"{len(coords)} coordinates for a group of rank {self.ambient.rank}")
        for c, m in zip(coords, self.ambient.moduli):
            if not 0 <= c < m:
                raise ValueError(f"coordinate {c} out of range for Z({m})")
        object.__setattr__(self, "coords", coords)

    def _check(self, other: "GroupElement") -> None:
        if self.ambient != other.ambient:
            raise AmbientMismatch(f"elements of {self.ambient} and {other.ambient}")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.ambient.element([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.ambient.element([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "GroupElement":
        return self.ambient.element([-a for a in self.coords])

    def __mul__(self, k: int) -> "GroupElement":
        return self.ambient.element([k * a for a in self.coords])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def order(self) -> int:
        return math.lcm(*(m // math.gcd(m, c) for c, m in zip(self.coords, self.ambient.moduli))) if self.coords else 1


@dataclass(frozen=True)
class Homomorphism:
    """Homomorphism ``source -> target`` given by an integer matrix on coordinates.

    Entry ``(j, i)`` is the ``j``-th coordinate of the image of the ``i``-th
    generator; it is stored reduced modulo the ``j``-th target modulus.
    """

    source: FinAbGroup
    target: FinAbGroup
    matrix: IntMatrix

    def __post_init__(self):
        A = self.matrix
        if A.shape != (self.target.rank, self.source.rank):
            raise AmbientMismatch(
                f"matrix of shape {A.shape} does not map {self.source} to {self.target}"
            )
        rows = [[A[j, i] % self.target.moduli[j] for i in range(A.cols)] for j in range(A.rows)]
        for i, m in enumerate(self.source.moduli):
            for j, k in enumerate(self.target.moduli):
                if (m * rows[j][i]) % k:
                    raise ValueError(
                        f"entry ({j}, {i}) = {rows[j][i]} does not define a homomorphism Z({m}) -> Z({k})"
                    )
        object.__setattr__(self, "matrix", IntMatrix.from_rows(rows, cols=A.cols))

    @classmethod
    def identity(cls, G: FinAbGroup) -> "Homomorphism":
        return cls(G, G, IntMatrix.identity(G.rank))

    @classmethod
    def zero(cls, source: FinAbGroup, target: FinAbGroup) -> "Homomorphism":
        return cls(source, target, IntMatrix.zeros(target.rank, source.rank))

    @classmethod
    def multiplication(cls, G: FinAbGroup, factor: int) -> "Homomorphism":
        return cls(G, G, IntMatrix.identity(G.rank).scaled(factor))

    @classmethod
    def from_images(cls, source: FinAbGroup, target: FinAbGroup, images: Sequence[GroupElement]) -> "Homomorphism":
        """Homomorphism sending the ``i``-th generator to ``images[i]``."""
        return cls(source, target, IntMatrix.from_columns([x.coords for x in images], rows=target.rank))

    @property
    def is_endomorphism(self) -> bool:
        return self.source == self.target

    def __call__(self, x: GroupElement) -> GroupElement:
        if x.ambient != self.source:
            raise AmbientMismatch(f"{x.ambient} is not the source {self.source}")
        return self.target.element(self.matrix.apply(x.coords))

    def compose(self, other: "Homomorphism") -> "Homomorphism":
        """``self o other``."""
        if other.target != self.source:
            raise AmbientMismatch(f"cannot compose through {other.target} and {self.source}")
        return Homomorphism(other.source, self.target, self.matrix @ other.matrix)

    def __add__(self, other: "Homomorphism") -> "Homomorphism":
        if (self.source, self.target) != (other.source, other.target):
            raise AmbientMismatch("homomorphisms between different groups")
        return Homomorphism(self.source, self.target, self.matrix + other.matrix)

    def power(self, k: int) -> "Homomorphism":
        if not self.is_endomorphism:
            raise AmbientMismatch("only endomorphisms have powers")
        if k < 0:
            raise ValueError(f"negative power {k}")
        result = Homomorphism.identity(self.source)
        for _ in range(k):
            result = self.compose(result)
        return result

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def is_injective(self) -> bool:
        return kernel(self).order == 1


@dataclass(frozen=True)
class Subgroup:
    ambient: FinAbGroup
    lattice: Lattice = field(repr=False)

    def __post_init__(self):
        if self.lattice.dim != self.ambient.rank:
            raise AmbientMismatch(f"lattice of rank {self.lattice.dim} in a group of rank {self.ambient.rank}")
        for i, m in enumerate(self.ambient.moduli):
            column = [0] * self.ambient.rank
            column[i] = m
            if not self.lattice.contains(column):
                raise ValueError("lattice does not contain the relations of its ambient group")

    @property
    def index(self) -> int:
        return self.lattice.index

    @property
    def order(self) -> int:
        return self.ambient.order // self.lattice.index

    def contains(self, x: GroupElement) -> bool:
        if x.ambient != self.ambient:
            raise AmbientMismatch(f"element of {x.ambient} tested against a subgroup of {self.ambient}")
        return self.lattice.contains(x.coords)

    def __contains__(self, x: GroupElement) -> bool:
        return self.contains(x)

    def is_subset(self, other: "Subgroup") -> bool:
        _same_ambient(self, other)
        return self.lattice.is_subset(other.lattice)

    def generators(self) -> list[GroupElement]:
        """Images of the canonical lattice basis; nonzero ones only."""
        gens = [self.ambient.element(col) for col in self.lattice.basis.columns()]
        return [g for g in gens if not g.is_zero()]

    def elements(self) -> Iterator[GroupElement]:
        return (x for x in self.ambient.elements() if self.contains(x))

    def coset_key(self, x: GroupElement) -> tuple[int, ...]:
        """Canonical label of the coset ``x + H``."""
        return self.lattice.reduce(x.coords)

    def __str__(self) -> str:
        gens = ", ".join(str(g.coords) for g in self.generators())
        return f"<{gens}> <= {self.ambient}"


def _same_ambient(*subgroups: Subgroup) -> None:
    ambients = {H.ambient for H in subgroups}
    if len(ambients) != 1:
        raise AmbientMismatch(f"subgroups of different groups: {sorted(str(a) for a in ambients)}")


def whole(G: FinAbGroup) -> Subgroup:
    return Subgroup(G, Lattice.whole(G.rank))


def trivial(G: FinAbGroup) -> Subgroup:
    return Subgroup(G, Lattice(G.relations()))


def subgroup_from_generators(G: FinAbGroup, generators: Sequence[GroupElement]) -> Subgroup:
    for g in generators:
        if g.ambient != G:
            raise AmbientMismatch(f"generator in {g.ambient}, expected {G}")
    columns = IntMatrix.from_columns([g.coords for g in generators], rows=G.rank)
    return Subgroup(G, Lattice.from_generators(columns.hstack(G.relations())))


def multiple_subgroup(G: FinAbGroup, factor: int) -> Subgroup:
    """``factor * G``."""
    return subgroup_from_generators(G, [G.unit(i) * factor for i in range(G.rank)])


def subgroup_intersect(A: Subgroup, B: Subgroup) -> Subgroup:
    _same_ambient(A, B)
    return Subgroup(A.ambient, A.lattice.intersect(B.lattice))


def subgroup_sum(A: Subgroup, B: Subgroup) -> Subgroup:
    _same_ambient(A, B)
    return Subgroup(A.ambient, A.lattice.sum(B.lattice))


def preimage(phi: Homomorphism, H: Subgroup) -> Subgroup:
    """``phi^{-1}(H)`` as a subgroup of ``phi.source``."""
    if H.ambient != phi.target:
        raise AmbientMismatch(f"subgroup of {H.ambient}, homomorphism into {phi.target}")
    return Subgroup(phi.source, H.lattice.preimage(phi.matrix))


def image(phi: Homomorphism, H: Subgroup) -> Subgroup:
    """``phi(H)`` as a subgroup of ``phi.target``."""
    if H.ambient != phi.source:
        raise AmbientMismatch(f"subgroup of {H.ambient}, homomorphism from {phi.source}")
    return Subgroup(phi.target, H.lattice.image(phi.matrix, Lattice(phi.target.relations())))


def kernel(phi: Homomorphism) -> Subgroup:
    return preimage(phi, trivial(phi.target))


def quotient_invariants(G: FinAbGroup, H: Subgroup) -> tuple[int, ...]:
    """Invariant factors of ``G / H``, each greater than 1, in divisibility order."""
    if H.ambient != G:
        raise AmbientMismatch(f"subgroup of {H.ambient}, expected {G}")
    _, D, _ = smith_normal_form(H.lattice.basis)
    return tuple(d for d in D.diagonal_entries() if d > 1)


@dataclass(frozen=True)
class QuotientMap:
    """Projection ``G -> G / H`` onto the invariant-factor presentation of ``G / H``."""

    subgroup: Subgroup
    projection: Homomorphism
    lift_matrix: IntMatrix = field(repr=False)

    @property
    def quotient(self) -> FinAbGroup:
        return self.projection.target

    def lift(self, y: GroupElement) -> GroupElement:
        """Some preimage of ``y`` in ``G``."""
        return self.subgroup.ambient.element(self.lift_matrix.apply(y.coords))


def quotient_map(H: Subgroup) -> QuotientMap:
    G = H.ambient
    U, D, _ = smith_normal_form(H.lattice.basis)
    kept = [t for t, d in enumerate(D.diagonal_entries()) if d > 1]
    Q = FinAbGroup(tuple(D[t, t] for t in kept))
    projection = Homomorphism(G, Q, U.submatrix(kept, range(G.rank)))
    U_inv = unimodular_inverse(U)
    return QuotientMap(H, projection, U_inv.submatrix(range(G.rank), kept))


def is_invariant(phi: Homomorphism, H: Subgroup) -> bool:
    """Whether ``phi(H) <= H``."""
    return image(phi, H).is_subset(H)


def induced_endomorphism(phi: Homomorphism, H: Subgroup) -> tuple[QuotientMap, Homomorphism]:
    """The endomorphism of ``G / H`` induced by a ``phi`` that leaves ``H`` invariant."""
    if not phi.is_endomorphism:
        raise AmbientMismatch("induced maps need an endomorphism")
    if not is_invariant(phi, H):
        raise ValueError("subgroup is not invariant under the endomorphism")
    q = quotient_map(H)
    Q = q.quotient
    images = [q.projection(phi(q.lift(Q.unit(t)))) for t in range(Q.rank)]
    return q, Homomorphism.from_images(Q, Q, images)


@dataclass(frozen=True)
class SubgroupPresentation:
    """A subgroup ``H`` presented as an abstract group with its inclusion into ``G``."""

    subgroup: Subgroup
    inclusion: Homomorphism
    coordinate_matrix: IntMatrix = field(repr=False)

    @property
    def group(self) -> FinAbGroup:
        return self.inclusion.source

    def coordinates(self, x: GroupElement) -> GroupElement:
        """The element of ``group`` that the inclusion sends to ``x`` (``x`` must lie in ``H``)."""
        coords = self.subgroup.lattice.coordinates(x.coords)
        if coords is None:
            raise ValueError(f"{x.coords} is not in the subgroup")
        return self.group.element(self.coordinate_matrix.apply(coords))


def present_subgroup(H: Subgroup) -> SubgroupPresentation:
    G = H.ambient
    L = H.lattice
    relations = IntMatrix.from_columns(
        [L.coordinates([m if k == i else 0 for k in range(G.rank)]) for i, m in enumerate(G.moduli)],
        rows=G.rank,
    )
    U, D, _ = smith_normal_form(relations)
    kept = [t for t, d in enumerate(D.diagonal_entries()) if d > 1]
    P = FinAbGroup(tuple(D[t, t] for t in kept))
    U_inv = unimodular_inverse(U)
    inclusion_matrix = L.basis @ U_inv.submatrix(range(G.rank), kept)
    return SubgroupPresentation(H, Homomorphism(P, G, inclusion_matrix), U.submatrix(kept, range(G.rank)))


def restrict_endomorphism(phi: Homomorphism, H: Subgroup) -> tuple[SubgroupPresentation, Homomorphism]:
    """``phi`` restricted to an invariant subgroup ``H``, on the presentation of ``H``."""
    if not phi.is_endomorphism:
        raise AmbientMismatch("restriction needs an endomorphism")
    if not is_invariant(phi, H):
        raise ValueError("subgroup is not invariant under the endomorphism")
    presentation = present_subgroup(H)
    P = presentation.group
    images = [presentation.coordinates(phi(presentation.inclusion(P.unit(t)))) for t in range(P.rank)]
    return presentation, Homomorphism.from_images(P, P, images)


def enumerate_subgroups(G: FinAbGroup, order_bound: int = 256) -> list[Subgroup]:
    """Every subgroup of ``G``, ordered by increasing index then by lattice basis.

    Builds the lattice of subgroups by closure: starting from the trivial
    subgroup, repeatedly adjoin one element.
    """
    if G.order > order_bound:
        raise OrderBoundExceeded(G.order, order_bound)
    elements = list(G.elements())
    start = trivial(G)
    seen = {start}
    queue = deque([start])
    while queue:
        H = queue.popleft()
        for x in elements:
            if H.contains(x):
                continue
            bigger = subgroup_sum(H, subgroup_from_generators(G, [x]))
            if bigger not in seen:
                seen.add(bigger)
                queue.append(bigger)
    return sorted(seen, key=lambda H: (H.index, H.lattice.basis.entries))


def enumerate_endomorphisms(G: FinAbGroup) -> Iterator[Homomorphism]:
    """Every endomorphism of ``G``.

    Entry ``(j, i)`` ranges over multiples of ``m_j / gcd(m_i, m_j)`` in ``[0, m_j)``.
    """
    choices = []
    for j, mj in enumerate(G.moduli):
        for i, mi in enumerate(G.moduli):
            step = mj // math.gcd(mi, mj)
            choices.append(range(0, mj, step))
    for values in itertools.product(*choices):
        rows = [list(values[j * G.rank:(j + 1) * G.rank]) for j in range(G.rank)]
        yield Homomorphism(G, G, IntMatrix.from_rows(rows, cols=G.rank))


def count_endomorphisms(G: FinAbGroup) -> int:
    return math.prod(math.gcd(mi, mj) for mi in G.moduli for mj in G.moduli)


def abelian_groups(order: int) -> list[FinAbGroup]:
    """One group of each isomorphism type of the given order, in invariant-factor form."""
    if order < 1:
        raise ValueError(f"order must be positive, got {order}")
    per_prime = []
    for p, e in sympy.factorint(order).items():
        shapes = []
        for part in partitions(e):
            exponents = sorted(itertools.chain.from_iterable([k] * v for k, v in part.items()), reverse=True)
            shapes.append([p ** k for k in exponents])
        per_prime.append(shapes)
    groups = []
    for combo in itertools.product(*per_prime):
        length = max((len(c) for c in combo), default=0)
        factors = []
        for t in range(length):
            factors.append(math.prod(c[t] if t < len(c) else 1 for c in combo))
        groups.append(FinAbGroup(tuple(reversed(factors))))
    return sorted(groups, key=lambda G: G.moduli)


def abelian_groups_up_to(max_order: int) -> list[FinAbGroup]:
    groups = []
    for n in range(1, max_order + 1):
        groups.extend(abelian_groups(n))
    return groups


def direct_sum_hom(phi1: Homomorphism, phi2: Homomorphism) -> Homomorphism:
    """``phi1 + phi2`` acting blockwise on ``source1 + source2``."""
    source = phi1.source.direct_sum(phi2.source)
    target = phi1.target.direct_sum(phi2.target)
    top = phi1.matrix.hstack(IntMatrix.zeros(phi1.target.rank, phi2.source.rank))
    bottom = IntMatrix.zeros(phi2.target.rank, phi1.source.rank).hstack(phi2.matrix)
    return Homomorphism(source, target, top.vstack(bottom))


def direct_sum_subgroup(H1: Subgroup, H2: Subgroup) -> Subgroup:
    """``H1 + H2`` inside ``ambient1 + ambient2``."""
    G = H1.ambient.direct_sum(H2.ambient)
    B1, B2 = H1.lattice.basis, H2.lattice.basis
    top = B1.hstack(IntMatrix.zeros(B1.rows, B2.cols))
    bottom = IntMatrix.zeros(B2.rows, B1.cols).hstack(B2)
    return Subgroup(G, Lattice.from_generators(top.vstack(bottom)))
