"""Finitely described infinite groups.

Two families live here:

* ``Z^n`` (``LatticeGroup``) with integer-matrix endomorphisms and full-rank
  sublattices as finite-index subgroups.
* ``K^(I)`` and ``K^I`` (``WindowGroup``) for a finite abelian ``K`` and an
  index set ``I`` that is ``N`` (indices ``0, 1, 2, ...``) or ``Z``. Their
  finite-index subgroups are window subgroups (a condition on finitely many
  coordinates) and the factorial kernel-rule subgroups; their endomorphisms
  are the shifts and, more generally, periodic banded maps.

Coordinate indices are Python ints and may be arbitrarily large.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from entrolab.errors import AmbientMismatch, UnsupportedBandPattern
from entrolab.finab import (
    FinAbGroup,
    GroupElement,
    Homomorphism,
    Subgroup,
    count_endomorphisms,
    image,
    preimage,
    subgroup_from_generators,
    subgroup_intersect,
    subgroup_sum,
    whole,
)
from entrolab.linalg import IntMatrix, Lattice, enumerate_hnf, unimodular_inverse

logger = logging.getLogger(__name__)

INDEX_SETS = ("N", "Z")
FLAVORS = ("direct_sum", "product")


class FactorialTable:
    """Append-only factorial cache shared by all kernel-rule subgroups."""

    def __init__(self):
        self._values = [1]
        self._lock = threading.Lock()

    def _grow_to(self, t: int) -> None:
        with self._lock:
            while len(self._values) <= t:
                self._values.append(self._values[-1] * len(self._values))
        logger.debug("factorial table extended to %d!", t)

    def factorial(self, t: int) -> int:
        if t < 0:
            raise ValueError(f"factorial of negative number {t}")
        if t >= len(self._values):
            self._grow_to(t)
        return self._values[t]

    def floor_index(self, i: int) -> int:
        """Largest ``t`` with ``t! <= i`` (``i >= 1``)."""
        if i < 1:
            raise ValueError(f"no factorial is at most {i}")
        t = 1
        while self.factorial(t + 1) <= i:
            t += 1
        return t


FACTORIALS = FactorialTable()


# --- Z^n ---------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeGroup:
    """``Z^n``; finite-index subgroups are ``linalg.Lattice`` objects."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"lattice rank must be positive, got {self.rank}")

    def whole(self) -> Lattice:
        return Lattice.whole(self.rank)

    def multiple(self, m: int) -> Lattice:
        return Lattice.scaled(self.rank, m)

    def __str__(self) -> str:
        return f"Z^{self.rank}"


@dataclass(frozen=True)
class LatticeEndo:
    group: LatticeGroup
    matrix: IntMatrix

    def __post_init__(self):
        if self.matrix.shape != (self.group.rank, self.group.rank):
            raise AmbientMismatch(f"matrix of shape {self.matrix.shape} on {self.group}")

    @classmethod
    def identity(cls, G: LatticeGroup) -> "LatticeEndo":
        return cls(G, IntMatrix.identity(G.rank))

    @classmethod
    def zero(cls, G: LatticeGroup) -> "LatticeEndo":
        return cls(G, IntMatrix.zeros(G.rank, G.rank))

    @classmethod
    def multiplication(cls, G: LatticeGroup, factor: int) -> "LatticeEndo":
        return cls(G, IntMatrix.identity(G.rank).scaled(factor))

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return self.matrix.apply(v)

    def compose(self, other: "LatticeEndo") -> "LatticeEndo":
        if other.group != self.group:
            raise AmbientMismatch(f"{other.group} and {self.group}")
        return LatticeEndo(self.group, self.matrix @ other.matrix)

    def power(self, k: int) -> "LatticeEndo":
        result = LatticeEndo.identity(self.group)
        for _ in range(k):
            result = self.compose(result)
        return result

    def preimage(self, L: Lattice) -> Lattice:
        return L.preimage(self.matrix)

    def conjugate(self, U: IntMatrix) -> "LatticeEndo":
        """``U A U^{-1}`` for a unimodular change of basis ``U``."""
        return LatticeEndo(self.group, U @ self.matrix @ unimodular_inverse(U))


def enumerate_sublattices(n: int, max_index: int) -> list[Lattice]:
    """All full-rank sublattices of ``Z^n`` with index at most ``max_index``."""
    if max_index < 1:
        raise ValueError(f"max_index must be at least 1, got {max_index}")
    return list(enumerate_hnf(n, max_index))


# --- K^(I) and K^I -----------------------------------------------------------


@dataclass(frozen=True)
class WindowGroup:
    base: FinAbGroup
    index_set: str = "N"
    flavor: str = "direct_sum"

    def __post_init__(self):
        if self.index_set not in INDEX_SETS:
            raise ValueError(f"index set must be one of {INDEX_SETS}, got {self.index_set!r}")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if self.base.order < 2:
            raise ValueError("window groups need a nontrivial base group")

    @property
    def width(self) -> int:
        """Number of ``K`` coordinates per index."""
        return self.base.rank

    def contains_index(self, i: int) -> bool:
        return self.index_set == "Z" or i >= 0

    def clamp(self, i: int) -> int:
        return i if self.index_set == "Z" else max(i, 0)

    def block(self, lo: int, hi: int) -> FinAbGroup:
        """``K^{[lo, hi)}`` as a finite group; index ``p`` occupies coordinates ``(p - lo) * width ...``."""
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi})")
        if lo < hi and not self.contains_index(lo):
            raise ValueError(f"index {lo} is not in {self.index_set}")
        return self.base.power(hi - lo)

    def with_flavor(self, flavor: str) -> "WindowGroup":
        return WindowGroup(self.base, self.index_set, flavor)

    def __str__(self) -> str:
        brackets = "({})" if self.flavor == "direct_sum" else "{}"
        return f"({self.base})^" + brackets.format(self.index_set)


def _coordinate_projection(G: WindowGroup, lo: int, hi: int, sub_lo: int, sub_hi: int) -> Homomorphism:
    """Restriction ``K^{[lo, hi)} -> K^{[sub_lo, sub_hi)}`` for a sub-interval."""
    r = G.width
    source, target = G.block(lo, hi), G.block(sub_lo, sub_hi)
    rows = []
    for t in range(target.rank):
        row = [0] * source.rank
        row[(sub_lo - lo) * r + t] = 1
        rows.append(row)
    return Homomorphism(source, target, IntMatrix.from_rows(rows, cols=source.rank))


def _coordinate_embedding(G: WindowGroup, lo: int, hi: int, big_lo: int, big_hi: int) -> Homomorphism:
    """Zero-padding ``K^{[lo, hi)} -> K^{[big_lo, big_hi)}``."""
    return Homomorphism(
        G.block(lo, hi),
        G.block(big_lo, big_hi),
        _coordinate_projection(G, big_lo, big_hi, lo, hi).matrix.transpose(),
    )


def _block_permutation(G: WindowGroup, lo: int, hi: int, new_lo: int, order: Sequence[int]) -> Homomorphism:
    """Move the block at offset ``k`` of ``[lo, hi)`` to offset ``order[k]`` of ``[new_lo, new_lo + hi - lo)``."""
    r = G.width
    length = hi - lo
    source, target = G.block(lo, hi), G.block(new_lo, new_lo + length)
    rows = [[0] * source.rank for _ in range(target.rank)]
    for k, k_new in enumerate(order):
        for c in range(r):
            rows[k_new * r + c][k * r + c] = 1
    return Homomorphism(source, target, IntMatrix.from_rows(rows, cols=source.rank))


def _blockwise(G: WindowGroup, lo: int, hi: int, alpha: Homomorphism) -> Homomorphism:
    """``alpha`` applied at every index of ``[lo, hi)``."""
    r = G.width
    B = G.block(lo, hi)
    rows = [[0] * B.rank for _ in range(B.rank)]
    for k in range(hi - lo):
        for a in range(r):
            for b in range(r):
                rows[k * r + a][k * r + b] = alpha.matrix[a, b]
    return Homomorphism(B, B, IntMatrix.from_rows(rows, cols=B.rank))


Value = Union[int, Sequence[int]]


@dataclass(frozen=True)
class SparseElement:
    """Finitely supported element of ``K^(I)``, stored as sorted ``(index, value)`` pairs."""

    ambient: WindowGroup
    entries: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        G = self.ambient
        if G.flavor != "direct_sum":
            raise AmbientMismatch("sparse elements live in direct sums only")
        previous = None
        for i, value in self.entries:
            if previous is not None and i <= previous:
                raise ValueError("sparse entries must be sorted by strictly increasing index")
            if not G.contains_index(i):
                raise ValueError(f"index {i} is not in {G.index_set}")
            GroupElement(G.base, value)
            if not any(value):
                raise ValueError(f"zero value stored at index {i}")
            previous = i

    @classmethod
    def from_mapping(cls, G: WindowGroup, mapping: Mapping[int, Value]) -> "SparseElement":
        entries = []
        for i in sorted(mapping):
            raw = mapping[i]
            coords = (raw,) if isinstance(raw, int) else tuple(raw)
            value = G.base.element(coords).coords
            if any(value):
                entries.append((int(i), value))
        return cls(G, tuple(entries))

    @classmethod
    def zero(cls, G: WindowGroup) -> "SparseElement":
        return cls(G, ())

    @classmethod
    def unit(cls, G: WindowGroup, i: int, value: Value = 1) -> "SparseElement":
        """``value`` placed at index ``i`` (``e_i`` by default)."""
        return cls.from_mapping(G, {i: value})

    @classmethod
    def from_block(cls, G: WindowGroup, lo: int, x: GroupElement) -> "SparseElement":
        r = G.width
        length = x.ambient.rank // r if r else 0
        return cls.from_mapping(G, {lo + k: x.coords[k * r:(k + 1) * r] for k in range(length)})

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.entries)

    def at(self, i: int) -> tuple[int, ...]:
        return self.as_dict().get(i, (0,) * self.ambient.width)

    def is_zero(self) -> bool:
        return not self.entries

    def restrict(self, lo: int, hi: int) -> GroupElement:
        """The coordinates at indices ``[lo, hi)`` as an element of ``K^{[lo, hi)}``."""
        values = self.as_dict()
        coords: list[int] = []
        zero = (0,) * self.ambient.width
        for p in range(lo, hi):
            coords.extend(values.get(p, zero))
        return self.ambient.block(lo, hi).element(coords)

    def _combine(self, other: "SparseElement", sign: int) -> "SparseElement":
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"elements of {self.ambient} and {other.ambient}")
        total = {i: list(v) for i, v in self.entries}
        zero = [0] * self.ambient.width
        for i, v in other.entries:
            current = total.get(i, zero)
            total[i] = [a + sign * b for a, b in zip(current, v)]
        return SparseElement.from_mapping(self.ambient, total)

    def __add__(self, other: "SparseElement") -> "SparseElement":
        return self._combine(other, 1)

    def __sub__(self, other: "SparseElement") -> "SparseElement":
        return self._combine(other, -1)

    def __neg__(self) -> "SparseElement":
        return SparseElement.from_mapping(self.ambient, {i: [-a for a in v] for i, v in self.entries})

    def __mul__(self, k: int) -> "SparseElement":
        return SparseElement.from_mapping(self.ambient, {i: [k * a for a in v] for i, v in self.entries})

    __rmul__ = __mul__


def _hull(*windows: tuple[int, int]) -> tuple[int, int]:
    nonempty = [w for w in windows if w[0] < w[1]]
    if not nonempty:
        return (0, 0)
    return min(w[0] for w in nonempty), max(w[1] for w in nonempty)


def _contains_block(S: Subgroup, offset: int, width: int) -> bool:
    G = S.ambient
    return all(S.contains(G.unit(offset * width + c)) for c in range(width))


def _vanishes_on_block(S: Subgroup, offset: int, width: int) -> bool:
    return all(not any(g.coords[offset * width:(offset + 1) * width]) for g in S.generators())


@dataclass(frozen=True)
class WindowSubgroup:
    """``{x : x restricted to [lo, hi) lies in section}``.

    Always kept in canonical form: no edge index of the window is free, and
    the empty window is ``[0, 0)``. Build instances through ``create``.
    """

    ambient: WindowGroup
    lo: int
    hi: int
    section: Subgroup = field(repr=False)

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"window [{self.lo}, {self.hi}) is reversed")
        if self.section.ambient != self.ambient.block(self.lo, self.hi):
            raise AmbientMismatch("section does not live on the window")

    @classmethod
    def create(cls, G: WindowGroup, lo: int, hi: int, section: Subgroup) -> "WindowSubgroup":
        r = G.width
        S = section
        if S.ambient != G.block(lo, hi):
            raise AmbientMismatch(f"section lives in {S.ambient}, window [{lo}, {hi}) needs {G.block(lo, hi)}")
        while lo < hi and _contains_block(S, 0, r):
            S = image(_coordinate_projection(G, lo, hi, lo + 1, hi), S)
            lo += 1
        while lo < hi and _contains_block(S, hi - lo - 1, r):
            S = image(_coordinate_projection(G, lo, hi, lo, hi - 1), S)
            hi -= 1
        if lo == hi:
            lo = hi = 0
            S = whole(G.block(0, 0))
        return cls(G, lo, hi, S)

    @classmethod
    def whole(cls, G: WindowGroup) -> "WindowSubgroup":
        return cls(G, 0, 0, whole(G.block(0, 0)))

    @classmethod
    def zero_window(cls, G: WindowGroup, lo: int, hi: int) -> "WindowSubgroup":
        """``{x : x vanishes on [lo, hi)}``."""
        B = G.block(lo, hi)
        return cls.create(G, lo, hi, subgroup_from_generators(B, []))

    @classmethod
    def from_generators(cls, G: WindowGroup, lo: int, hi: int, generators: Sequence[Sequence[int]]) -> "WindowSubgroup":
        B = G.block(lo, hi)
        return cls.create(G, lo, hi, subgroup_from_generators(B, [B.element(g) for g in generators]))

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def length(self) -> int:
        return self.hi - self.lo

    @property
    def index(self) -> int:
        return self.section.index

    def contains(self, x: SparseElement) -> bool:
        if x.ambient.base != self.ambient.base or x.ambient.index_set != self.ambient.index_set:
            raise AmbientMismatch(f"element of {x.ambient} tested against a subgroup of {self.ambient}")
        return self.section.contains(x.restrict(self.lo, self.hi))

    def __contains__(self, x: SparseElement) -> bool:
        return self.contains(x)

    def extend(self, lo: int, hi: int) -> Subgroup:
        """The same subgroup described on a larger window, as a subgroup of ``K^{[lo, hi)}``."""
        if self.lo < self.hi and (lo > self.lo or hi < self.hi):
            raise ValueError(f"[{lo}, {hi}) does not contain the window [{self.lo}, {self.hi})")
        G = self.ambient
        B = G.block(lo, hi)
        if self.lo == self.hi:
            return whole(B)
        return preimage(_coordinate_projection(G, lo, hi, self.lo, self.hi), self.section)

    def projection(self, lo: int, hi: int) -> Subgroup:
        """Image of the subgroup in ``K^{[lo, hi)}``."""
        G = self.ambient
        big_lo, big_hi = _hull((self.lo, self.hi), (lo, hi))
        return image(_coordinate_projection(G, big_lo, big_hi, lo, hi), self.extend(big_lo, big_hi))

    def _check(self, other: "WindowSubgroup") -> None:
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"window subgroups of {self.ambient} and {other.ambient}")

    def intersect(self, other: "WindowSubgroup") -> "WindowSubgroup":
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return WindowSubgroup.create(self.ambient, lo, hi, subgroup_intersect(self.extend(lo, hi), other.extend(lo, hi)))

    def sum(self, other: "WindowSubgroup") -> "WindowSubgroup":
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return WindowSubgroup.create(self.ambient, lo, hi, subgroup_sum(self.extend(lo, hi), other.extend(lo, hi)))

    def is_subset(self, other: "WindowSubgroup") -> bool:
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return self.extend(lo, hi).is_subset(other.extend(lo, hi))

    def translate(self, t: int) -> "WindowSubgroup":
        if self.lo == self.hi:
            return self
        if not self.ambient.contains_index(self.lo + t):
            raise ValueError(f"translation by {t} leaves the index set")
        section = Subgroup(self.ambient.block(self.lo + t, self.hi + t), self.section.lattice)
        return WindowSubgroup(self.ambient, self.lo + t, self.hi + t, section)

    def reflect(self) -> "WindowSubgroup":
        """Image under the relabelling ``i -> -i`` of a ``Z``-indexed group."""
        if self.ambient.index_set != "Z":
            raise ValueError("reflection needs the index set Z")
        if self.lo == self.hi:
            return self
        length = self.length
        flip = _block_permutation(self.ambient, self.lo, self.hi, 1 - self.hi, [length - 1 - k for k in range(length)])
        return WindowSubgroup.create(self.ambient, 1 - self.hi, 1 - self.lo, image(flip, self.section))

    def map_blocks(self, alpha: Homomorphism) -> "WindowSubgroup":
        """Image under the automorphism ``alpha`` of ``K`` applied at every index."""
        if self.lo == self.hi:
            return self
        return WindowSubgroup.create(
            self.ambient, self.lo, self.hi, image(_blockwise(self.ambient, self.lo, self.hi, alpha), self.section)
        )

    def coset_key(self, x: SparseElement) -> tuple[int, ...]:
        return self.section.coset_key(x.restrict(self.lo, self.hi))

    def __str__(self) -> str:
        return f"window [{self.lo}, {self.hi}) index {self.index} in {self.ambient}"


def base_subgroup(G: WindowGroup, m: int) -> WindowSubgroup:
    """``N_m``: the subgroup vanishing on ``[0, m)`` (on ``[-m, m)`` for ``Z``)."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if m == 0:
        return WindowSubgroup.whole(G)
    lo = 0 if G.index_set == "N" else -m
    return WindowSubgroup.zero_window(G, lo, m)


@dataclass(frozen=True)
class SupportedSubgroup:
    """Finite subgroup of ``K^(I)`` made of elements supported on ``[lo, hi)``.

    Kept canonical: the section never vanishes identically on an edge index,
    and the trivial subgroup sits on ``[0, 0)``. Build instances through ``create``.
    """

    ambient: WindowGroup
    lo: int
    hi: int
    section: Subgroup = field(repr=False)

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"window [{self.lo}, {self.hi}) is reversed")
        if self.section.ambient != self.ambient.block(self.lo, self.hi):
            raise AmbientMismatch("section does not live on the window")

    @classmethod
    def create(cls, G: WindowGroup, lo: int, hi: int, section: Subgroup) -> "SupportedSubgroup":
        r = G.width
        S = section
        if S.ambient != G.block(lo, hi):
            raise AmbientMismatch(f"section lives in {S.ambient}, window [{lo}, {hi}) needs {G.block(lo, hi)}")
        while lo < hi and _vanishes_on_block(S, 0, r):
            S = image(_coordinate_projection(G, lo, hi, lo + 1, hi), S)
            lo += 1
        while lo < hi and _vanishes_on_block(S, hi - lo - 1, r):
            S = image(_coordinate_projection(G, lo, hi, lo, hi - 1), S)
            hi -= 1
        if lo == hi:
            lo = hi = 0
            S = whole(G.block(0, 0))
        return cls(G, lo, hi, S)

    @classmethod
    def trivial(cls, G: WindowGroup) -> "SupportedSubgroup":
        return cls(G, 0, 0, whole(G.block(0, 0)))

    @classmethod
    def full(cls, G: WindowGroup, lo: int, hi: int) -> "SupportedSubgroup":
        """``K^{[lo, hi)}`` inside ``K^(I)``."""
        return cls.create(G, lo, hi, whole(G.block(lo, hi)))

    @classmethod
    def at(cls, G: WindowGroup, i: int) -> "SupportedSubgroup":
        """``K`` at the single index ``i``."""
        return cls.full(G, i, i + 1)

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def order(self) -> int:
        return self.section.order

    def extend(self, lo: int, hi: int) -> Subgroup:
        """The same subgroup as a subgroup of ``K^{[lo, hi)}`` (zero outside the old window)."""
        G = self.ambient
        B = G.block(lo, hi)
        if self.lo == self.hi:
            return subgroup_from_generators(B, [])
        if lo > self.lo or hi < self.hi:
            raise ValueError(f"[{lo}, {hi}) does not contain the window [{self.lo}, {self.hi})")
        return image(_coordinate_embedding(G, self.lo, self.hi, lo, hi), self.section)

    def slice(self, lo: int, hi: int) -> Subgroup:
        """Elements supported on ``[lo, hi)``, as a subgroup of ``K^{[lo, hi)}``."""
        G = self.ambient
        big_lo, big_hi = _hull((self.lo, self.hi), (lo, hi))
        return preimage(_coordinate_embedding(G, lo, hi, big_lo, big_hi), self.extend(big_lo, big_hi))

    def contains(self, x: SparseElement) -> bool:
        if any(not self.lo <= i < self.hi for i in x.support):
            return False
        return self.section.contains(x.restrict(self.lo, self.hi))

    def __contains__(self, x: SparseElement) -> bool:
        return self.contains(x)

    def _check(self, other: "SupportedSubgroup") -> None:
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"supported subgroups of {self.ambient} and {other.ambient}")

    def sum(self, other: "SupportedSubgroup") -> "SupportedSubgroup":
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return SupportedSubgroup.create(self.ambient, lo, hi, subgroup_sum(self.extend(lo, hi), other.extend(lo, hi)))

    def intersect(self, other: "SupportedSubgroup") -> "SupportedSubgroup":
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return SupportedSubgroup.create(
            self.ambient, lo, hi, subgroup_intersect(self.extend(lo, hi), other.extend(lo, hi))
        )

    def is_subset(self, other: "SupportedSubgroup") -> bool:
        self._check(other)
        lo, hi = _hull(self.window, other.window)
        return self.extend(lo, hi).is_subset(other.extend(lo, hi))

    def __str__(self) -> str:
        return f"supported on [{self.lo}, {self.hi}) order {self.order} in {self.ambient}"


@dataclass(frozen=True)
class KernelRuleSubgroup:
    """Kernel of ``h : K^(I) -> K^m`` for the factorial position rule.

    ``h`` sends ``K`` at index ``i`` to slot ``i`` for the head ``1 <= i <= m``,
    to slot ``j`` when ``i = (m*n + j - 1)! + sign * n`` for some ``n >= 1``
    and ``i > m``, and to zero otherwise. ``exceptions`` overrides the slots
    of finitely many indices (an empty slot tuple means zero).
    """

    ambient: WindowGroup
    m: int
    sign: int = 1
    exceptions: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        if self.ambient.flavor != "direct_sum":
            raise AmbientMismatch("kernel-rule subgroups live in direct sums")
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        for i, slots in self.exceptions:
            if any(not 1 <= j <= self.m for j in slots):
                raise ValueError(f"exception at index {i} names a slot outside 1..{self.m}")

    @property
    def target(self) -> FinAbGroup:
        return self.ambient.base.power(self.m)

    @property
    def index(self) -> int:
        # every slot is hit by infinitely many rule positions
        return self.ambient.base.order ** self.m

    def position(self, n: int, j: int) -> int:
        """Index of the ``j``-th rule position of step ``n``."""
        return FACTORIALS.factorial(self.m * n + j - 1) + self.sign * n

    def witness_position(self, n: int, j: int) -> int:
        """``(m*n + j - 1)!``."""
        return FACTORIALS.factorial(self.m * n + j - 1)

    def slots(self, i: int) -> tuple[int, ...]:
        for index, slots in self.exceptions:
            if index == i:
                return slots
        if 1 <= i <= self.m:
            return (i,)
        if i <= self.m:
            return ()
        t0 = FACTORIALS.floor_index(i)
        found = []
        for t in range(max(1, t0 - 1), t0 + 2):
            n = self.sign * (i - FACTORIALS.factorial(t))
            if n < 1:
                continue
            j = t - self.m * n + 1
            if 1 <= j <= self.m:
                found.append(j)
        return tuple(found)

    def evaluate(self, x: SparseElement) -> GroupElement:
        """``h(x)`` in ``K^m``."""
        if x.ambient != self.ambient:
            raise AmbientMismatch(f"element of {x.ambient}, subgroup of {self.ambient}")
        r = self.ambient.width
        coords = [0] * (r * self.m)
        for i, value in x.entries:
            for j in self.slots(i):
                for c in range(r):
                    coords[(j - 1) * r + c] += value[c]
        return self.target.element(coords)

    def contains(self, x: SparseElement) -> bool:
        return self.evaluate(x).is_zero()

    def __contains__(self, x: SparseElement) -> bool:
        return self.contains(x)


def membership_kernel_rule(N: KernelRuleSubgroup, x: SparseElement) -> bool:
    return N.contains(x)


# --- banded endomorphisms ----------------------------------------------------


@dataclass(frozen=True)
class BandedTerm:
    """``K`` at index ``j`` contributes ``coefficient`` to index ``j + offset + displacement``."""

    displacement: int
    coefficient: Homomorphism


KINDS = ("identity", "zero", "right_shift", "left_shift", "two_sided_shift", "two_sided_inverse", "banded")


@dataclass(frozen=True)
class BandedEndo:
    """Periodic banded endomorphism of ``K^(I)`` or ``K^I``.

    ``phi(e_j (x) k) = sum over terms of phase j mod period of
    e_{j + offset + d} (x) c(k)``; targets outside the index set are dropped.
    """

    ambient: WindowGroup
    offset: int
    pattern: tuple[tuple[BandedTerm, ...], ...]
    kind: str = "banded"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedBandPattern(f"unknown kind {self.kind!r}")
        if not self.pattern:
            raise UnsupportedBandPattern("a banded map needs at least one phase")
        K = self.ambient.base
        phases = []
        for phase in self.pattern:
            by_displacement: dict[int, Homomorphism] = {}
            for term in phase:
                c = term.coefficient
                if c.source != K or c.target != K:
                    raise UnsupportedBandPattern(f"coefficient maps {c.source} -> {c.target}, expected {K} -> {K}")
                if term.displacement in by_displacement:
                    raise UnsupportedBandPattern(f"displacement {term.displacement} repeated within a phase")
                by_displacement[term.displacement] = c
            phases.append(
                tuple(BandedTerm(d, c) for d, c in sorted(by_displacement.items()) if not c.is_zero())
            )
        object.__setattr__(self, "pattern", tuple(phases))

    @property
    def period(self) -> int:
        return len(self.pattern)

    @property
    def radius(self) -> int:
        return max((abs(t.displacement) for phase in self.pattern for t in phase), default=0)

    def terms(self, i: int) -> tuple[BandedTerm, ...]:
        return self.pattern[i % self.period]

    def reach(self) -> Optional[tuple[int, int]]:
        """``(min, max)`` of the index moves ``offset + d``; None for the zero map."""
        moves = [self.offset + t.displacement for phase in self.pattern for t in phase]
        if not moves:
            return None
        return min(moves), max(moves)

    def _identity_terms(self) -> bool:
        K = self.ambient.base
        identity = Homomorphism.identity(K)
        return all(len(phase) == 1 and phase[0].displacement == 0 and phase[0].coefficient == identity for phase in self.pattern)

    def preimage_translation(self) -> Optional[int]:
        """``u`` with ``phi^{-1}(W, S) = (W + u, S)`` for every window subgroup, if there is one."""
        if not self._identity_terms() or self.offset == 0:
            return None
        if self.ambient.index_set == "N" and self.offset > 0:
            return None
        return -self.offset

    def image_translation(self) -> Optional[int]:
        """``u`` with ``phi(e_i (x) k) = e_{i+u} (x) k`` for every index, if there is one."""
        if not self._identity_terms() or self.offset == 0:
            return None
        if self.ambient.index_set == "N" and self.offset < 0:
            return None
        return self.offset

    def apply(self, x: SparseElement) -> SparseElement:
        G = self.ambient
        if x.ambient.base != G.base or x.ambient.index_set != G.index_set:
            raise AmbientMismatch(f"element of {x.ambient}, endomorphism of {G}")
        total: dict[int, list[int]] = {}
        K = G.base
        for i, value in x.entries:
            k = GroupElement(K, value)
            for term in self.terms(i):
                q = i + self.offset + term.displacement
                if not G.contains_index(q):
                    continue
                contribution = term.coefficient(k).coords
                current = total.setdefault(q, [0] * K.rank)
                for c, v in enumerate(contribution):
                    current[c] += v
        return SparseElement.from_mapping(x.ambient, total)

    def image_window(self, lo: int, hi: int) -> tuple[int, int]:
        """Smallest window containing the image of everything supported on ``[lo, hi)``."""
        reach = self.reach()
        if reach is None or lo == hi:
            return (0, 0)
        G = self.ambient
        out_lo, out_hi = G.clamp(lo + reach[0]), G.clamp(hi + reach[1])
        return (out_lo, out_hi) if out_lo < out_hi else (0, 0)

    def local_map(self, lo: int, hi: int, out_lo: int, out_hi: int) -> Homomorphism:
        """``x -> phi(x)`` restricted to ``[out_lo, out_hi)``, for ``x`` supported on ``[lo, hi)``."""
        G = self.ambient
        r = G.width
        source, target = G.block(lo, hi), G.block(out_lo, out_hi)
        rows = [[0] * source.rank for _ in range(target.rank)]
        for p in range(lo, hi):
            for term in self.terms(p):
                q = p + self.offset + term.displacement
                if not out_lo <= q < out_hi:
                    continue
                A = term.coefficient.matrix
                for a in range(r):
                    for b in range(r):
                        rows[(q - out_lo) * r + a][(p - lo) * r + b] += A[a, b]
        return Homomorphism(source, target, IntMatrix.from_rows(rows, cols=source.rank))

    def __str__(self) -> str:
        if self.kind != "banded":
            return f"{self.kind} on {self.ambient}"
        return f"banded map (offset {self.offset}, radius {self.radius}, period {self.period}) on {self.ambient}"


def _single_term(G: WindowGroup, offset: int, kind: str) -> BandedEndo:
    return BandedEndo(G, offset, ((BandedTerm(0, Homomorphism.identity(G.base)),),), kind)


def identity_endo(G: WindowGroup) -> BandedEndo:
    return _single_term(G, 0, "identity")


def zero_endo(G: WindowGroup) -> BandedEndo:
    return BandedEndo(G, 0, ((),), "zero")


def right_shift(G: WindowGroup) -> BandedEndo:
    """``(x_0, x_1, ...) -> (0, x_0, x_1, ...)``."""
    if G.index_set != "N":
        raise ValueError("the right shift acts on N-indexed groups")
    return _single_term(G, 1, "right_shift")


def left_shift(G: WindowGroup) -> BandedEndo:
    """``(x_0, x_1, ...) -> (x_1, x_2, ...)``."""
    if G.index_set != "N":
        raise ValueError("the left shift acts on N-indexed groups")
    return _single_term(G, -1, "left_shift")


def two_sided_shift(G: WindowGroup) -> BandedEndo:
    """``(x_n) -> (x_{n-1})``."""
    if G.index_set != "Z":
        raise ValueError("the two-sided shift acts on Z-indexed groups")
    return _single_term(G, 1, "two_sided_shift")


def two_sided_inverse(G: WindowGroup) -> BandedEndo:
    if G.index_set != "Z":
        raise ValueError("the two-sided shift acts on Z-indexed groups")
    return _single_term(G, -1, "two_sided_inverse")


def banded(G: WindowGroup, offset: int, pattern: Sequence[Sequence[tuple[int, Homomorphism]]]) -> BandedEndo:
    """Banded map from phases given as ``(displacement, coefficient)`` lists."""
    return BandedEndo(G, offset, tuple(tuple(BandedTerm(d, c) for d, c in phase) for phase in pattern))


def inverse(phi: BandedEndo) -> BandedEndo:
    """Inverse of an automorphism given by a pure translation of a ``Z``-indexed group."""
    if phi.ambient.index_set != "Z" or phi.preimage_translation() is None:
        raise UnsupportedBandPattern(f"{phi} is not an invertible translation")
    if phi.kind == "two_sided_shift":
        return two_sided_inverse(phi.ambient)
    if phi.kind == "two_sided_inverse":
        return two_sided_shift(phi.ambient)
    return _single_term(phi.ambient, -phi.offset, "banded")


def apply_endo(phi: BandedEndo, x: SparseElement) -> SparseElement:
    return phi.apply(x)


def preimage_window(phi: BandedEndo, N: WindowSubgroup) -> WindowSubgroup:
    """``phi^{-1}(N)``; the window grows by at most ``|offset| + radius`` on each side."""
    G = phi.ambient
    if N.ambient != G:
        raise AmbientMismatch(f"subgroup of {N.ambient}, endomorphism of {G}")
    reach = phi.reach()
    if N.lo == N.hi or reach is None:
        return WindowSubgroup.whole(G)
    lo, hi = G.clamp(N.lo - reach[1]), G.clamp(N.hi - reach[0])
    if lo >= hi:
        return WindowSubgroup.whole(G)
    local = phi.local_map(lo, hi, N.lo, N.hi)
    return WindowSubgroup.create(G, lo, hi, preimage(local, N.section))


def image_supported(phi: BandedEndo, F: SupportedSubgroup) -> SupportedSubgroup:
    """``phi(F)`` for a finite subgroup supported on a window."""
    G = phi.ambient
    if F.ambient != G:
        raise AmbientMismatch(f"subgroup of {F.ambient}, endomorphism of {G}")
    out_lo, out_hi = phi.image_window(F.lo, F.hi)
    if out_lo == out_hi:
        return SupportedSubgroup.trivial(G)
    local = phi.local_map(F.lo, F.hi, out_lo, out_hi)
    return SupportedSubgroup.create(G, out_lo, out_hi, image(local, F.section))


def _monotone(phi: BandedEndo, sign: int) -> bool:
    reach = phi.reach()
    return reach is None or (reach[0] >= 0 if sign > 0 else reach[1] <= 0)


def compose(phi: BandedEndo, psi: BandedEndo) -> BandedEndo:
    """``phi o psi``.

    On ``N`` an index dropped by ``psi`` must stay dropped under ``phi``, which
    holds when ``psi`` never moves indices down, or both never move indices up.
    """
    G = phi.ambient
    if psi.ambient != G:
        raise AmbientMismatch(f"{psi.ambient} and {G}")
    if G.index_set == "N" and not (_monotone(psi, 1) or (_monotone(psi, -1) and _monotone(phi, -1))):
        raise UnsupportedBandPattern("composition would need indices below 0 as intermediate values")
    period = math.lcm(phi.period, psi.period)
    phases = []
    for q in range(period):
        collected: dict[int, Homomorphism] = {}
        for inner in psi.terms(q):
            middle = q + psi.offset + inner.displacement
            for outer in phi.terms(middle):
                d = inner.displacement + outer.displacement
                c = outer.coefficient.compose(inner.coefficient)
                collected[d] = collected[d] + c if d in collected else c
        phases.append(tuple(BandedTerm(d, c) for d, c in collected.items()))
    return BandedEndo(G, phi.offset + psi.offset, tuple(phases))


def power(phi: BandedEndo, k: int) -> BandedEndo:
    if k < 0:
        raise ValueError(f"negative power {k}")
    if k == 0:
        return identity_endo(phi.ambient)
    if k == 1:
        return phi
    result = phi
    for _ in range(k - 1):
        result = compose(phi, result)
    return result


def translate_endo(phi: BandedEndo, t: int) -> BandedEndo:
    """``sigma_t o phi o sigma_{-t}`` for the index translation ``sigma_t`` of a ``Z``-indexed group."""
    if phi.ambient.index_set != "Z":
        raise ValueError("index translations are automorphisms only for Z")
    P = phi.period
    phases = tuple(phi.pattern[(q - t) % P] for q in range(P))
    return BandedEndo(phi.ambient, phi.offset, phases, phi.kind)


_REFLECTED_KIND = {"two_sided_shift": "two_sided_inverse", "two_sided_inverse": "two_sided_shift"}


def reflect_endo(phi: BandedEndo) -> BandedEndo:
    """``rho o phi o rho`` for the reflection ``rho : i -> -i`` of a ``Z``-indexed group."""
    if phi.ambient.index_set != "Z":
        raise ValueError("reflection needs the index set Z")
    P = phi.period
    phases = tuple(
        tuple(BandedTerm(-term.displacement, term.coefficient) for term in phi.pattern[(-q) % P]) for q in range(P)
    )
    return BandedEndo(phi.ambient, -phi.offset, phases, _REFLECTED_KIND.get(phi.kind, phi.kind))


def automorphism_inverse(alpha: Homomorphism) -> Homomorphism:
    """Inverse of an automorphism of a finite group, as a power of it."""
    if not alpha.is_endomorphism:
        raise AmbientMismatch("automorphisms are endomorphisms")
    identity = Homomorphism.identity(alpha.source)
    current = alpha
    previous = identity
    for _ in range(count_endomorphisms(alpha.source)):
        if current == identity:
            return previous
        previous, current = current, alpha.compose(current)
    raise ValueError("homomorphism is not an automorphism")


def relabel_endo(phi: BandedEndo, alpha: Homomorphism) -> BandedEndo:
    """``xi o phi o xi^{-1}`` where ``xi`` applies the automorphism ``alpha`` of ``K`` at every index."""
    alpha_inv = automorphism_inverse(alpha)
    phases = tuple(
        tuple(BandedTerm(t.displacement, alpha.compose(t.coefficient).compose(alpha_inv)) for t in phase)
        for phase in phi.pattern
    )
    return BandedEndo(phi.ambient, phi.offset, phases, phi.kind)


def _embed_coefficient(c: Homomorphism, K: FinAbGroup, start: int) -> Homomorphism:
    rows = [[0] * K.rank for _ in range(K.rank)]
    for a in range(c.target.rank):
        for b in range(c.source.rank):
            rows[start + a][start + b] = c.matrix[a, b]
    return Homomorphism(K, K, IntMatrix.from_rows(rows, cols=K.rank))


def product_group(G1: WindowGroup, G2: WindowGroup) -> WindowGroup:
    """``G1 x G2`` with interleaved coordinates, i.e. ``(K1 + K2)^(I)``."""
    if G1.index_set != G2.index_set or G1.flavor != G2.flavor:
        raise AmbientMismatch(f"cannot interleave {G1} and {G2}")
    return WindowGroup(G1.base.direct_sum(G2.base), G1.index_set, G1.flavor)


def product_endo(phi1: BandedEndo, phi2: BandedEndo) -> BandedEndo:
    """``phi1 x phi2`` on the interleaved product carrier."""
    G = product_group(phi1.ambient, phi2.ambient)
    K = G.base
    period = math.lcm(phi1.period, phi2.period)
    phases = []
    for q in range(period):
        collected: dict[int, Homomorphism] = {}
        for phi, start in ((phi1, 0), (phi2, phi1.ambient.width)):
            for term in phi.terms(q):
                d = phi.offset + term.displacement
                c = _embed_coefficient(term.coefficient, K, start)
                collected[d] = collected[d] + c if d in collected else c
        phases.append(tuple(BandedTerm(d, c) for d, c in collected.items()))
    return BandedEndo(G, 0, tuple(phases))


def product_subgroup(N1: WindowSubgroup, N2: WindowSubgroup) -> WindowSubgroup:
    """``N1 x N2`` inside the interleaved product carrier."""
    G = product_group(N1.ambient, N2.ambient)
    lo, hi = _hull(N1.window, N2.window)
    if lo == hi:
        return WindowSubgroup.whole(G)
    S1, S2 = N1.extend(lo, hi), N2.extend(lo, hi)
    r1, r2 = N1.ambient.width, N2.ambient.width
    B = G.block(lo, hi)
    generators = []
    for g in S1.generators():
        coords = [0] * B.rank
        for k in range(hi - lo):
            coords[k * (r1 + r2):k * (r1 + r2) + r1] = g.coords[k * r1:(k + 1) * r1]
        generators.append(B.element(coords))
    for g in S2.generators():
        coords = [0] * B.rank
        for k in range(hi - lo):
            coords[k * (r1 + r2) + r1:(k + 1) * (r1 + r2)] = g.coords[k * r2:(k + 1) * r2]
        generators.append(B.element(coords))
    return WindowSubgroup.create(G, lo, hi, subgroup_from_generators(B, generators))


def truncation(G: WindowGroup, lo: int, hi: int) -> FinAbGroup:
    """``K^{[lo, hi)}`` as a finite group."""
    return G.block(G.clamp(lo), G.clamp(hi))


def truncated_endo(phi: BandedEndo, lo: int, hi: int) -> Homomorphism:
    """``phi`` on ``K^{[lo, hi)}`` with every coordinate that leaves the interval dropped."""
    return phi.local_map(lo, hi, lo, hi)
