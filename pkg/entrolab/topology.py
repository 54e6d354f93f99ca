"""Linear totally bounded topologies, represented by their open finite-index subgroups.

A ``TopologyBase`` is a restartable producer of finite-index subgroups of a
carrier that is downward cofinal among the open finite-index subgroups of the
topology it stands for. Every entropy computed here depends only on that
family, so the Bohr and linear modifications of a topology are never built:
they share the family with the topology itself.

Carriers and the subgroup objects that go with them:

=================  ===============================
carrier            base members
=================  ===============================
``FinAbGroup``     ``finab.Subgroup``
``LatticeGroup``   ``linalg.Lattice``
``WindowGroup``    ``window.WindowSubgroup``
=================  ===============================
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Callable, Iterator, Optional, Sequence, Union

from entrolab.config import Budget
from entrolab.errors import AmbientMismatch, NoStabilization
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    QuotientMap,
    Subgroup,
    direct_sum_subgroup,
    enumerate_subgroups,
    image,
    multiple_subgroup,
    preimage,
    quotient_map,
    subgroup_intersect,
    subgroup_sum,
    whole,
)
from entrolab.linalg import IntMatrix, Lattice
from entrolab.window import (
    BandedEndo,
    LatticeEndo,
    LatticeGroup,
    WindowGroup,
    WindowSubgroup,
    base_subgroup,
    enumerate_sublattices,
    preimage_window,
    product_group,
    product_subgroup,
)

logger = logging.getLogger(__name__)

Carrier = Union[FinAbGroup, LatticeGroup, WindowGroup]
Member = Union[Subgroup, Lattice, WindowSubgroup]
Endomorphism = Union[Homomorphism, LatticeEndo, BandedEndo]

BASE_KINDS = ("profinite", "natural", "product", "discrete", "explicit", "quotient", "product_of")


# --- operations on base members ----------------------------------------------


@singledispatch
def preimage_of(N: Any, phi: Endomorphism) -> Member:
    """``phi^{-1}(N)`` for a base member ``N``."""
    raise TypeError(f"no preimage rule for {type(N).__name__}")


@preimage_of.register
def _(N: Subgroup, phi: Homomorphism) -> Subgroup:
    return preimage(phi, N)


@preimage_of.register
def _(N: Lattice, phi: LatticeEndo) -> Lattice:
    return phi.preimage(N)


@preimage_of.register
def _(N: WindowSubgroup, phi: BandedEndo) -> WindowSubgroup:
    return preimage_window(phi, N)


@singledispatch
def intersect(A: Any, B: Member) -> Member:
    raise TypeError(f"no intersection rule for {type(A).__name__}")


@intersect.register
def _(A: Subgroup, B: Subgroup) -> Subgroup:
    return subgroup_intersect(A, B)


@intersect.register
def _(A: Lattice, B: Lattice) -> Lattice:
    return A.intersect(B)


@intersect.register
def _(A: WindowSubgroup, B: WindowSubgroup) -> WindowSubgroup:
    return A.intersect(B)


@singledispatch
def index_of(N: Any) -> int:
    """Index of a base member in its carrier."""
    raise TypeError(f"no index rule for {type(N).__name__}")


@index_of.register
def _(N: Subgroup) -> int:
    return N.index


@index_of.register
def _(N: Lattice) -> int:
    return N.index


@index_of.register
def _(N: WindowSubgroup) -> int:
    return N.index


@singledispatch
def is_subset_of(A: Any, B: Member) -> bool:
    raise TypeError(f"no inclusion rule for {type(A).__name__}")


@is_subset_of.register
def _(A: Subgroup, B: Subgroup) -> bool:
    return A.is_subset(B)


@is_subset_of.register
def _(A: Lattice, B: Lattice) -> bool:
    return A.is_subset(B)


@is_subset_of.register
def _(A: WindowSubgroup, B: WindowSubgroup) -> bool:
    return A.is_subset(B)


def whole_member(carrier: Carrier) -> Member:
    if isinstance(carrier, FinAbGroup):
        return whole(carrier)
    if isinstance(carrier, LatticeGroup):
        return carrier.whole()
    return WindowSubgroup.whole(carrier)


# --- bases -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TopologyBase:
    """Enumerable, downward-cofinal family of open finite-index subgroups.

    ``producer`` returns a fresh iterator on every call, so enumeration can be
    restarted and prefixes can be taken from several threads at once.
    ``exhaustive`` means the producer is finite and yields the whole family.
    """

    carrier: Carrier
    kind: str
    producer: Callable[[], Iterator[Member]] = field(repr=False)
    exhaustive: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise ValueError(f"unknown base kind {self.kind!r}")

    def __iter__(self) -> Iterator[Member]:
        return iter(self.producer())

    def prefix(self, k: int) -> list[Member]:
        """The first ``k`` members."""
        if k < 0:
            raise ValueError(f"prefix length must be nonnegative, got {k}")
        return list(itertools.islice(self.producer(), k))

    def elements(self, limit: int) -> list[Member]:
        """Every member if the base is exhaustive, otherwise the first ``limit``."""
        if self.exhaustive:
            return list(self.producer())
        return self.prefix(limit)

    def is_directed(self, prefix_len: int, search_len: Optional[int] = None) -> bool:
        """Whether every pair in the prefix contains a common member from the search prefix."""
        members = self.elements(prefix_len)
        pool = self.elements(search_len or 2 * prefix_len)
        for A, B in itertools.combinations_with_replacement(members, 2):
            meet = intersect(A, B)
            if not any(is_subset_of(P, meet) for P in pool):
                return False
        return True

    def __str__(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind} base on {self.carrier}" + (f" ({extra})" if extra else "")


def _listed(members: Sequence[Member]) -> Callable[[], Iterator[Member]]:
    frozen = tuple(members)
    return lambda: iter(frozen)


def _dedupe_by_index(members: Sequence[Member]) -> list[Member]:
    seen = []
    for N in members:
        if N not in seen:
            seen.append(N)
    return sorted(seen, key=index_of)


def profinite_base(G: Carrier, budget: Optional[Budget] = None, max_index: Optional[int] = None) -> TopologyBase:
    """All finite-index subgroups; up to ``max_index`` for ``Z^n``."""
    budget = budget or Budget()
    if isinstance(G, FinAbGroup):
        subgroups = enumerate_subgroups(G, budget.order_bound)
        logger.debug("profinite base on %s: %d subgroups", G, len(subgroups))
        return TopologyBase(G, "profinite", _listed(subgroups), exhaustive=True)
    if isinstance(G, LatticeGroup):
        bound = max_index if max_index is not None else budget.base_prefix
        lattices = enumerate_sublattices(G.rank, bound)
        logger.debug("profinite base on %s: %d sublattices of index <= %d", G, len(lattices), bound)
        return TopologyBase(G, "profinite", _listed(lattices), exhaustive=False, params={"max_index": bound})
    raise ValueError(f"no enumerable profinite base on {G}; use the product base")


def discrete_base(G: Carrier, budget: Optional[Budget] = None, max_index: Optional[int] = None) -> TopologyBase:
    """Open finite-index subgroups of the discrete topology, i.e. all of them."""
    tau = profinite_base(G, budget, max_index)
    return TopologyBase(G, "discrete", tau.producer, tau.exhaustive, dict(tau.params))


def natural_base(G: Carrier) -> TopologyBase:
    """``{mG : m >= 1}``."""
    if isinstance(G, FinAbGroup):
        # mG only depends on gcd(m, exponent)
        members = _dedupe_by_index([multiple_subgroup(G, m) for m in range(1, G.exponent + 1)])
        return TopologyBase(G, "natural", _listed(members), exhaustive=True)
    if isinstance(G, LatticeGroup):
        return TopologyBase(G, "natural", lambda: (G.multiple(m) for m in itertools.count(1)))
    raise ValueError(f"no natural base on {G}")


def product_base(G: WindowGroup) -> TopologyBase:
    """``N_m`` for ``m = 1, 2, ...``: vanishing on ``[0, m)``, or on ``[-m, m)`` over ``Z``."""
    if not isinstance(G, WindowGroup):
        raise ValueError(f"the product base lives on window groups, got {G}")
    return TopologyBase(G, "product", lambda: (base_subgroup(G, m) for m in itertools.count(1)))


def explicit_base(carrier: Carrier, subgroups: Sequence[Member], exhaustive: bool = True) -> TopologyBase:
    """A user-supplied family, taken as the whole base unless ``exhaustive`` is False."""
    if not subgroups:
        raise ValueError("an explicit base needs at least one subgroup")
    for N in subgroups:
        _check_member(carrier, N)
    return TopologyBase(carrier, "explicit", _listed(sorted(subgroups, key=index_of)), exhaustive=exhaustive)


def _check_member(carrier: Carrier, N: Member) -> None:
    if isinstance(N, Subgroup):
        ok = N.ambient == carrier
    elif isinstance(N, Lattice):
        ok = isinstance(carrier, LatticeGroup) and N.dim == carrier.rank
    elif isinstance(N, WindowSubgroup):
        ok = N.ambient == carrier
    else:
        ok = False
    if not ok:
        raise AmbientMismatch(f"{N} is not a subgroup of {carrier}")


def _product_carrier(G1: Carrier, G2: Carrier) -> Carrier:
    if isinstance(G1, FinAbGroup) and isinstance(G2, FinAbGroup):
        return G1.direct_sum(G2)
    if isinstance(G1, LatticeGroup) and isinstance(G2, LatticeGroup):
        return LatticeGroup(G1.rank + G2.rank)
    if isinstance(G1, WindowGroup) and isinstance(G2, WindowGroup):
        return product_group(G1, G2)
    raise AmbientMismatch(f"cannot form the product of {G1} and {G2}")


def product_member(A: Member, B: Member) -> Member:
    """``A x B`` inside the product carrier."""
    if isinstance(A, Subgroup) and isinstance(B, Subgroup):
        return direct_sum_subgroup(A, B)
    if isinstance(A, Lattice) and isinstance(B, Lattice):
        top = A.basis.hstack(IntMatrix.zeros(A.dim, B.dim))
        bottom = IntMatrix.zeros(B.dim, A.dim).hstack(B.basis)
        return Lattice(top.vstack(bottom))
    if isinstance(A, WindowSubgroup) and isinstance(B, WindowSubgroup):
        return product_subgroup(A, B)
    raise AmbientMismatch(f"cannot form the product of {type(A).__name__} and {type(B).__name__}")


def product_of_bases(tau1: TopologyBase, tau2: TopologyBase) -> TopologyBase:
    """Base of the product topology on ``G1 x G2``.

    Two exhaustive bases give every product ``A x B``. Otherwise members are
    paired along the enumeration, the shorter base repeating its last member;
    this is cofinal when both enumerations descend, as the built-in bases do.
    """
    carrier = _product_carrier(tau1.carrier, tau2.carrier)
    if tau1.exhaustive and tau2.exhaustive:
        members = _dedupe_by_index([product_member(A, B) for A in tau1 for B in tau2])
        return TopologyBase(carrier, "product_of", _listed(members), exhaustive=True)

    def producer() -> Iterator[Member]:
        left, right = iter(tau1), iter(tau2)
        last_left = last_right = None
        while True:
            A = next(left, None)
            B = next(right, None)
            if A is None and B is None:
                return
            last_left = A if A is not None else last_left
            last_right = B if B is not None else last_right
            yield product_member(last_left, last_right)

    return TopologyBase(carrier, "product_of", producer, params={"left": tau1.kind, "right": tau2.kind})


# --- reductions --------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """``G^1_tau``, the intersection of all open subgroups.

    ``subgroup`` is None when the residual is the zero subgroup of an infinite
    carrier, which is not a finite-index member. ``exact`` is False when the
    answer is only an upper bound read off a prefix.
    """

    subgroup: Optional[Member]
    trivial: bool
    exact: bool
    rule: str
    examined: int


def _is_trivial(N: Member) -> bool:
    if isinstance(N, Subgroup):
        return N.order == 1
    return False


def residual_subgroup(tau: TopologyBase, prefix_len: int) -> ResidualReport:
    """Intersect the base; exact only when a structural rule applies or the base is exhaustive.

    Raises:
        NoStabilization: the running intersection still shrank at the last
            examined member of a non-exhaustive base.
    """
    G = tau.carrier
    if isinstance(G, LatticeGroup) and tau.kind in ("profinite", "natural", "discrete"):
        return ResidualReport(None, True, True, "residually_finite", 0)
    if isinstance(G, WindowGroup) and tau.kind == "product":
        return ResidualReport(None, True, True, "hausdorff", 0)

    members = tau.elements(prefix_len)
    current = members[0]
    shrank_last = False
    for N in members[1:]:
        meet = intersect(current, N)
        shrank_last = meet != current
        current = meet
    if tau.exhaustive:
        return ResidualReport(current, _is_trivial(current), True, "exhaustive", len(members))
    if shrank_last:
        raise NoStabilization(f"intersection of {tau} still descending after {len(members)} members")
    logger.info("residual of %s is an upper bound from %d members", tau, len(members))
    return ResidualReport(current, _is_trivial(current), False, "prefix", len(members))


def quotient_base(tau: TopologyBase, H: Subgroup) -> tuple[QuotientMap, TopologyBase]:
    """Base induced on ``G / H`` by the images of the members (finite carriers)."""
    G = tau.carrier
    if not isinstance(G, FinAbGroup) or H.ambient != G:
        raise AmbientMismatch(f"quotient bases need a subgroup of the finite carrier {G}")
    q = quotient_map(H)
    members = _dedupe_by_index([image(q.projection, subgroup_sum(N, H)) for N in tau])
    return q, TopologyBase(q.quotient, "quotient", _listed(members), exhaustive=tau.exhaustive)


def is_continuous(phi: Endomorphism, tau: TopologyBase, prefix_len: int, search_len: Optional[int] = None) -> bool:
    """Every ``phi^{-1}(N)`` over the prefix contains a member of the search prefix."""
    pool = tau.elements(search_len or 2 * prefix_len)
    for N in tau.elements(prefix_len):
        pulled = preimage_of(N, phi)
        if not any(is_subset_of(P, pulled) for P in pool):
            logger.debug("preimage of %s under %s contains no examined member", N, phi)
            return False
    return True


def is_finer(A: TopologyBase, B: TopologyBase, prefix_len: int, search_len: Optional[int] = None) -> bool:
    """Whether every member of ``B``'s prefix contains a member of ``A``'s search prefix."""
    if A.carrier != B.carrier:
        raise AmbientMismatch(f"bases on {A.carrier} and {B.carrier}")
    pool = A.elements(search_len or 2 * prefix_len)
    return all(any(is_subset_of(P, N) for P in pool) for N in B.elements(prefix_len))
