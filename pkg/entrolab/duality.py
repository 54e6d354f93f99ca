"""Duality for finite abelian groups and for window groups.

The dual of ``Z(m_1) + ... + Z(m_r)`` is identified with the group itself
through the pairing ``<x, chi> = sum_i x_i * chi_i / m_i`` in ``Q/Z``, so
characters are ordinary ``GroupElement`` objects and annihilators are ordinary
``Subgroup`` objects. For window groups, ``K^I`` and ``K^(I)`` are paired
coordinatewise; the annihilator of a window subgroup is a finite subgroup of
the direct sum supported on the same window.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from entrolab.config import Budget
from entrolab.entropy import (
    EntropyValue,
    cotrajectory_indices,
    ent_algebraic,
    ent_star_tau,
    trajectory_sizes,
)
from entrolab.errors import AmbientMismatch
from entrolab.finab import (
    FinAbGroup,
    GroupElement,
    Homomorphism,
    Subgroup,
    kernel,
    subgroup_sum,
    trivial,
    whole,
)
from entrolab.linalg import IntMatrix
from entrolab.topology import TopologyBase
from entrolab.window import (
    BandedEndo,
    BandedTerm,
    SupportedSubgroup,
    WindowSubgroup,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharacterPairing:
    """``G x G -> Q/Z``, identifying ``G`` with its character group."""

    group: FinAbGroup

    def pair(self, x: GroupElement, chi: GroupElement) -> Fraction:
        if x.ambient != self.group or chi.ambient != self.group:
            raise AmbientMismatch(f"pairing on {self.group} applied to {x.ambient} and {chi.ambient}")
        total = sum((Fraction(a * b, m) for a, b, m in zip(x.coords, chi.coords, self.group.moduli)), Fraction(0))
        return total - math.floor(total)

    def is_nondegenerate(self) -> bool:
        """Only ``0`` pairs trivially with every character (exhaustive)."""
        characters = list(self.group.elements())
        return all(x.is_zero() or any(self.pair(x, chi) for chi in characters) for x in characters)


def pairing(x: GroupElement, chi: GroupElement) -> Fraction:
    return CharacterPairing(x.ambient).pair(x, chi)


def dual_hom(phi: Homomorphism) -> Homomorphism:
    """``chi -> chi o phi`` as a homomorphism ``target -> source``.

    Entry ``(i, j)`` is ``A[j, i] * m_i / k_j``; the congruence every
    homomorphism satisfies makes it an integer.
    """
    m, k = phi.source.moduli, phi.target.moduli
    rows = [[phi.matrix[j, i] * m[i] // k[j] for j in range(len(k))] for i in range(len(m))]
    return Homomorphism(phi.target, phi.source, IntMatrix.from_rows(rows, cols=len(k)))


def _annihilate(A: Subgroup) -> Subgroup:
    G = A.ambient
    generators = A.generators()
    if not generators:
        return whole(G)
    e = G.exponent
    target = FinAbGroup((e,) * len(generators))
    rows = [[g.coords[i] * (e // G.moduli[i]) for i in range(G.rank)] for g in generators]
    return kernel(Homomorphism(G, target, IntMatrix.from_rows(rows, cols=G.rank)))


def annihilator(A: Subgroup) -> Subgroup:
    """``A^perp``: characters vanishing on ``A``."""
    return _annihilate(A)


def co_annihilator(B: Subgroup) -> Subgroup:
    """``B^T``: elements on which every character of ``B`` vanishes."""
    # the pairing is symmetric
    return _annihilate(B)


def window_annihilator(N: WindowSubgroup) -> SupportedSubgroup:
    """``N^perp`` in the dual direct sum: ``section^perp`` on the window of ``N``."""
    G = N.ambient.with_flavor("direct_sum")
    if N.lo == N.hi:
        return SupportedSubgroup.trivial(G)
    return SupportedSubgroup.create(G, N.lo, N.hi, annihilator(N.section))


_DUAL_KIND = {
    "identity": "identity",
    "zero": "zero",
    "right_shift": "left_shift",
    "left_shift": "right_shift",
    "two_sided_shift": "two_sided_inverse",
    "two_sided_inverse": "two_sided_shift",
    "banded": "banded",
}


def window_dual(phi: BandedEndo) -> BandedEndo:
    """The dual map on the direct sum, by the transpose rule.

    If ``phi`` sends ``K`` at ``j`` to ``j + s + d`` through ``c``, the dual
    sends ``K`` at ``q`` to ``q - s - d`` through the dual of ``c``, taken from
    the phase of ``q - s - d``.
    """
    G = phi.ambient.with_flavor("direct_sum")
    P, s = phi.period, phi.offset
    phases = []
    for q in range(P):
        terms = []
        for d in sorted({t.displacement for phase in phi.pattern for t in phase}):
            for term in phi.terms(q - s - d):
                if term.displacement == d:
                    terms.append(BandedTerm(-d, dual_hom(term.coefficient)))
        phases.append(tuple(terms))
    return BandedEndo(G, -s, tuple(phases), _DUAL_KIND[phi.kind])


def character_residual(tau: TopologyBase) -> Subgroup:
    """Common kernel of the characters that annihilate some member of a finite base."""
    G = tau.carrier
    if not isinstance(G, FinAbGroup):
        raise ValueError(f"character residuals are computed on finite carriers, got {G}")
    characters = trivial(G)
    for N in tau:
        characters = subgroup_sum(characters, annihilator(N))
    return co_annihilator(characters)


# --- bridge ------------------------------------------------------------------


def dual_endomorphism(phi: Any) -> Any:
    if isinstance(phi, Homomorphism):
        return dual_hom(phi)
    if isinstance(phi, BandedEndo):
        return window_dual(phi)
    raise TypeError(f"no dual for {type(phi).__name__}")


def dual_member(N: Any) -> Any:
    if isinstance(N, Subgroup):
        return annihilator(N)
    if isinstance(N, WindowSubgroup):
        return window_annihilator(N)
    raise TypeError(f"no annihilator for {type(N).__name__}")


@dataclass(frozen=True)
class BridgeRow:
    member: str
    n: int
    cotrajectory_index: int
    trajectory_order: int

    @property
    def matches(self) -> bool:
        return self.cotrajectory_index == self.trajectory_order

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "n": self.n,
            "C_n": self.cotrajectory_index,
            "T_n": self.trajectory_order,
        }


@dataclass(frozen=True)
class BridgeReport:
    """``ent*_tau(phi)`` against ``ent(dual phi)``, with the per-member table."""

    adjoint: EntropyValue
    algebraic: EntropyValue
    rows: tuple[BridgeRow, ...] = field(repr=False)

    @property
    def local_ok(self) -> bool:
        return all(row.matches for row in self.rows)

    @property
    def verdict(self) -> str:
        if not self.local_ok:
            return "mismatch"
        if "at_least" in (self.adjoint.kind, self.algebraic.kind):
            return "inconclusive"
        return "match" if self.adjoint.same_value(self.algebraic) else "mismatch"

    def to_json(self) -> dict:
        return {
            "adjoint": self.adjoint.to_json(),
            "algebraic": self.algebraic.to_json(),
            "local_identity": self.local_ok,
            "table": [row.to_json() for row in self.rows],
            "verdict": self.verdict,
        }


def bridge_check(
    phi: Any, tau: TopologyBase, budget: Optional[Budget] = None, steps: int = 6, jobs: int = 1
) -> BridgeReport:
    """Compare ``ent*_tau(phi)`` with ``ent`` of the dual map, and ``|C_n|`` with ``|T_n|`` member by member."""
    budget = budget or Budget()
    dual = dual_endomorphism(phi)
    adjoint = ent_star_tau(phi, tau, budget, jobs)
    algebraic = ent_algebraic(dual, budget, jobs)
    rows = []
    for N in tau.elements(budget.base_prefix):
        indices = cotrajectory_indices(phi, N, steps)
        orders = trajectory_sizes(dual, dual_member(N), steps)
        rows.extend(BridgeRow(str(N), n, c, t) for n, (c, t) in enumerate(zip(indices, orders), start=1))
    report = BridgeReport(adjoint, algebraic, tuple(rows))
    logger.info("bridge check on %s: %s", tau, report.verdict)
    return report
