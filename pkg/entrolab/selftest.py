"""Invariant suites behind ``entrolab selftest``.

Each suite checks algebraic facts against exhaustive small-group oracles and
counts passes and failures. The duality and bridge suites read subgroups off a
shared ``SubgroupTable`` so that one enumeration and one set of annihilators
serves every endomorphism of a group. ``exhaustive=True`` runs the full sizes:
every subgroup pair of every group up to order 36, and every endomorphism of
every group with at most ``4**8`` of them, which includes all groups up to
order 16.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from entrolab.config import Budget
from entrolab.duality import annihilator, bridge_check, dual_hom, window_annihilator, window_dual
from entrolab.entropy import (
    bernoulli_certificate,
    cotrajectory,
    cotrajectory_indices,
    cotrajectory_indices_truncated,
    cover_oracle,
    ent_star_tau,
    h_star,
)
from entrolab.errors import EntrolabError
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    abelian_groups_up_to,
    count_endomorphisms,
    enumerate_endomorphisms,
    enumerate_subgroups,
    image,
    preimage,
    subgroup_from_generators,
    subgroup_intersect,
    subgroup_sum,
)
from entrolab.linalg import IntMatrix, determinant, hermite_normal_form, kernel_basis, smith_normal_form
from entrolab.topology import product_base, profinite_base
from entrolab.window import (
    LatticeEndo,
    LatticeGroup,
    WindowGroup,
    WindowSubgroup,
    banded,
    base_subgroup,
    identity_endo,
    left_shift,
    power,
    product_endo,
    product_group,
    reflect_endo,
    right_shift,
    two_sided_inverse,
    two_sided_shift,
    zero_endo,
)

logger = logging.getLogger(__name__)

SHIFT_BASES = (FinAbGroup((2,)), FinAbGroup((3,)), FinAbGroup((4,)), FinAbGroup((2, 2)))


@dataclass
class SuiteReport:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def check(self, condition: bool, label: str) -> None:
        if condition:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(label)
            logger.warning("selftest %s: %s failed", self.name, label)

    def guard(self, label: str, test: Callable[[], bool]) -> None:
        """Run ``test``; an entrolab error counts as a failure."""
        try:
            self.check(test(), label)
        except EntrolabError as exc:
            self.check(False, f"{label}: {type(exc).__name__}: {exc}")

    def to_json(self) -> dict:
        return {"passed": self.passed, "failed": self.failed, "failures": self.failures}


# --- subgroup tables -------------------------------------------------------------------

EXHAUSTIVE_ENDOMORPHISMS = 4**8


class SubgroupTable:
    """Every subgroup of a small group as one row of a boolean membership matrix.

    Elements are ranked in mixed radix with the last coordinate fastest, the
    order of ``FinAbGroup.elements``. ``perp[s]`` is the row of the
    annihilator of subgroup ``s``. Rows that are not subgroups look up as -1.
    """

    def __init__(self, G: FinAbGroup):
        if G.order > 62:
            raise ValueError(f"subgroup tables hold groups of order at most 62, got {G.order}")
        self.group = G
        self.subgroups = enumerate_subgroups(G)
        self._moduli = np.array(G.moduli, dtype=np.int64)
        self._strides = np.array(
            [math.prod(G.moduli[t + 1:]) for t in range(G.rank)], dtype=np.int64
        )
        self._coords = np.array(list(itertools.product(*(range(m) for m in G.moduli))), dtype=np.int64).reshape(
            G.order, G.rank
        )
        self.addition = self._rank(self._coords[:, None, :] + self._coords[None, :, :])
        self.members = np.zeros((len(self.subgroups), G.order), dtype=bool)
        for s, H in enumerate(self.subgroups):
            for x in H.elements():
                self.members[s, self._rank(np.array(x.coords, dtype=np.int64))] = True
        self._weights = np.left_shift(np.int64(1), np.arange(G.order, dtype=np.int64))
        keys = self.members.astype(np.int64) @ self._weights
        self._order = np.argsort(keys)
        self._sorted = keys[self._order]
        position = {H: s for s, H in enumerate(self.subgroups)}
        self.perp = np.array([position[annihilator(H)] for H in self.subgroups], dtype=np.int64)

    def _rank(self, coords: np.ndarray) -> np.ndarray:
        return (coords % self._moduli) @ self._strides

    @property
    def sizes(self) -> np.ndarray:
        return self.members.sum(axis=1)

    def element_map(self, phi: Homomorphism) -> np.ndarray:
        """``phi`` as an array sending the rank of ``x`` to the rank of ``phi(x)``."""
        r = self.group.rank
        A = np.array(phi.matrix.entries, dtype=np.int64).reshape(r, r)
        return self._rank(self._coords @ A.T)

    def lookup(self, masks: np.ndarray) -> np.ndarray:
        keys = masks.astype(np.int64) @ self._weights
        slots = np.minimum(np.searchsorted(self._sorted, keys), len(self._sorted) - 1)
        return np.where(self._sorted[slots] == keys, self._order[slots], -1)

    def perp_of(self, ids: np.ndarray) -> np.ndarray:
        return np.where(ids >= 0, self.perp[np.maximum(ids, 0)], -2)

    def preimages(self, masks: np.ndarray, table: np.ndarray) -> np.ndarray:
        return masks[..., table]

    def images(self, masks: np.ndarray, table: np.ndarray) -> np.ndarray:
        out = np.zeros_like(masks)
        rows, xs = np.nonzero(masks)
        out[rows, table[xs]] = True
        return out

    def sums(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Row-wise ``A + B`` of two stacks of masks."""
        out = np.zeros(A.shape, dtype=bool)
        rows, a, b = np.nonzero(A[:, :, None] & B[:, None, :])
        out[rows, self.addition[a, b]] = True
        return out


@functools.lru_cache(maxsize=None)
def subgroup_table(G: FinAbGroup) -> SubgroupTable:
    return SubgroupTable(G)


def _rows_hold(report: SuiteReport, ok: np.ndarray, label: str) -> None:
    bad = np.flatnonzero(~np.asarray(ok).reshape(-1))
    report.check(bad.size == 0, label if bad.size == 0 else f"{label}: fails at rows {bad[:5].tolist()}")


# --- exact linear algebra ------------------------------------------------------


def suite_linalg(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    for trial in range(200 if exhaustive else 40):
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        A = IntMatrix.from_rows([[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)], cols=cols)
        U, D, V = smith_normal_form(A)
        diagonal = [d for d in D.diagonal_entries() if d]
        report.check(U @ A @ V == D, f"U A V = D for {A}")
        report.check(abs(determinant(U)) == 1 and abs(determinant(V)) == 1, f"unimodular transforms for {A}")
        report.check(all(b % a == 0 for a, b in zip(diagonal, diagonal[1:])), f"divisibility chain for {A}")
        H, W = hermite_normal_form(A)
        report.check(A @ W == H, f"A W = H for {A}")
        K = kernel_basis(A)
        report.check(K.cols == 0 or (A @ K).is_zero(), f"kernel basis of {A}")


# --- finite abelian groups -------------------------------------------------------


def suite_finab(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    for G in abelian_groups_up_to(36 if exhaustive else 12):
        subgroups = enumerate_subgroups(G)
        report.check(all(H.order * H.index == G.order for H in subgroups), f"Lagrange on {G}")
        report.check(len(set(subgroups)) == len(subgroups), f"distinct subgroups of {G}")
        if count_endomorphisms(G) <= (4096 if exhaustive else 512):
            report.check(
                sum(1 for _ in enumerate_endomorphisms(G)) == count_endomorphisms(G), f"endomorphism count of {G}"
            )
        for phi in _endomorphisms(G, False, rng, 8):
            for H in subgroups:
                report.check(image(phi, preimage(phi, H)).is_subset(H), f"phi(phi^-1 H) <= H on {G}")


# --- duality -------------------------------------------------------------------


def suite_duality(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    for G in abelian_groups_up_to(36 if exhaustive else 16):
        table = subgroup_table(G)
        M = table.members
        P = M[table.perp]
        count = len(table.subgroups)
        _rows_hold(report, table.sizes * table.sizes[table.perp] == G.order, f"|H| |H^perp| = |G| on {G}")
        _rows_hold(report, table.perp[table.perp] == np.arange(count), f"biduality on {G}")
        for s, A in enumerate(table.subgroups):
            a, pa = np.broadcast_to(M[s], M.shape), np.broadcast_to(P[s], P.shape)
            _rows_hold(
                report,
                table.perp_of(table.lookup(table.sums(a, M))) == table.lookup(pa & P),
                f"(A + B)^perp = A^perp & B^perp for A = {A}",
            )
            _rows_hold(
                report,
                table.perp_of(table.lookup(a & M)) == table.lookup(table.sums(pa, P)),
                f"(A & B)^perp = A^perp + B^perp for A = {A}",
            )
            _rows_hold(
                report,
                ~(a & ~M).any(axis=1) == ~(P & ~pa).any(axis=1),
                f"A <= B iff B^perp <= A^perp for A = {A}",
            )
        for _ in range(48 if exhaustive else 12):
            i, j = rng.randrange(count), rng.randrange(count)
            A, B = table.subgroups[i], table.subgroups[j]
            report.check(
                annihilator(subgroup_sum(A, B)) == subgroup_intersect(annihilator(A), annihilator(B)),
                f"(A + B)^perp for {A}, {B}",
            )
            report.check(
                table.lookup(table.sums(M[[i]], M[[j]]))[0] == table.subgroups.index(subgroup_sum(A, B)),
                f"table sum agrees with subgroup_sum for {A}, {B}",
            )
        for phi in _endomorphisms(G, exhaustive, rng, 6 if G.order <= 16 else 2):
            _dual_preimages(report, table, phi)
        for phi in _endomorphisms(G, False, rng, 2):
            dual = dual_hom(phi)
            H = rng.choice(table.subgroups)
            report.check(
                annihilator(preimage(phi.power(2), H)) == image(dual.power(2), annihilator(H)),
                f"(phi^-2 H)^perp = dual^2 H^perp for {phi.matrix} on {G}",
            )


def _dual_preimages(report: SuiteReport, table: SubgroupTable, phi: Homomorphism) -> None:
    """``(phi^-n H)^perp = dual^n(H^perp)`` for every subgroup ``H`` and ``n <= 4``."""
    dual = dual_hom(phi)
    report.check(dual_hom(dual) == phi, f"double dual of {phi.matrix}")
    t, d = table.element_map(phi), table.element_map(dual)
    tn = dn = np.arange(table.group.order)
    P = table.members[table.perp]
    for n in range(1, 5):
        tn, dn = t[tn], d[dn]
        _rows_hold(
            report,
            table.perp_of(table.lookup(table.preimages(table.members, tn)))
            == table.lookup(table.images(P, dn)),
            f"(phi^-{n} H)^perp = dual^{n} H^perp for {phi.matrix} on {table.group}",
        )


# --- window groups ---------------------------------------------------------------


def suite_window(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    for K in SHIFT_BASES:
        G = WindowGroup(K)
        for m in range(1, 5):
            chain = cotrajectory(left_shift(G), base_subgroup(G, m), 6)
            for n, B in enumerate(chain, start=1):
                report.check(B == base_subgroup(G, m + n - 1), f"B_{n}(left shift, N_{m}) = N_{m + n - 1} over {K}")
        P = WindowGroup(K, "N", "product")
        for phi in (left_shift(P), right_shift(P)):
            for m in range(1, 4):
                N = base_subgroup(P, m)
                report.check(
                    cotrajectory_indices(phi, N, 5) == cotrajectory_indices_truncated(phi, N, 5),
                    f"direct-sum and truncated cotrajectories agree for {phi} on N_{m}",
                )
        Z = WindowGroup(K, "Z")
        for m in range(1, 4):
            N = base_subgroup(Z, m)
            dual = window_annihilator(N)
            report.check(N.index == dual.order, f"[G : N_{m}] = |N_{m}^perp| over {K}")
    for K in SHIFT_BASES[:2]:
        for phi in _shifts(WindowGroup(K, "N", "product")) + _shifts(WindowGroup(K, "Z", "product")):
            report.check(window_dual(window_dual(phi)).pattern == phi.pattern, f"double dual of {phi}")


# --- entropy laws ------------------------------------------------------------------


def suite_entropy(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    budget = Budget(base_prefix=6 if exhaustive else 4)
    for K in SHIFT_BASES:
        G = WindowGroup(K)
        tau = product_base(G)
        expected = {"right_shift": 1, "left_shift": K.order}
        for phi in (right_shift(G), left_shift(G)):
            report.guard(f"ent* of {phi}", lambda: ent_star_tau(phi, tau, budget).alpha == expected[phi.kind])
        Z = WindowGroup(K, "Z")
        report.guard(
            f"ent* of the two-sided shift over {K}",
            lambda: ent_star_tau(two_sided_shift(Z), product_base(Z), budget).alpha == K.order,
        )
        for phi in (identity_endo(G), zero_endo(G)):
            report.guard(f"ent* of {phi} is 0", lambda: ent_star_tau(phi, tau, budget).is_zero)
        for k in range(1, 4):
            report.guard(
                f"ent*(beta^{k}) = {k} ent*(beta) over {K}",
                lambda: ent_star_tau(power(left_shift(G), k), tau, budget).same_value(
                    ent_star_tau(left_shift(G), tau, budget).scaled(k)
                ),
            )
        report.guard(
            f"inverse law over {K}",
            lambda: ent_star_tau(two_sided_inverse(Z), product_base(Z), budget).same_value(
                ent_star_tau(two_sided_shift(Z), product_base(Z), budget)
            ),
        )
        report.guard(
            f"reflection invariance over {K}",
            lambda: h_star(reflect_endo(two_sided_shift(Z)), base_subgroup(Z, 2).reflect(), budget)[0].same_value(
                h_star(two_sided_shift(Z), base_subgroup(Z, 2), budget)[0]
            ),
        )
    for K in SHIFT_BASES[:2]:
        G = WindowGroup(K)
        phi = product_endo(left_shift(G), right_shift(G))
        GG = product_group(G, G)
        report.guard(
            f"additivity over {K}", lambda: ent_star_tau(phi, product_base(GG), budget).alpha == K.order
        )
        for trial in range(400 if exhaustive else 200):
            M = base_subgroup(G, rng.randint(1, 3))
            N = M.intersect(_random_window_subgroup(G, rng))
            shift = rng.choice((left_shift(G), right_shift(G)))
            report.guard(
                f"H*({shift}, N) >= H*({shift}, M) for N = {N}",
                lambda: h_star(shift, N, budget)[0].compare(h_star(shift, M, budget)[0]) >= 0,
            )
    Zl = LatticeGroup(1)
    mu2 = LatticeEndo.multiplication(Zl, 2)
    report.guard(
        "ent*(mu2 on Z) = 0",
        lambda: ent_star_tau(mu2, profinite_base(Zl, budget, 200 if exhaustive else 24), budget).is_zero,
    )


# --- oracle equivalences -------------------------------------------------------------


def suite_oracle(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    budget = Budget(truncation_bound=2**16)
    for trial in range(100 if exhaustive else 40):
        K = rng.choice((FinAbGroup((2,)), FinAbGroup((3,))))
        G = WindowGroup(K, "N", "product")
        psi = _random_banded(G, rng)
        C = _random_window_subgroup(G, rng)
        n = rng.randint(1, 5)
        report.guard(
            f"cover count = |C_{n}| for {psi} and {C}",
            lambda: cover_oracle(psi, C, n, budget) == cotrajectory_indices(psi, C, n)[-1],
        )
    for G in abelian_groups_up_to(8):
        subgroups = enumerate_subgroups(G)
        for phi in _endomorphisms(G, False, rng, 4):
            C = rng.choice(subgroups)
            report.check(
                cover_oracle(phi, C, 3, budget) == cotrajectory_indices(phi, C, 3)[-1], f"cover count on {G}"
            )


# --- bridge --------------------------------------------------------------------------


def suite_bridge(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    budget = Budget(base_prefix=4)
    for K in SHIFT_BASES[:2]:
        for index_set in ("N", "Z"):
            G = WindowGroup(K, index_set, "product")
            for phi in _shifts(G):
                report.guard(
                    f"bridge for {phi}", lambda: bridge_check(phi, product_base(G), budget, 6).verdict == "match"
                )
    for G in abelian_groups_up_to(16):
        table = subgroup_table(G)
        tau = profinite_base(G, budget)
        for phi in _endomorphisms(G, exhaustive, rng, 512):
            _table_bridge(report, table, phi)
        for phi in _endomorphisms(G, False, rng, 2):
            report.guard(f"bridge for {phi.matrix} on {G}", lambda: _finite_bridge(phi, tau, budget))
            N = rng.choice(table.subgroups)
            column = _table_chains(table, phi, 4)[0][:, table.subgroups.index(N)]
            report.check(
                cotrajectory_indices(phi, N, 4) == column.tolist(),
                f"table cotrajectory agrees with the library for {phi.matrix} on {N}",
            )


def _finite_bridge(phi: Homomorphism, tau, budget: Budget) -> bool:
    report = bridge_check(phi, tau, budget, 4)
    return report.verdict == "match" and report.adjoint.is_zero and report.algebraic.is_zero


def _table_chains(table: SubgroupTable, phi: Homomorphism, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """``|C_n(phi, N)|`` and ``|T_n(dual, N^perp)|`` for every subgroup ``N``, one row per ``n``."""
    t, d = table.element_map(phi), table.element_map(dual_hom(phi))
    M = table.members
    F = M[table.perp]
    B, T = M, F
    indices, orders = [], []
    for _ in range(steps):
        indices.append(table.group.order // B.sum(axis=1))
        orders.append(T.sum(axis=1))
        B = M & table.preimages(B, t)
        T = table.sums(F, table.images(T, d))
    return np.array(indices), np.array(orders)


def _table_bridge(report: SuiteReport, table: SubgroupTable, phi: Homomorphism) -> None:
    # six steps outlast every strictly decreasing chain in a group of order at most 16
    indices, orders = _table_chains(table, phi, 6)
    _rows_hold(report, indices == orders, f"|C_n| = |T_n| for {phi.matrix} on {table.group}")
    _rows_hold(report, indices[-1] == indices[-2], f"cotrajectories of {phi.matrix} on {table.group} stop")


# --- certificates ------------------------------------------------------------------------


def suite_certificate(report: SuiteReport, exhaustive: bool, rng: random.Random) -> None:
    for p, m, shift in itertools.product((2, 3), (2, 3, 4), ("right", "left", "two_sided")):
        report.guard(f"certificate p={p} m={m} {shift}", lambda: _certified(p, m, 4, shift))
    if exhaustive:
        report.guard("certificate p=2 m=5 n=5", lambda: _certified(2, 5, 5))


def _certified(p: int, m: int, n_max: int, shift: str = "right") -> bool:
    certificate = bernoulli_certificate(p, m, n_max, shift)
    return certificate.verdict == "verified" and certificate.alpha_lower == p**m


# --- helpers -------------------------------------------------------------------------


def _random_endomorphism(G: FinAbGroup, rng: random.Random) -> Homomorphism:
    rows = [[rng.randrange(0, mj, mj // math.gcd(mi, mj)) for mi in G.moduli] for mj in G.moduli]
    return Homomorphism(G, G, IntMatrix.from_rows(rows, cols=G.rank))


def _endomorphisms(G: FinAbGroup, exhaustive: bool, rng: random.Random, k: int) -> Iterable[Homomorphism]:
    """Every endomorphism when there are at most ``k`` (or the exhaustive limit), else ``k`` random ones."""
    total = count_endomorphisms(G)
    if total <= k or (exhaustive and total <= EXHAUSTIVE_ENDOMORPHISMS):
        return enumerate_endomorphisms(G)
    return [_random_endomorphism(G, rng) for _ in range(k)]


def _shifts(G: WindowGroup) -> list:
    if G.index_set == "Z":
        return [identity_endo(G), two_sided_shift(G), two_sided_inverse(G)]
    return [identity_endo(G), zero_endo(G), right_shift(G), left_shift(G)]


def _random_window_subgroup(G: WindowGroup, rng: random.Random) -> WindowSubgroup:
    length = rng.randint(1, 3)
    B = G.block(0, length)
    generators = [B.element([rng.randrange(m) for m in B.moduli]) for _ in range(rng.randint(0, 2))]
    return WindowSubgroup.create(G, 0, length, subgroup_from_generators(B, generators))


def _random_banded(G: WindowGroup, rng: random.Random):
    K = G.base
    terms = []
    for d in (-1, 0, 1):
        a = rng.randrange(K.moduli[0])
        if a:
            terms.append((d, Homomorphism.multiplication(K, a)))
    return banded(G, 0, [terms])


SUITES: dict[str, Callable[[SuiteReport, bool, random.Random], None]] = {
    "linalg": suite_linalg,
    "finab": suite_finab,
    "duality": suite_duality,
    "window": suite_window,
    "entropy": suite_entropy,
    "oracle": suite_oracle,
    "bridge": suite_bridge,
    "certificate": suite_certificate,
}


def run_suites(names: Optional[list[str]] = None, exhaustive: bool = False, seed: int = 0) -> list[SuiteReport]:
    """Run the named suites (all by default) with a fixed random seed."""
    names = names or list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites: {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    reports = []
    for name in names:
        report = SuiteReport(name)
        SUITES[name](report, exhaustive, random.Random(seed))
        logger.info("suite %s: %d passed, %d failed", name, report.passed, report.failed)
        reports.append(report)
    return reports
