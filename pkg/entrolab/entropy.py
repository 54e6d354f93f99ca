"""Entropy of endomorphisms: cotrajectories, trajectories and their stationary ratios.

All values are symbolic: ``EntropyValue.exact(alpha)`` stands for ``log(alpha)``.
A cotrajectory ``B_1 = N``, ``B_{n+1} = N & phi^{-1}(B_n)`` has nonincreasing
ratios ``[B_n : B_{n+1}]`` that are eventually constant; the constant is the
``alpha`` of ``H*(phi, N)``. Trajectories ``T_1 = F``, ``T_{n+1} = F + phi(T_n)``
behave the same way for ``H(phi, F)``.

Usage:
    from entrolab.entropy import h_star, ent_star_tau
    from entrolab.finab import FinAbGroup
    from entrolab.topology import product_base
    from entrolab.window import WindowGroup, left_shift, base_subgroup

    G = WindowGroup(FinAbGroup((2,)))
    value, trace = h_star(left_shift(G), base_subgroup(G, 3))
    ent_star_tau(left_shift(G), product_base(G)).alpha   # 2
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Callable, Iterable, Optional, Sequence

import sympy

from entrolab.config import Budget
from entrolab.errors import BudgetExhausted, TruncationTooLarge, VerificationFailed
from entrolab.finab import (
    FinAbGroup,
    Homomorphism,
    Subgroup,
    enumerate_subgroups,
    image,
    kernel,
    preimage,
    subgroup_intersect,
    subgroup_sum,
)
from entrolab.topology import (
    Member,
    TopologyBase,
    discrete_base,
    index_of,
    intersect,
    preimage_of,
    profinite_base,
)
from entrolab.window import (
    BandedEndo,
    KernelRuleSubgroup,
    LatticeEndo,
    LatticeGroup,
    SparseElement,
    SupportedSubgroup,
    WindowGroup,
    WindowSubgroup,
    image_supported,
    left_shift,
    right_shift,
    truncated_endo,
    truncation,
    two_sided_shift,
)

logger = logging.getLogger(__name__)

MODES = ("proven", "heuristic")
KINDS = ("exact", "infinite", "at_least")


def _worst_mode(*modes: Optional[str]) -> str:
    return "heuristic" if "heuristic" in modes else "proven"


# --- values ------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyValue:
    """``log(alpha)``, infinity backed by certificates, or a lower bound ``log(alpha)``."""

    kind: str
    alpha: Optional[int] = None
    mode: Optional[str] = None
    certificate: tuple = field(default=(), compare=False)
    budget: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entropy kind {self.kind!r}")
        if self.kind == "infinite":
            if not self.certificate:
                raise ValueError("an infinite value needs a certificate")
        elif not isinstance(self.alpha, int) or self.alpha < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha!r}")
        if self.kind == "exact" and self.mode not in MODES:
            raise ValueError(f"exact values carry a mode in {MODES}, got {self.mode!r}")

    @classmethod
    def exact(cls, alpha: int, mode: str = "proven") -> "EntropyValue":
        return cls("exact", alpha, mode)

    @classmethod
    def infinite(cls, certificate: Sequence[Any]) -> "EntropyValue":
        return cls("infinite", None, "proven", tuple(certificate))

    @classmethod
    def at_least(cls, alpha: int, budget: Optional[dict] = None) -> "EntropyValue":
        return cls("at_least", alpha, None, (), dict(budget or {}))

    @property
    def is_zero(self) -> bool:
        return self.kind == "exact" and self.alpha == 1

    def __add__(self, other: "EntropyValue") -> "EntropyValue":
        """``log a + log b = log(a * b)``."""
        if self.kind == "infinite" or other.kind == "infinite":
            return EntropyValue.infinite(self.certificate + other.certificate)
        if self.kind == "exact" and other.kind == "exact":
            return EntropyValue.exact(self.alpha * other.alpha, _worst_mode(self.mode, other.mode))
        return EntropyValue.at_least(self.alpha * other.alpha, {**(self.budget or {}), **(other.budget or {})})

    def scaled(self, k: int) -> "EntropyValue":
        """``k * log(alpha) = log(alpha ** k)``."""
        if k < 0:
            raise ValueError(f"cannot scale an entropy by {k}")
        if self.kind == "infinite":
            return self if k else EntropyValue.exact(1)
        if self.kind == "exact":
            return EntropyValue.exact(self.alpha ** k, self.mode)
        return EntropyValue.at_least(self.alpha ** k, self.budget)

    def same_value(self, other: "EntropyValue") -> bool:
        """Equal kinds and equal alphas, ignoring mode and certificates."""
        return self.kind == other.kind and self.alpha == other.alpha

    def compare(self, other: "EntropyValue") -> int:
        """Sign of ``self - other`` for exact or infinite values."""
        if "at_least" in (self.kind, other.kind):
            raise ValueError("lower bounds cannot be compared exactly")
        if self.kind == "infinite" or other.kind == "infinite":
            return (self.kind == "infinite") - (other.kind == "infinite")
        return (self.alpha > other.alpha) - (self.alpha < other.alpha)

    def to_json(self) -> dict:
        data: dict[str, Any] = {"kind": self.kind}
        if self.kind == "infinite":
            data["certificate"] = [c.to_json() if hasattr(c, "to_json") else c for c in self.certificate]
            return data
        data["alpha"] = self.alpha
        if self.kind == "exact":
            data["mode"] = self.mode
        else:
            data["budget"] = dict(self.budget or {})
        return data

    @classmethod
    def from_json(cls, data: dict) -> "EntropyValue":
        kind = data.get("kind")
        if kind == "exact":
            return cls.exact(int(data["alpha"]), data.get("mode", "proven"))
        if kind == "at_least":
            return cls.at_least(int(data["alpha"]), data.get("budget"))
        if kind == "infinite":
            return cls.infinite(data["certificate"])
        raise ValueError(f"unknown entropy kind {kind!r}")

    def __str__(self) -> str:
        if self.kind == "infinite":
            return "infinity"
        value = "0" if self.alpha == 1 else f"log {self.alpha}"
        if self.kind == "at_least":
            return f">= {value}"
        return value if self.mode == "proven" else f"{value} (heuristic)"


# --- traces ------------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    """Step ``n``: the subgroup, its size (index for cotrajectories, order for
    trajectories) and the ratio to step ``n + 1``."""

    n: int
    subgroup: Any = field(repr=False)
    size: int
    ratio: int

    def to_json(self) -> dict:
        return {"n": self.n, "size": self.size, "ratio": self.ratio, "subgroup": str(self.subgroup)}


@dataclass(frozen=True)
class CotrajectoryTrace:
    steps: tuple[TraceStep, ...]
    stabilized_at: Optional[int]
    mode: Optional[str]
    direction: str = "cotrajectory"

    @property
    def ratios(self) -> tuple[int, ...]:
        return tuple(step.ratio for step in self.steps)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(step.size for step in self.steps)

    def to_json(self) -> dict:
        return {
            "direction": self.direction,
            "mode": self.mode,
            "stabilized_at": self.stabilized_at,
            "steps": [step.to_json() for step in self.steps],
        }


# --- carriers ----------------------------------------------------------------


@singledispatch
def carrier_of(phi: Any):
    raise TypeError(f"{type(phi).__name__} is not a supported endomorphism")


@carrier_of.register
def _(phi: Homomorphism) -> FinAbGroup:
    if not phi.is_endomorphism:
        raise ValueError("entropy needs an endomorphism")
    return phi.source


@carrier_of.register
def _(phi: LatticeEndo) -> LatticeGroup:
    return phi.group


@carrier_of.register
def _(phi: BandedEndo) -> WindowGroup:
    return phi.ambient


# --- the stationary-ratio engine ---------------------------------------------


def _frontier(lo: int, length: int, u: int, n: int) -> Optional[tuple[int, int]]:
    """Interval whose state determines every later ratio of a translation orbit.

    The orbit of a window ``[lo, lo + length)`` under translation by ``u``
    is cut into blocks of ``|u|`` indices; the frontier is the last (first,
    for ``u < 0``) ``ceil(length / |u|) - 1`` blocks of the step-``n`` hull.
    """
    if length == 0:
        return None
    w = abs(u)
    blocks = -(-length // w)
    width = (blocks - 1) * w
    if width == 0:
        return None
    start = lo + n * w if u > 0 else lo + length - (blocks + n - 1) * w
    return (start, start + width)


def _run(
    first: Any,
    advance: Callable[[Any], Any],
    size: Callable[[Any], int],
    ratio: Callable[[int, int], int],
    budget: Budget,
    direction: str,
    state: Optional[Callable[[Any, int], Any]] = None,
) -> tuple[EntropyValue, CotrajectoryTrace]:
    steps: list[TraceStep] = []
    current, current_size = first, size(first)
    current_state = state(current, 1) if state else None
    streak, last_ratio = 0, None
    for n in range(1, budget.max_steps + 1):
        nxt = advance(current)
        nxt_size = size(nxt)
        alpha = ratio(current_size, nxt_size)
        steps.append(TraceStep(n, current, current_size, alpha))
        logger.debug("%s step %d: size %d ratio %d", direction, n, current_size, alpha)

        if nxt == current:
            return EntropyValue.exact(1), CotrajectoryTrace(tuple(steps), n, "proven", direction)
        if state is not None:
            nxt_state = state(nxt, n + 1)
            if nxt_state == current_state:
                return EntropyValue.exact(alpha), CotrajectoryTrace(tuple(steps), n, "proven", direction)
            current_state = nxt_state

        streak = streak + 1 if alpha == last_ratio else 1
        last_ratio = alpha
        if streak >= budget.confirm_window:
            start = n - streak + 1
            logger.info("%s ratio %d held for %d steps; accepting heuristically", direction, alpha, streak)
            return EntropyValue.exact(alpha, "heuristic"), CotrajectoryTrace(tuple(steps), start, "heuristic", direction)
        current, current_size = nxt, nxt_size

    trace = CotrajectoryTrace(tuple(steps), None, None, direction)
    partial = EntropyValue.at_least(1, {"max_steps": budget.max_steps, "upper_alpha": last_ratio})
    raise BudgetExhausted(f"{direction} did not stabilize within {budget.max_steps} steps", partial, trace)


def _exact_ratio(small: int, big: int) -> int:
    q, r = divmod(big, small)
    if r:
        raise ArithmeticError(f"size {big} is not a multiple of {small}")
    return q


# --- cotrajectories ----------------------------------------------------------


def cotrajectory(phi: Any, N: Member, steps: int) -> list[Member]:
    """``[B_1, ..., B_steps]``."""
    chain = [N]
    while len(chain) < steps:
        chain.append(intersect(N, preimage_of(chain[-1], phi)))
    return chain


def cotrajectory_indices(phi: Any, N: Member, steps: int) -> list[int]:
    """``[|C_1|, ..., |C_steps|]`` with ``C_n = G / B_n``."""
    return [index_of(B) for B in cotrajectory(phi, N, steps)]


def _cotrajectory_state(phi: Any, N: Member) -> Optional[Callable[[Any, int], Any]]:
    if not isinstance(phi, BandedEndo) or not isinstance(N, WindowSubgroup):
        return None
    u = phi.preimage_translation()
    if u is None:
        return None

    def state(B: WindowSubgroup, n: int):
        window = _frontier(N.lo, N.length, u, n)
        return B.projection(*window) if window else None

    return state


def h_star(phi: Any, N: Member, budget: Optional[Budget] = None) -> tuple[EntropyValue, CotrajectoryTrace]:
    """``H*(phi, N)`` with the cotrajectory that produced it.

    Exactness is proven when the chain stops (``B_{n+1} = B_n``) or, for
    translations of window groups, when the frontier projection repeats.
    Otherwise ``budget.confirm_window`` equal ratios give a heuristic value.

    Raises:
        BudgetExhausted: no stationary ratio within ``budget.max_steps``;
            ``partial`` is an ``at_least`` value and ``trace`` the steps so far.
    """
    budget = budget or Budget()
    return _run(
        N,
        lambda B: intersect(N, preimage_of(B, phi)),
        index_of,
        _exact_ratio,
        budget,
        "cotrajectory",
        _cotrajectory_state(phi, N),
    )


def cotrajectory_indices_truncated(phi: BandedEndo, N: WindowSubgroup, steps: int) -> list[int]:
    """``|C_n|`` computed in the finite model ``K^T`` of the product carrier.

    ``T`` extends the window of ``N`` far enough that ``phi^k`` restricted to
    it sees every coordinate it needs for ``k < steps``.
    """
    G = phi.ambient
    if N.lo == N.hi:
        return [1] * steps
    lo, hi = _margin(phi, N.lo, N.hi, steps)
    psi = truncated_endo(phi, lo, hi)
    N_T = N.extend(lo, hi)
    chain = [N_T]
    while len(chain) < steps:
        chain.append(subgroup_intersect(N_T, preimage(psi, chain[-1])))
    logger.debug("truncated cotrajectory on [%d, %d) of %s", lo, hi, G)
    return [B.index for B in chain]


def _margin(phi: BandedEndo, lo: int, hi: int, steps: int) -> tuple[int, int]:
    reach = phi.reach() or (0, 0)
    G = phi.ambient
    return (
        G.clamp(lo - (steps - 1) * max(0, reach[1])),
        hi + (steps - 1) * max(0, -reach[0]),
    )


# --- trajectories ------------------------------------------------------------


def _advance_trajectory(phi: Any, F: Any) -> Callable[[Any], Any]:
    if isinstance(F, SupportedSubgroup):
        return lambda T: F.sum(image_supported(phi, T))
    return lambda T: subgroup_sum(F, image(phi, T))


def trajectory(phi: Any, F: Any, steps: int) -> list[Any]:
    """``[T_1, ..., T_steps]``."""
    advance = _advance_trajectory(phi, F)
    chain = [F]
    while len(chain) < steps:
        chain.append(advance(chain[-1]))
    return chain


def trajectory_sizes(phi: Any, F: Any, steps: int) -> list[int]:
    return [T.order for T in trajectory(phi, F, steps)]


def _trajectory_state(phi: Any, F: Any) -> Optional[Callable[[Any, int], Any]]:
    if not isinstance(phi, BandedEndo) or not isinstance(F, SupportedSubgroup):
        return None
    u = phi.image_translation()
    if u is None:
        return None

    def state(T: SupportedSubgroup, n: int):
        window = _frontier(F.lo, F.hi - F.lo, u, n)
        return T.slice(*window) if window else None

    return state


def alg_entropy_H(phi: Any, F: Any, budget: Optional[Budget] = None) -> tuple[EntropyValue, CotrajectoryTrace]:
    """``H(phi, F)`` for a finite subgroup ``F`` (a ``Subgroup`` or ``SupportedSubgroup``)."""
    budget = budget or Budget()
    return _run(
        F,
        _advance_trajectory(phi, F),
        lambda T: T.order,
        _exact_ratio,
        budget,
        "trajectory",
        _trajectory_state(phi, F),
    )


# --- structural bounds -------------------------------------------------------


def _components(K: FinAbGroup, coefficients: Iterable[Homomorphism]) -> list[list[int]]:
    """Coordinates of ``K`` grouped by the coefficients that couple them."""
    parent = list(range(K.rank))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c in coefficients:
        for a in range(K.rank):
            for b in range(K.rank):
                if c.matrix[a, b]:
                    parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for a in range(K.rank):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def _growth_bound(phi: Any, forward: bool) -> int:
    if not isinstance(phi, BandedEndo):
        # finite quotients of finite or lattice carriers: the chain stops
        return 1
    G = phi.ambient
    K = G.base
    terms = [(phi.offset + t.displacement, t.coefficient) for phase in phi.pattern for t in phase]
    bound = 1
    for component in _components(K, [c for _, c in terms]):
        moves = [e for e, c in terms if any(c.matrix[a, b] for a in component for b in range(K.rank))]
        if not moves:
            continue
        up, down = max(0, max(moves)), max(0, -min(moves))
        lead, trail = (up, down) if forward else (down, up)
        growth = lead + (trail if G.index_set == "Z" else 0)
        bound *= math.prod(K.moduli[a] for a in component) ** growth
    return bound


def structural_bound(phi: Any) -> int:
    """Upper bound on ``alpha`` of ``H*(phi, N)`` over every window subgroup ``N``."""
    return _growth_bound(phi, forward=False)


def trajectory_bound(phi: Any) -> int:
    """Upper bound on ``alpha`` of ``H(phi, F)`` over every finite subgroup ``F``."""
    return _growth_bound(phi, forward=True)


# --- suprema -----------------------------------------------------------------


@dataclass(frozen=True)
class BaseEntropy:
    """One member of a base (or one finite subgroup) with its entropy."""

    member: Any = field(repr=False)
    value: EntropyValue
    trace: CotrajectoryTrace
    exhausted: bool = False


def _attempt(compute: Callable[[Any], tuple[EntropyValue, CotrajectoryTrace]], member: Any) -> BaseEntropy:
    try:
        value, trace = compute(member)
        return BaseEntropy(member, value, trace)
    except BudgetExhausted as exc:
        return BaseEntropy(member, exc.partial, exc.trace, exhausted=True)


def base_entropies(
    compute: Callable[[Any], tuple[EntropyValue, CotrajectoryTrace]],
    members: Sequence[Any],
    jobs: int = 1,
) -> list[BaseEntropy]:
    """Evaluate ``compute`` on every member, in order, on up to ``jobs`` threads."""
    if jobs <= 1 or len(members) <= 1:
        return [_attempt(compute, N) for N in members]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda N: _attempt(compute, N), members))


def _supremum(results: list[BaseEntropy], bound: int, exhaustive: bool, budget: Budget, label: str) -> EntropyValue:
    descriptor = {"base_prefix": budget.base_prefix, "max_steps": budget.max_steps, "examined": len(results)}
    exhausted = [r for r in results if r.exhausted]
    solved = [r for r in results if not r.exhausted]
    best = max((r.value.alpha for r in solved), default=1)
    if exhausted:
        partial = EntropyValue.at_least(best, descriptor)
        raise BudgetExhausted(f"{len(exhausted)} of {len(results)} members of the {label} did not stabilize", partial)
    if exhaustive:
        return EntropyValue.exact(best, _worst_mode(*(r.value.mode for r in solved)))
    at_bound = [r for r in solved if r.value.alpha == bound]
    if at_bound:
        return EntropyValue.exact(bound, at_bound[-1].value.mode)
    return EntropyValue.at_least(best, descriptor)


def ent_star_tau(
    phi: Any, tau: TopologyBase, budget: Optional[Budget] = None, jobs: int = 1
) -> EntropyValue:
    """``ent*_tau(phi)``: the supremum of ``H*(phi, N)`` over the base.

    Exact when the base is exhaustive, or when some member reaches the
    structural bound. Otherwise the supremum over the examined prefix is a
    lower bound.
    """
    budget = budget or Budget()
    if tau.carrier != carrier_of(phi):
        raise ValueError(f"{tau} does not live on the carrier of {phi}")
    members = tau.elements(budget.base_prefix)
    results = base_entropies(lambda N: h_star(phi, N, budget), members, jobs)
    value = _supremum(results, structural_bound(phi), tau.exhaustive, budget, str(tau))
    logger.info("ent*_tau over %s: %s", tau, value)
    return value


def ent_star(phi: Any, budget: Optional[Budget] = None, jobs: int = 1) -> EntropyValue:
    """Adjoint algebraic entropy: ``ent*_tau`` for the profinite base."""
    budget = budget or Budget()
    return ent_star_tau(phi, profinite_base(carrier_of(phi), budget), budget, jobs)


def ent_star_discrete(phi: Any, budget: Optional[Budget] = None, jobs: int = 1) -> EntropyValue:
    budget = budget or Budget()
    return ent_star_tau(phi, discrete_base(carrier_of(phi), budget), budget, jobs)


def finite_subgroups(G: Any, budget: Budget) -> tuple[list[Any], bool]:
    """A cofinal family of finite subgroups and whether it is complete."""
    if isinstance(G, FinAbGroup):
        return enumerate_subgroups(G, budget.order_bound), True
    if isinstance(G, WindowGroup):
        if G.flavor != "direct_sum":
            raise ValueError("algebraic entropy is computed on direct sums")
        lo = (lambda m: 0) if G.index_set == "N" else (lambda m: -m)
        return [SupportedSubgroup.full(G, lo(m), m) for m in range(1, budget.base_prefix + 1)], False
    raise ValueError(f"no finite subgroups to enumerate on {G}")


def ent_algebraic(phi: Any, budget: Optional[Budget] = None, jobs: int = 1) -> EntropyValue:
    """``ent(phi)``: the supremum of ``H(phi, F)`` over finite subgroups ``F``."""
    budget = budget or Budget()
    G = carrier_of(phi)
    if isinstance(G, LatticeGroup):
        # Z^n has no nonzero finite subgroup
        return EntropyValue.exact(1)
    members, exhaustive = finite_subgroups(G, budget)
    results = base_entropies(lambda F: alg_entropy_H(phi, F, budget), members, jobs)
    value = _supremum(results, trajectory_bound(phi), exhaustive, budget, "finite subgroups")
    logger.info("ent of %s: %s", phi, value)
    return value


def h_top_linear(psi: BandedEndo, tau: TopologyBase, budget: Optional[Budget] = None, jobs: int = 1) -> EntropyValue:
    """Topological entropy of ``psi`` on a compact product ``K^I``, computed as ``ent*_tau``."""
    G = carrier_of(psi)
    if not isinstance(G, WindowGroup) or G.flavor != "product":
        raise ValueError(f"topological entropy is computed on compact products, got {G}")
    return ent_star_tau(psi, tau, budget, jobs)


# --- cover counting ----------------------------------------------------------


def _check_truncation(size: int, budget: Budget) -> None:
    if size > budget.truncation_bound:
        raise TruncationTooLarge(size, budget.truncation_bound)


def _count_cover(psi: Homomorphism, C: Subgroup, n: int, budget: Budget) -> int:
    G = psi.source
    _check_truncation(G.order, budget)
    powers = [Homomorphism.identity(G)]
    while len(powers) < n:
        powers.append(psi.compose(powers[-1]))
    keys = {tuple(C.coset_key(p(x)) for p in powers) for x in G.elements()}
    return len(keys)


def cover_oracle(psi: Any, C: Any, n: int, budget: Optional[Budget] = None) -> int:
    """Number of nonempty pieces of ``zeta(C) v psi^{-1} zeta(C) v ... v psi^{-n+1} zeta(C)``.

    The cover by cosets of ``C`` is a partition, so its minimal subcover is
    the set of pieces; they are counted by enumerating a finite model.

    Raises:
        TruncationTooLarge: the finite model has more than ``budget.truncation_bound`` elements.
    """
    budget = budget or Budget()
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if isinstance(psi, Homomorphism):
        return _count_cover(psi, C, n, budget)
    if isinstance(psi, BandedEndo) and isinstance(C, WindowSubgroup):
        if C.lo == C.hi:
            return 1
        lo, hi = _margin(psi, C.lo, C.hi, n)
        _check_truncation(truncation(psi.ambient, lo, hi).order, budget)
        return _count_cover(truncated_endo(psi, lo, hi), C.extend(lo, hi), n, budget)
    raise TypeError(f"no finite model for {type(psi).__name__} and {type(C).__name__}")


# --- certificates ------------------------------------------------------------


SHIFT_VARIANTS = {
    "right": ("N", 1),
    "two_sided": ("Z", 1),
    "left": ("N", -1),
}


@dataclass(frozen=True)
class WitnessCheck:
    """Witnesses ``e_{(m*n + j - 1)!}`` of step ``n``."""

    n: int
    positions: tuple[int, ...]
    in_cotrajectory: bool
    independent: bool

    @property
    def passed(self) -> bool:
        return self.in_cotrajectory and self.independent

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "positions": [str(p) for p in self.positions],
            "in_cotrajectory": self.in_cotrajectory,
            "independent": self.independent,
        }


@dataclass(frozen=True)
class BernoulliCertificate:
    """Machine-checked lower bound ``[B_n : B_{n+1}] >= p^m`` for ``n`` in ``[n_start, n_max]``.

    Applies to the shift on ``Z(p)^(I)`` and the kernel-rule subgroup ``N_m``;
    the same witness argument works for every ``n``, so ``H* >= m log p``.
    """

    p: int
    m: int
    shift: str
    n_start: int
    n_max: int
    checks: tuple[WitnessCheck, ...]

    @property
    def alpha_lower(self) -> int:
        return self.p ** self.m

    @property
    def verdict(self) -> str:
        return "verified" if all(c.passed for c in self.checks) else "failed"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "shift": self.shift,
            "n_start": self.n_start,
            "n_max": self.n_max,
            "skipped": list(range(1, self.n_start)),
            "alpha_lower": self.alpha_lower,
            "verdict": self.verdict,
            "checks": [c.to_json() for c in self.checks],
        }


def _shift_on(G: WindowGroup, shift: str) -> BandedEndo:
    if shift == "right":
        return right_shift(G)
    if shift == "left":
        return left_shift(G)
    return two_sided_shift(G)


def first_verifiable_step(N: KernelRuleSubgroup) -> int:
    """Least ``n`` whose witness and rule positions all lie beyond the head ``1..m``."""
    n = 1
    while not all(N.witness_position(n, j) > N.m and N.position(n, j) > N.m for j in range(1, N.m + 1)):
        n += 1
    return n


def _images(phi: BandedEndo, x: SparseElement, count: int) -> list[SparseElement]:
    images = [x]
    while len(images) < count:
        images.append(phi.apply(images[-1]))
    return images


def bernoulli_certificate(p: int, m: int, n_max: int, shift: str = "right") -> BernoulliCertificate:
    """Verify the witness argument for ``H*(shift, N_m) >= m log p`` up to step ``n_max``.

    Raises:
        VerificationFailed: a witness check fails.
    """
    if not sympy.isprime(p):
        raise ValueError(f"p must be prime, got {p}")
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    if shift not in SHIFT_VARIANTS:
        raise ValueError(f"shift must be one of {sorted(SHIFT_VARIANTS)}, got {shift!r}")
    index_set, sign = SHIFT_VARIANTS[shift]
    K = FinAbGroup.cyclic(p)
    G = WindowGroup(K, index_set)
    phi = _shift_on(G, shift)
    N = KernelRuleSubgroup(G, m, sign)
    n_start = first_verifiable_step(N)
    if n_max < n_start:
        raise ValueError(f"n_max = {n_max} is below the first verifiable step {n_start}")

    checks = []
    source = K.power(m)
    for n in range(n_start, n_max + 1):
        positions = tuple(N.witness_position(n, j) for j in range(1, m + 1))
        orbits = [_images(phi, SparseElement.unit(G, i), n + 1) for i in positions]
        in_cotrajectory = all(N.contains(orbit[k]) for orbit in orbits for k in range(n))
        h = Homomorphism.from_images(source, N.target, [N.evaluate(orbit[n]) for orbit in orbits])
        independent = kernel(h).order == 1
        checks.append(WitnessCheck(n, positions, in_cotrajectory, independent))
        logger.debug("witness step %d: in B_n %s, independent %s", n, in_cotrajectory, independent)
        if not (in_cotrajectory and independent):
            raise VerificationFailed(f"witness check failed at n = {n} for p = {p}, m = {m}, shift {shift}")
    return BernoulliCertificate(p, m, shift, n_start, n_max, tuple(checks))


def bernoulli_infinity(p: int, ms: Iterable[int], n_max: int, shift: str = "right") -> EntropyValue:
    """``ent* = infinity``, backed by certificates for every ``m`` in ``ms``."""
    certificates = [bernoulli_certificate(p, m, n_max, shift) for m in ms]
    return EntropyValue.infinite(certificates)
