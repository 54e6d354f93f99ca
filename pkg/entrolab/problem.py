"""JSON problem files: decoding, encoding and dispatch.

A problem file is one JSON object::

    {
      "task": "entstar",
      "group": {"kind": "window", "base": ["2"], "index_set": "N"},
      "endomorphism": {"kind": "left_shift"},
      "topology": {"kind": "product"},
      "budget": {"base_prefix": "6"}
    }

Every integer is written as a decimal string so arbitrarily large values
survive the trip through JSON. Results are printed with sorted keys, so a
problem file always produces the same bytes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import singledispatch
from pathlib import Path
from typing import Any, Optional

from entrolab.config import Budget
from entrolab.duality import bridge_check
from entrolab.entropy import (
    EntropyValue,
    bernoulli_certificate,
    bernoulli_infinity,
    cotrajectory_indices,
    cover_oracle,
    ent_algebraic,
    ent_star_tau,
    h_star,
    h_top_linear,
)
from entrolab.errors import BudgetExhausted, NoStabilization, ProblemFormatError, VerificationFailed
from entrolab.finab import FinAbGroup, Homomorphism, Subgroup, subgroup_from_generators
from entrolab.linalg import IntMatrix, Lattice
from entrolab.topology import (
    ResidualReport,
    TopologyBase,
    discrete_base,
    explicit_base,
    natural_base,
    product_base,
    profinite_base,
    residual_subgroup,
)
from entrolab.window import (
    BandedEndo,
    LatticeEndo,
    LatticeGroup,
    WindowGroup,
    WindowSubgroup,
    banded,
    base_subgroup,
    identity_endo,
    left_shift,
    right_shift,
    two_sided_inverse,
    two_sided_shift,
    zero_endo,
)

TASKS = ("hstar", "entstar", "ent", "htop", "bridge", "bernoulli-cert", "residual", "cover")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

_DECIMAL = re.compile(r"-?[0-9]+")

_SHIFTS = {
    "identity": identity_endo,
    "zero": zero_endo,
    "right_shift": right_shift,
    "left_shift": left_shift,
    "two_sided_shift": two_sided_shift,
    "two_sided_inverse": two_sided_inverse,
}


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


# --- decoding ----------------------------------------------------------------


def _int(value: Any, where: str) -> int:
    if not isinstance(value, str) or not _DECIMAL.fullmatch(value):
        raise ProblemFormatError(f"{where}: expected a decimal string, got {value!r}")
    return int(value)


def _ints(values: Any, where: str) -> list[int]:
    if not isinstance(values, list):
        raise ProblemFormatError(f"{where}: expected a list")
    return [_int(v, f"{where}[{k}]") for k, v in enumerate(values)]


def _rows(values: Any, where: str) -> list[list[int]]:
    if not isinstance(values, list):
        raise ProblemFormatError(f"{where}: expected a list of rows")
    return [_ints(row, f"{where}[{k}]") for k, row in enumerate(values)]


def _section(data: Any, key: str) -> dict:
    if not isinstance(data, dict):
        raise ProblemFormatError(f"{key}: expected an object")
    return data


def _kind(data: dict, where: str) -> str:
    kind = data.get("kind")
    if not isinstance(kind, str):
        raise ProblemFormatError(f"{where}: missing \"kind\"")
    return kind


def decode_group(data: Any) -> Any:
    data = _section(data, "group")
    kind = _kind(data, "group")
    if kind == "finite":
        return FinAbGroup(tuple(_ints(data.get("moduli"), "group.moduli")))
    if kind == "lattice":
        return LatticeGroup(_int(data.get("rank"), "group.rank"))
    if kind == "window":
        base = FinAbGroup(tuple(_ints(data.get("base"), "group.base")))
        return WindowGroup(base, data.get("index_set", "N"), data.get("flavor", "direct_sum"))
    raise ProblemFormatError(f"group: unknown kind {kind!r}")


def decode_endomorphism(data: Any, G: Any) -> Any:
    data = _section(data, "endomorphism")
    kind = _kind(data, "endomorphism")
    if isinstance(G, WindowGroup):
        if kind in _SHIFTS:
            return _SHIFTS[kind](G)
        if kind == "banded":
            K = G.base
            pattern = []
            for q, phase in enumerate(data.get("pattern") or []):
                terms = []
                for t, term in enumerate(phase):
                    where = f"endomorphism.pattern[{q}][{t}]"
                    term = _section(term, where)
                    matrix = IntMatrix.from_rows(_rows(term.get("matrix"), f"{where}.matrix"), cols=K.rank)
                    terms.append((_int(term.get("displacement"), f"{where}.displacement"), Homomorphism(K, K, matrix)))
                pattern.append(terms)
            return banded(G, _int(data.get("offset", "0"), "endomorphism.offset"), pattern)
        raise ProblemFormatError(f"endomorphism: unknown kind {kind!r} on a window group")

    rank = G.rank
    if kind == "identity":
        matrix = IntMatrix.identity(rank)
    elif kind == "zero":
        matrix = IntMatrix.zeros(rank, rank)
    elif kind == "multiplication":
        matrix = IntMatrix.identity(rank).scaled(_int(data.get("factor"), "endomorphism.factor"))
    elif kind == "matrix":
        matrix = IntMatrix.from_rows(_rows(data.get("rows"), "endomorphism.rows"), cols=rank)
    else:
        raise ProblemFormatError(f"endomorphism: unknown kind {kind!r}")
    if isinstance(G, FinAbGroup):
        return Homomorphism(G, G, matrix)
    return LatticeEndo(G, matrix)


def decode_subgroup(data: Any, G: Any) -> Any:
    data = _section(data, "subgroup")
    if isinstance(G, FinAbGroup):
        generators = [G.element(g) for g in _rows(data.get("generators", []), "subgroup.generators")]
        return subgroup_from_generators(G, generators)
    if isinstance(G, LatticeGroup):
        columns = _rows(data.get("generators"), "subgroup.generators")
        return Lattice.from_generators(IntMatrix.from_columns(columns, rows=G.rank))
    if "base" in data:
        return base_subgroup(G, _int(data["base"], "subgroup.base"))
    lo, hi = _ints(data.get("window"), "subgroup.window")
    return WindowSubgroup.from_generators(G, lo, hi, _rows(data.get("generators", []), "subgroup.generators"))


def decode_topology(data: Any, G: Any, budget: Budget) -> TopologyBase:
    data = _section(data, "topology")
    kind = _kind(data, "topology")
    max_index = _int(data["max_index"], "topology.max_index") if "max_index" in data else None
    if kind == "profinite":
        return profinite_base(G, budget, max_index)
    if kind == "discrete":
        return discrete_base(G, budget, max_index)
    if kind == "natural":
        return natural_base(G)
    if kind == "product":
        return product_base(G)
    if kind == "explicit":
        members = [decode_subgroup(s, G) for s in data.get("subgroups") or []]
        exhaustive = data.get("exhaustive", True)
        if not isinstance(exhaustive, bool):
            raise ProblemFormatError("topology.exhaustive: expected true or false")
        return explicit_base(G, members, exhaustive)
    raise ProblemFormatError(f"topology: unknown kind {kind!r}")


def decode_budget(data: Any, base: Budget) -> Budget:
    if data is None:
        return base
    data = _section(data, "budget")
    return base.override(**{name: _int(value, f"budget.{name}") for name, value in data.items()})


# --- encoding ----------------------------------------------------------------


def _strs(values) -> list[str]:
    return [str(v) for v in values]


@singledispatch
def encode(obj: Any) -> Any:
    """JSON form of a domain object, readable back by the matching decoder."""
    raise TypeError(f"cannot encode {type(obj).__name__}")


@encode.register
def _(obj: FinAbGroup) -> dict:
    return {"kind": "finite", "moduli": _strs(obj.moduli)}


@encode.register
def _(obj: LatticeGroup) -> dict:
    return {"kind": "lattice", "rank": str(obj.rank)}


@encode.register
def _(obj: WindowGroup) -> dict:
    return {"kind": "window", "base": _strs(obj.base.moduli), "index_set": obj.index_set, "flavor": obj.flavor}


@encode.register
def _(obj: Homomorphism) -> dict:
    return {"kind": "matrix", "rows": [_strs(row) for row in obj.matrix.entries]}


@encode.register
def _(obj: LatticeEndo) -> dict:
    return {"kind": "matrix", "rows": [_strs(row) for row in obj.matrix.entries]}


@encode.register
def _(obj: BandedEndo) -> dict:
    if obj.kind in _SHIFTS:
        return {"kind": obj.kind}
    return {
        "kind": "banded",
        "offset": str(obj.offset),
        "pattern": [
            [{"displacement": str(t.displacement), "matrix": [_strs(r) for r in t.coefficient.matrix.entries]} for t in phase]
            for phase in obj.pattern
        ],
    }


@encode.register
def _(obj: Subgroup) -> dict:
    return {"generators": [_strs(g.coords) for g in obj.generators()]}


@encode.register
def _(obj: Lattice) -> dict:
    return {"generators": [_strs(c) for c in obj.basis.columns()]}


@encode.register
def _(obj: WindowSubgroup) -> dict:
    return {"window": _strs(obj.window), "generators": [_strs(g.coords) for g in obj.section.generators()]}


@encode.register
def _(obj: EntropyValue) -> dict:
    return obj.to_json()


@encode.register
def _(obj: ResidualReport) -> dict:
    return {
        "subgroup": encode(obj.subgroup) if obj.subgroup is not None else None,
        "trivial": obj.trivial,
        "exact": obj.exact,
        "rule": obj.rule,
        "examined": obj.examined,
    }


# --- problems ----------------------------------------------------------------


@dataclass
class Problem:
    task: str
    budget: Budget
    group: Any = None
    endomorphism: Any = None
    topology: Optional[TopologyBase] = None
    subgroup: Any = None
    params: dict = field(default_factory=dict)


def parse_problem(data: Any, base_budget: Optional[Budget] = None) -> Problem:
    """Decode a problem object.

    Raises:
        ProblemFormatError: the object does not follow the problem format.
    """
    if not isinstance(data, dict):
        raise ProblemFormatError("a problem file holds one JSON object")
    task = data.get("task")
    if task not in TASKS:
        raise ProblemFormatError(f"task must be one of {', '.join(TASKS)}, got {task!r}")
    try:
        budget = decode_budget(data.get("budget"), base_budget or Budget())
    except ProblemFormatError:
        raise
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from exc
    problem = Problem(task, budget)
    if task == "bernoulli-cert":
        problem.params = _section(data.get("certificate"), "certificate")
        return problem

    problem.group = decode_group(data.get("group"))
    if "endomorphism" in data:
        problem.endomorphism = decode_endomorphism(data["endomorphism"], problem.group)
    if "topology" in data:
        problem.topology = decode_topology(data["topology"], problem.group, budget)
    if "subgroup" in data:
        problem.subgroup = decode_subgroup(data["subgroup"], problem.group)
    if "steps" in data:
        problem.params["steps"] = _int(data["steps"], "steps")
    _require(problem)
    return problem


_NEEDS = {
    "hstar": ("endomorphism", "subgroup"),
    "entstar": ("endomorphism", "topology"),
    "ent": ("endomorphism",),
    "htop": ("endomorphism", "topology"),
    "bridge": ("endomorphism", "topology"),
    "residual": ("topology",),
    "cover": ("endomorphism", "subgroup"),
}


def _require(problem: Problem) -> None:
    for name in _NEEDS[problem.task]:
        if getattr(problem, name) is None:
            raise ProblemFormatError(f"task {problem.task!r} needs \"{name}\"")


def load_problem(path: Path, base_budget: Optional[Budget] = None) -> Problem:
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_problem(data, base_budget)


def _certificate(problem: Problem) -> tuple[int, dict]:
    params = problem.params
    p = _int(params.get("p"), "certificate.p")
    n_max = _int(params.get("n_max"), "certificate.n_max")
    shift = params.get("shift", "right")
    if "m_values" in params:
        value = bernoulli_infinity(p, _ints(params["m_values"], "certificate.m_values"), n_max, shift)
        return EXIT_OK, {"value": value.to_json()}
    m = _int(params.get("m"), "certificate.m")
    return EXIT_OK, {"certificate": bernoulli_certificate(p, m, n_max, shift).to_json()}


def _solve(problem: Problem, trace: bool, jobs: int) -> tuple[int, dict]:
    task, budget = problem.task, problem.budget
    phi = problem.endomorphism
    if task == "hstar":
        value, steps = h_star(phi, problem.subgroup, budget)
        result = {"value": value.to_json()}
        if trace:
            result["trace"] = steps.to_json()
        return EXIT_OK, result
    if task == "entstar":
        return EXIT_OK, {"value": ent_star_tau(phi, problem.topology, budget, jobs).to_json()}
    if task == "ent":
        return EXIT_OK, {"value": ent_algebraic(phi, budget, jobs).to_json()}
    if task == "htop":
        return EXIT_OK, {"value": h_top_linear(phi, problem.topology, budget, jobs).to_json()}
    if task == "bridge":
        report = bridge_check(phi, problem.topology, budget, problem.params.get("steps", 6), jobs)
        return (EXIT_OK if report.verdict != "mismatch" else EXIT_MISMATCH), report.to_json()
    if task == "residual":
        return EXIT_OK, {"residual": encode(residual_subgroup(problem.topology, budget.base_prefix))}
    if task == "cover":
        if isinstance(problem.group, LatticeGroup):
            raise ProblemFormatError("cover counting needs a finite or window group")
        n = problem.params.get("steps", 1)
        count = cover_oracle(phi, problem.subgroup, n, budget)
        index = cotrajectory_indices(phi, problem.subgroup, n)[-1]
        return (EXIT_OK if count == index else EXIT_MISMATCH), {"cover": count, "index": index, "n": n}
    return _certificate(problem)


def run_problem(problem: Problem, trace: bool = False, jobs: int = 1) -> tuple[int, dict]:
    """Solve a problem; returns the exit code and the JSON payload.

    Budget exhaustion and failed verification are reported in the payload;
    input errors propagate to the caller.
    """
    payload: dict[str, Any] = {"task": problem.task}
    try:
        code, result = _solve(problem, trace, jobs)
    except BudgetExhausted as exc:
        payload["error"] = {"kind": "BudgetExhausted", "message": str(exc)}
        if exc.partial is not None:
            payload["value"] = exc.partial.to_json()
        if trace and exc.trace is not None:
            payload["trace"] = exc.trace.to_json()
        return EXIT_BUDGET, payload
    except NoStabilization as exc:
        payload["error"] = {"kind": "NoStabilization", "message": str(exc)}
        return EXIT_BUDGET, payload
    except VerificationFailed as exc:
        payload["error"] = {"kind": "VerificationFailed", "message": str(exc)}
        return EXIT_MISMATCH, payload
    payload.update(result)
    return code, payload
