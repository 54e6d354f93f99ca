"""Entrolab: exact entropy of endomorphisms of discrete and linearly topologized abelian groups.

This package computes adjoint algebraic entropy, topological adjoint entropy,
algebraic entropy and topological entropy of group endomorphisms as exact
symbolic values ``log(alpha)``, and checks the duality theorems that relate
them on finite abelian groups and on direct sums and products of a finite
group over N or Z.

Example usage as a library:
    from entrolab import Budget, FinAbGroup, WindowGroup, ent_star_tau, left_shift, product_base

    G = WindowGroup(FinAbGroup((2,)))
    value = ent_star_tau(left_shift(G), product_base(G), Budget(base_prefix=4))
    print(value)            # log 2

    # Or solve a problem file
    from entrolab import load_problem, run_problem

    code, payload = run_problem(load_problem("problems/shift_entropy.json"))
"""

__version__ = "0.1.0"

from entrolab.config import Budget, ConfigManager, EntrolabConfig
from entrolab.logger import ComputationLogger, setup_logger
from entrolab.finab import FinAbGroup, Homomorphism, Subgroup
from entrolab.window import (
    LatticeEndo,
    LatticeGroup,
    WindowGroup,
    WindowSubgroup,
    left_shift,
    right_shift,
    two_sided_shift,
)
from entrolab.topology import TopologyBase, product_base, profinite_base
from entrolab.entropy import EntropyValue, bernoulli_certificate, ent_algebraic, ent_star, ent_star_tau, h_star
from entrolab.duality import bridge_check, dual_hom
from entrolab.problem import load_problem, run_problem
from entrolab.cli import CLIInterface, main

__all__ = [
    "Budget",
    "ConfigManager",
    "EntrolabConfig",
    "ComputationLogger",
    "setup_logger",
    "FinAbGroup",
    "Homomorphism",
    "Subgroup",
    "LatticeEndo",
    "LatticeGroup",
    "WindowGroup",
    "WindowSubgroup",
    "left_shift",
    "right_shift",
    "two_sided_shift",
    "TopologyBase",
    "product_base",
    "profinite_base",
    "EntropyValue",
    "bernoulli_certificate",
    "ent_algebraic",
    "ent_star",
    "ent_star_tau",
    "h_star",
    "bridge_check",
    "dual_hom",
    "load_problem",
    "run_problem",
    "CLIInterface",
    "main",
]
