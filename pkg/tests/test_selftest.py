"""Tests for the invariant suites."""

import random

import numpy as np
import pytest

from entrolab.selftest import (
    EXHAUSTIVE_ENDOMORPHISMS,
    SUITES,
    SuiteReport,
    _endomorphisms,
    _table_chains,
    run_suites,
    subgroup_table,
)
from entrolab.duality import annihilator, dual_hom
from entrolab.entropy import cotrajectory_indices, trajectory_sizes
from entrolab.errors import AmbientMismatch
from entrolab.finab import FinAbGroup, Homomorphism, abelian_groups_up_to, count_endomorphisms, subgroup_sum
from entrolab.linalg import IntMatrix


@pytest.mark.parametrize("name", ["linalg", "finab", "duality", "window", "bridge", "certificate"])
def test_default_suites_pass(name):
    (report,) = run_suites([name])
    assert report.ok, report.failures
    assert report.passed > 0


def test_entropy_suite_checks_two_hundred_monotonicity_pairs():
    (report,) = run_suites(["entropy"])
    assert report.ok, report.failures
    assert report.passed >= 400


@pytest.mark.slow
@pytest.mark.parametrize("name", ["duality", "bridge"])
def test_exhaustive_suites_pass(name):
    (report,) = run_suites([name], exhaustive=True)
    assert report.ok, report.failures


def test_unknown_suite_rejected():
    with pytest.raises(ValueError, match="unknown suites"):
        run_suites(["linalg", "astrology"])


def test_suites_are_reproducible():
    first = run_suites(["finab"], seed=7)[0]
    second = run_suites(["finab"], seed=7)[0]
    assert first.to_json() == second.to_json()


def test_guard_counts_library_errors_as_failures():
    report = SuiteReport("demo")

    def mismatched():
        raise AmbientMismatch("Z(2) and Z(3)")

    report.guard("mismatch", mismatched)
    report.check(True, "fine")
    assert (report.passed, report.failed) == (1, 1)
    assert report.failures == ["mismatch: AmbientMismatch: Z(2) and Z(3)"]
    assert not report.ok
    assert set(SUITES) >= {"linalg", "bridge", "oracle"}


def test_every_group_up_to_order_16_is_enumerated_in_full():
    for G in abelian_groups_up_to(16):
        assert count_endomorphisms(G) <= EXHAUSTIVE_ENDOMORPHISMS
    rng = random.Random(0)
    G = FinAbGroup((2, 2, 2))
    assert sum(1 for _ in _endomorphisms(G, True, rng, 6)) == 512
    sampled = list(_endomorphisms(G, False, rng, 6))
    assert len(sampled) == 6
    assert all(phi.source == G and phi.target == G for phi in sampled)


def test_subgroup_table():
    G = FinAbGroup((2, 4))
    table = subgroup_table(G)
    assert subgroup_table(G) is table
    count = len(table.subgroups)
    assert count == 8
    assert table.lookup(table.members).tolist() == list(range(count))
    assert table.sizes.tolist() == [H.order for H in table.subgroups]
    assert table.subgroups[table.perp[0]] == annihilator(table.subgroups[0])
    assert table.element_map(Homomorphism.identity(G)).tolist() == list(range(G.order))
    for i, A in enumerate(table.subgroups):
        for j, B in enumerate(table.subgroups):
            k = table.lookup(table.sums(table.members[[i]], table.members[[j]]))[0]
            assert table.subgroups[k] == subgroup_sum(A, B)
    # a set that is not a subgroup
    mask = np.zeros((1, G.order), dtype=bool)
    mask[0, 1] = True
    assert table.lookup(mask)[0] == -1
    assert table.perp_of(np.array([-1]))[0] == -2
    with pytest.raises(ValueError, match="at most 62"):
        subgroup_table(FinAbGroup((64,)))


def test_table_chains_match_the_library():
    G = FinAbGroup((2, 4))
    table = subgroup_table(G)
    phi = Homomorphism(G, G, IntMatrix.from_rows([[1, 1], [2, 3]]))
    indices, orders = _table_chains(table, phi, 4)
    for s, N in enumerate(table.subgroups):
        assert indices[:, s].tolist() == cotrajectory_indices(phi, N, 4)
        assert orders[:, s].tolist() == trajectory_sizes(dual_hom(phi), annihilator(N), 4)
