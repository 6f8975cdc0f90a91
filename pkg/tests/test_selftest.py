import pytest

from selftest import (
    conjugate_ladder,
    criterion_ladders,
    criterion_round_trip,
    criterion_set_grid,
    finite_chains,
    partial_isomorphisms,
    run_acceptance,
)
from chains import verify_ladder
from corpus import cycle, shuffled_copy
from span_calculus import greatest_dense_family
from structures import CategoryMode


def test_set_grid_criterion():
    row = criterion_set_grid(True, None)
    assert row["passed"], row["failures"]
    assert row["checked"] == 128


def test_round_trip_criterion():
    row = criterion_round_trip(True, None)
    assert row["passed"], row["failures"]


def test_partial_isomorphisms_match_the_greatest_family():
    X = cycle(3)
    Y = shuffled_copy(X, seed=4)
    assert greatest_dense_family(X, Y, CategoryMode.EMB).spans == partial_isomorphisms(X, Y)


def test_conjugate_ladders_satisfy_their_conclusion():
    for i, C in enumerate(finite_chains(True)[:6]):
        report = verify_ladder(conjugate_ladder(C, seed=i))
        assert not report.hypothesis_ok or report.conclusion_ok


def test_finite_chains_share_one_signature():
    chains = finite_chains(False)
    assert any(len(C.objects) == 3 for C in chains)
    for C in chains:
        assert len({X.signature for X in C.objects}) == 1, C.name


@pytest.mark.slow
def test_ladder_criterion():
    row = criterion_ladders(True, None)
    assert row["passed"], row["failures"]


@pytest.mark.slow
def test_quick_acceptance_suite():
    rows = run_acceptance(quick=True)
    failed = [row for row in rows if not row["passed"]]
    assert not failed, failed
