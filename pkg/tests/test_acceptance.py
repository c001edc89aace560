"""Acceptance gate: criteria 1-9, each printed as one PASS/FAIL line."""

import time

from cheapreal import suites
from conftest import ACCEPTANCE_LINES


def gate(number, title, run, limit=None, extra=lambda rep: ""):
    start = time.perf_counter()
    rep = run()
    seconds = time.perf_counter() - start
    ok = rep.passed and (limit is None or seconds < limit)
    budget = f" (limit {limit}s)" if limit is not None else ""
    detail = extra(rep)
    ACCEPTANCE_LINES.append(
        f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}: {rep.checks} checks, "
        f"{len(rep.failures)} failures, {seconds:.2f}s{budget}{detail}"
    )
    assert rep.passed, rep.failures[:5]
    if limit is not None:
        assert seconds < limit, f"{title} took {seconds:.2f}s"
    return rep


def test_criterion_1_shift_laws():
    gate(1, "shift laws", lambda: suites.shift_laws(200, 1001), limit=10)


def test_criterion_2_witnesses():
    rep = gate(2, "effectiveness witnesses", lambda: suites.witnesses(10**4), limit=30,
               extra=lambda r: f", {r.notes['chained_pairs']} chained pairs")
    assert rep.notes["validated_upto"] == 10**4


def test_criterion_3_renormalization():
    gate(3, "renormalization", lambda: suites.renormalization(500, 20))


def test_criterion_4_rice():
    gate(4, "rice field operations", lambda: suites.rice(1000, 20), limit=20)


def test_criterion_5_ivt():
    rep = gate(5, "IVT solver", lambda: suites.ivt(20, 20),
               extra=lambda r: f", slowest root "
                               f"{max(r.notes['seconds_per_root'].values()):.2f}s (limit 5s)")
    assert len(rep.notes["seconds_per_root"]) == 23
    assert max(rep.notes["seconds_per_root"].values()) < 5


def test_criterion_6_evt():
    gate(6, "EVT solver", lambda: suites.evt(100), limit=10)


def test_criterion_7_join():
    gate(7, "one-sided join", lambda: suites.join(50, 20))


def test_criterion_8_continuity():
    gate(8, "continuity checkers", lambda: suites.continuity(1000))


def test_criterion_9_trilean():
    rep = gate(9, "trilean honesty", lambda: suites.trilean_honesty(1000),
               extra=lambda r: f", unknown rate {r.notes['unknown_rate']}")
    assert 0 <= rep.notes["unknown_rate"] < 1
