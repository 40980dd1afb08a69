"""Acceptance criteria 1..9 at their stated parameters.

Each test prints one line "criterion N: PASS|FAIL (checks, seconds)" straight
to the terminal, so the lines show up in a plain ``pytest -v`` run.
"""

import time

import pytest

from voalab.suites import acceptance_criterion


def _failures(result):
    return [(r["suite"], r["n_failures"], r["failures"][:3]) for r in result["reports"] if not r["pass"]]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    t0 = time.perf_counter()
    result = acceptance_criterion(n)
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        status = "PASS" if result["pass"] else "FAIL"
        print(f"\ncriterion {n}: {status} ({result['checked']} checks, {elapsed:.1f}s) {result['title']}")
    assert result["checked"] > 0
    assert result["pass"], _failures(result)


def test_sewing_probe_radius():
    # the Heisenberg four-point sewing series has radius of convergence |z1| = 1/2 at q = 1/2
    rep = acceptance_criterion(8)["reports"][0]
    assert rep["probe_within_10_percent"]
    assert abs(rep["probe"]["radius"] - 0.5) <= 0.05
