"""Acceptance gate: every criterion at its stated tolerance and runtime budget.

Each criterion prints one ``[PASS]``/``[FAIL]`` line to the terminal (also without ``-s``).
"""
import pytest

from adswk.acceptance import CRITERIA, run_criterion


def _report(capsys, v):
    with capsys.disabled():
        print("\n" + v.line())
        if v.error:
            print("    " + v.error.strip().splitlines()[0])


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    v = run_criterion(cid)
    _report(capsys, v)
    assert v.passed, v.error or v.measured
    assert v.runtime_s <= v.runtime_budget_s


@pytest.mark.parametrize("cid", [4, 7])
def test_mutation_is_caught(cid, capsys):
    kw = {"mutate": True}
    if cid == 7:
        # a smaller grid suffices to expose the wrong reflection sign
        kw["config"] = {"nx": 256, "ny": 256, "width_cells": 8, "wavelength_cells": 8,
                        "search_radius_cells": 16}
    v = run_criterion(cid, **kw)
    _report(capsys, v)
    assert not v.passed
