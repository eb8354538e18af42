"""Acceptance gate: every headline criterion at its pinned tolerance.

Run with ``pytest -s tests/test_acceptance.py`` to see one verdict line per
criterion (the same lines the ``matrep accept`` command prints).
"""

import pytest

from matrep import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
