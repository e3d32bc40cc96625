import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import settings

from dualrail.fock import Mode, Monomial, PhotonState

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def first_quantized(state: PhotonState, modes: list[Mode]) -> np.ndarray:
    """Symmetric n-index amplitude tensor normalized so that plain dot products
    reproduce the bosonic inner product.  Written from scratch for the tests."""
    n = state.photon_number or 0
    idx = {m: i for i, m in enumerate(modes)}
    out = np.zeros((len(modes),) * n, dtype=complex)
    for mono, amp in state.terms:
        seq = [idx[m] for m in mono.modes()]
        for perm in permutations(seq):
            out[perm] += amp
    return out / math.sqrt(math.factorial(n))


@pytest.fixture
def modes4():
    return [Mode(s, p) for s in ("x", "y") for p in ("H", "V")]


def mono(*labels) -> Monomial:
    """Monomial from 'site@pol' strings."""
    return Monomial.of(*(Mode(*lab.split("@")) for lab in labels))
