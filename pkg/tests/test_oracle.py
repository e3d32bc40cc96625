import math

import numpy as np
import pytest

from dualrail.engine import Insertion, PhaseSchedule, simulate, single_unit
from dualrail.fock import inner_product, make_bell, max_amplitude_difference
from dualrail.oracle import dense_oracle, oracle_check, random_scenario
from dualrail.topology import layered_tree

PI = math.pi


def test_phiplus_recomputed_by_oracle():
    ref = dense_oracle(single_unit(), [Insertion("C", "L")], PhaseSchedule(), 3)
    assert abs(inner_product(make_bell("phi+", "C:Le", "C:Rf"), ref) + 1) < 1e-12


def test_tick_matrices_unitary():
    mats = []
    sched = PhaseSchedule("active", {("C", "L", 1): PI, ("C/Rf", "R", 7): PI})
    dense_oracle(layered_tree(2), [Insertion("C", "L", tap=True)], sched, 8, unitaries=mats)
    assert len(mats) == 8
    for u in mats:
        assert np.abs(u.conj().T @ u - np.eye(len(u))).max() < 1e-12


@pytest.mark.parametrize("kind", ["phi+", "phi-", "psi+", "psi-", "product"])
@pytest.mark.parametrize("phases", [(0, 0, 0, 0), (PI, 0, 0, PI), (0, PI, PI, 0), (PI, PI, PI, PI)])
def test_single_unit_agreement(kind, phases):
    entries = dict(zip([("C", "L", 1), ("C", "R", 1), ("C", "L", 3), ("C", "R", 3)], phases))
    sched = PhaseSchedule("active", entries)
    ins = [Insertion("C", "L", ("e", "f"), kind, ("H", "V"))]
    final, _ = simulate(single_unit(), ins, sched, 4)
    assert max_amplitude_difference(final, dense_oracle(single_unit(), ins, sched, 4)) < 1e-9


def test_general_phase_agreement():
    sched = PhaseSchedule("passive", {("C", "L", None): 0.7, ("C", "R", None): -2.1})
    ins = [Insertion("C", "L", ("e", "f"), "psi+")]
    final, _ = simulate(single_unit(), ins, sched, 4)
    assert max_amplitude_difference(final, dense_oracle(single_unit(), ins, sched, 4)) < 1e-9


def test_random_scenarios_seeded():
    a = random_scenario(np.random.default_rng(5))
    b = random_scenario(np.random.default_rng(5))
    assert a == b


def test_oracle_check_small_batch():
    res = oracle_check(seed=7, trials=15)
    assert res["max_amplitude_deviation"] < 1e-9
    assert res["max_norm_deviation"] < 1e-9
