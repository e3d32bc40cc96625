import itertools
import math

import numpy as np
import pytest

from dualrail.elements import (
    GROVER,
    McuControl,
    bs_map,
    grover_map,
    mcu_transfer,
    phase_bit,
    phase_map,
    required_control,
    unit_phase,
)
from dualrail.engine import Insertion, PhaseSchedule, simulate, single_unit
from dualrail.fock import Mode, Monomial
from dualrail.topology import Endpoint, port_site

PI = math.pi


def test_bs_matrix_matches_hand_written_form():
    mat, rows, cols = bs_map("e", "f", "a", "b").matrix()
    assert rows == ["a", "b"] and cols == ["e", "f"]
    expected = np.array([[1, 1], [-1, 1]]) / math.sqrt(2)
    assert np.allclose(mat, expected, atol=1e-15)


def test_bs_and_grover_unitary():
    assert bs_map("e", "f", "a", "b").is_unitary(1e-12)
    assert grover_map("a", "b", "c", "d").is_unitary(1e-12)


def test_grover_self_inverse():
    g, _, _ = grover_map("a", "b", "c", "d").matrix()
    assert np.abs(g @ g - np.eye(4)).max() < 1e-12
    assert np.allclose(GROVER, GROVER.T)


def test_grover_row_content():
    g, _, cols = grover_map("a", "b", "c", "d").matrix()
    assert cols == ["a", "b", "c", "d"]
    assert np.allclose(g[:, 0], [-0.5, 0.5, 0.5, 0.5])


def test_inverse_undoes_map():
    m = bs_map("e", "f", "a", "b")
    round_trip = m.then(m.inverse())
    mat, rows, cols = round_trip.matrix()
    assert rows == cols == ["e", "f"]
    assert np.allclose(mat, np.eye(2), atol=1e-15)


def test_phase_exact_on_quarter_turns():
    assert unit_phase(PI) == -1
    assert unit_phase(PI / 2) == 1j
    assert abs(unit_phase(0.3) - np.exp(0.3j)) < 1e-15
    assert phase_map("b", PI).image("b") == (("b", -1 + 0j),)


def test_element_sites_must_be_distinct():
    with pytest.raises(ValueError):
        bs_map("e", "e", "a", "b")
    with pytest.raises(ValueError):
        grover_map("a", "a", "c", "d")


@pytest.mark.parametrize("phi,bit", [(0, 0), (PI, 1), (-PI, 1), (3 * PI, 1), (2 * PI, 0)])
def test_phase_bit(phi, bit):
    assert phase_bit(phi) == bit


def test_phase_bit_rejects_other_phases():
    with pytest.raises(ValueError):
        phase_bit(PI / 2)


def test_single_photon_bs_image():
    # e -> (a - b)/sqrt2
    assert bs_map("e", "f", "a", "b").image("e") == (("a", 1 / math.sqrt(2)), ("b", -1 / math.sqrt(2)))


CASES = list(itertools.product("ef", (0, PI), (0, PI), (0, PI)))


@pytest.mark.parametrize("port,entry,far,near", CASES)
def test_closed_form_transfer_agrees_with_engine(port, entry, far, near):
    """All 16 entry/phase combinations on one unit against a full simulation."""
    ctl = McuControl(entry, far, near)
    expected = mcu_transfer(port, ctl)
    sched = PhaseSchedule("active", {("C", "L", 1): entry, ("C", "L", 3): near, ("C", "R", 3): far})
    final, _ = simulate(single_unit(), [Insertion("C", "L", (port,), "single", ("H",))], sched, 3)
    side = "R" if expected.outcome == "transmit" else "L"
    site = port_site(Endpoint("C", side, expected.exit_port))
    assert len(final) == 1
    assert abs(final.amplitude(Monomial.of(Mode(site, "H"))) - expected.sign) < 1e-12


@pytest.mark.parametrize("port,outcome,exit_port", list(itertools.product("ef", ("transmit", "reflect"), "ef")))
def test_required_control_inverts_transfer(port, outcome, exit_port):
    got = mcu_transfer(port, required_control(port, outcome, exit_port))
    assert (got.outcome, got.exit_port) == (outcome, exit_port)


def test_zero_phase_transfer_table():
    # e reflects back to e, f transmits to the far f
    assert mcu_transfer("e", McuControl()) == ("reflect", "e", -1)
    assert mcu_transfer("f", McuControl()) == ("transmit", "f", 1)
