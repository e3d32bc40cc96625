import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from dualrail.elements import ModeMap
from dualrail.fock import (
    MissingModeError,
    Mode,
    Monomial,
    PhotonState,
    apply_mode_map,
    canonicalize,
    format_state,
    inner_product,
    make_bell,
    max_amplitude_difference,
    parse_state,
)

from conftest import first_quantized, mono

MODES = [Mode(s, p) for s in ("x", "y", "z") for p in ("H", "V")]
amplitudes = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@st.composite
def states(draw, n=None):
    n = draw(st.integers(1, 2)) if n is None else n
    k = draw(st.integers(1, 4))
    terms = []
    for _ in range(k):
        modes = draw(st.lists(st.sampled_from(MODES), min_size=n, max_size=n))
        terms.append((Monomial.of(*modes), draw(amplitudes)))
    return PhotonState(tuple(terms))


def test_vacuum_is_multiplicative_identity():
    s = PhotonState.single("x", "H", 0.5)
    assert (PhotonState.vacuum() * s) == s
    assert PhotonState.vacuum().norm() == 1.0


def test_empty_state_is_zero_vector():
    assert PhotonState().norm() == 0.0
    assert not PhotonState()


def test_doubly_occupied_mode_carries_factorial_norm():
    s = PhotonState(((mono("x@H", "x@H"), 1.0),))
    assert math.isclose(s.norm(), math.sqrt(2))


def test_mixed_photon_numbers_rejected():
    with pytest.raises(ValueError):
        PhotonState(((mono("x@H"), 1.0), (mono("x@H", "y@H"), 1.0)))


def test_tiny_amplitudes_pruned_and_terms_merged():
    s = PhotonState(((mono("x@H"), 1.0), (mono("x@H"), 1e-13), (mono("y@H"), 1e-13)))
    assert len(s) == 1
    assert s.amplitude(mono("x@H")) == 1.0 + 1e-13


def test_canonical_form_ignores_term_order():
    a = PhotonState(((mono("x@H"), 1.0), (mono("y@V"), 2j)))
    b = PhotonState(((mono("y@V"), 2j), (mono("x@H"), 1.0)))
    assert a == b
    assert canonicalize(a) == a


def test_monomial_is_commutative():
    assert mono("x@H", "y@V") == mono("y@V", "x@H")


@given(states(), states())
def test_inner_product_matches_first_quantized_oracle(s1, s2):
    if s1.photon_number != s2.photon_number:
        assert inner_product(s1, s2) == 0
        return
    t1, t2 = first_quantized(s1, MODES), first_quantized(s2, MODES)
    assert abs(inner_product(s1, s2) - np.vdot(t1, t2)) < 1e-9


@given(states(), states())
def test_inner_product_conjugate_symmetric(s1, s2):
    assert abs(inner_product(s1, s2) - inner_product(s2, s1).conjugate()) < 1e-9


@given(states(n=2), states(n=2), amplitudes)
def test_inner_product_linear_in_second_argument(s1, s2, c):
    lhs = inner_product(s1, s1 + c * s2)
    rhs = inner_product(s1, s1) + c * inner_product(s1, s2)
    assert abs(lhs - rhs) < 1e-8


def _random_map(seed):
    u = unitary_group.rvs(3, random_state=seed)
    sites = ["x", "y", "z"]
    return ModeMap({s: tuple((sites[j], u[j, i]) for j in range(3)) for i, s in enumerate(sites)})


@given(states(), st.integers(0, 10_000))
def test_unitary_mode_map_preserves_norm(s, seed):
    out = apply_mode_map(s, _random_map(seed))
    assert abs(out.norm() - s.norm()) < 1e-9


@given(states(), st.integers(0, 10_000), st.integers(0, 10_000))
def test_mode_map_composition(s, seed1, seed2):
    m1, m2 = _random_map(seed1), _random_map(seed2)
    stepwise = apply_mode_map(apply_mode_map(s, m1), m2)
    assert max_amplitude_difference(apply_mode_map(s, m1.then(m2)), stepwise) < 1e-9


@given(states(n=2), states(n=2), amplitudes, st.integers(0, 10_000))
def test_mode_map_is_linear(s1, s2, c, seed):
    m = _random_map(seed)
    lhs = apply_mode_map(s1 + c * s2, m)
    rhs = apply_mode_map(s1, m) + c * apply_mode_map(s2, m)
    assert max_amplitude_difference(lhs, rhs) < 1e-8


def test_mode_map_must_cover_occupied_sites():
    m = ModeMap({"x": (("y", 1.0),)})
    with pytest.raises(MissingModeError):
        apply_mode_map(PhotonState.single("z"), m)
    assert apply_mode_map(PhotonState.single("z"), m, extend_identity=True) == PhotonState.single("z")


def test_bell_states_orthonormal():
    kinds = ("phi+", "phi-", "psi+", "psi-")
    for a in kinds:
        for b in kinds:
            ov = inner_product(make_bell(a, "x", "y"), make_bell(b, "x", "y"))
            assert abs(ov - (a == b)) < 1e-12


def test_bell_rejects_same_site_and_unknown_kind():
    with pytest.raises(ValueError):
        make_bell("phi+", "x", "x")
    with pytest.raises(ValueError):
        make_bell("chi", "x", "y")


@given(states())
def test_text_round_trip(s):
    assert max_amplitude_difference(parse_state(format_state(s)), s) == 0
