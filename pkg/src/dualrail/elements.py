"""Optical elements of a control unit, written as mode maps.

Every element acts identically on H and V, so a :class:`ModeMap` only maps
sites to linear combinations of sites; the polarization rides along.

Also holds the closed-form transfer rule of one control unit (entry beam
splitter, entry phase, Grover four-port, exit phase, exit beam splitter) for
phases restricted to {0, pi}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

SQRT_HALF = 1 / math.sqrt(2)


@dataclass(frozen=True)
class ModeMap:
    """Linear substitution ``site -> sum_j c_j * site_j``, polarization-diagonal."""

    images: Mapping[str, tuple[tuple[str, complex], ...]]

    def __post_init__(self):
        frozen = {s: tuple((t, complex(c)) for t, c in img) for s, img in self.images.items()}
        object.__setattr__(self, "images", frozen)

    @property
    def domain(self) -> list[str]:
        return sorted(self.images)

    @property
    def codomain(self) -> list[str]:
        return sorted({t for img in self.images.values() for t, _ in img})

    def image(self, site: str) -> tuple[tuple[str, complex], ...]:
        return self.images.get(site, ((site, 1.0),))

    def matrix(self) -> tuple[np.ndarray, list[str], list[str]]:
        """Coefficient matrix with rows indexed by codomain, columns by domain."""
        rows, cols = self.codomain, self.domain
        r = {s: i for i, s in enumerate(rows)}
        mat = np.zeros((len(rows), len(cols)), dtype=complex)
        for j, s in enumerate(cols):
            for t, c in self.images[s]:
                mat[r[t], j] += c
        return mat, rows, cols

    def is_unitary(self, tol: float = 1e-12) -> bool:
        mat, rows, cols = self.matrix()
        if len(rows) != len(cols):
            return False
        eye = np.eye(len(cols))
        return bool(np.allclose(mat.conj().T @ mat, eye, atol=tol, rtol=0)
                    and np.allclose(mat @ mat.conj().T, eye, atol=tol, rtol=0))

    def inverse(self) -> "ModeMap":
        """Conjugate transpose; the true inverse when the map is unitary."""
        out: dict[str, list[tuple[str, complex]]] = {t: [] for t in self.codomain}
        for s, img in self.images.items():
            for t, c in img:
                out[t].append((s, complex(c).conjugate()))
        return ModeMap({t: tuple(v) for t, v in out.items()})

    def then(self, other: "ModeMap") -> "ModeMap":
        """Apply ``self`` first, then ``other`` (identity where ``other`` is undefined)."""
        out = {}
        for s, img in self.images.items():
            acc: dict[str, complex] = {}
            for t, c in img:
                for u, d in other.image(t):
                    acc[u] = acc.get(u, 0j) + c * d
            out[s] = tuple((u, a) for u, a in sorted(acc.items()) if abs(a) > 0)
        return ModeMap(out)

    def __or__(self, other: "ModeMap") -> "ModeMap":
        """Disjoint union of two maps acting on separate sites."""
        overlap = set(self.images) & set(other.images)
        if overlap:
            raise ValueError(f"maps overlap on {sorted(overlap)}")
        return ModeMap({**self.images, **other.images})


def identity_map(sites) -> ModeMap:
    return ModeMap({s: ((s, 1.0),) for s in sites})


def _require_distinct(*sites):
    if len(set(sites)) != len(sites):
        raise ValueError(f"element sites must be distinct, got {sites}")


def bs_map(in_top: str, in_bottom: str, out_top: str, out_bottom: str) -> ModeMap:
    """Balanced beam splitter: top -> (top - bottom)/sqrt2, bottom -> (top + bottom)/sqrt2."""
    _require_distinct(in_top, in_bottom, out_top, out_bottom)
    return ModeMap({
        in_top: ((out_top, SQRT_HALF), (out_bottom, -SQRT_HALF)),
        in_bottom: ((out_top, SQRT_HALF), (out_bottom, SQRT_HALF)),
    })


GROVER = 0.5 * (np.ones((4, 4)) - 2 * np.eye(4))


def grover_map(a: str, b: str, c: str, d: str) -> ModeMap:
    """Grover four-port: each port -> (-self + sum of the other three)/2."""
    _require_distinct(a, b, c, d)
    ports = (a, b, c, d)
    return ModeMap({p: tuple((q, GROVER[j, i]) for j, q in enumerate(ports)) for i, p in enumerate(ports)})


def unit_phase(phi: float) -> complex:
    """exp(i*phi), exact at multiples of pi/2."""
    quarter = phi / (math.pi / 2)
    if abs(quarter - round(quarter)) < 1e-12:
        return (1, 1j, -1, -1j)[round(quarter) % 4]
    return cmath.exp(1j * phi)


def phase_map(rail: str, phi: float) -> ModeMap:
    return ModeMap({rail: ((rail, unit_phase(phi)),)})


# -- closed-form control unit transfer -----------------------------------------

class Transfer(NamedTuple):
    outcome: str  # "transmit" | "reflect"
    exit_port: str  # "e" | "f"
    sign: int


@dataclass(frozen=True)
class McuControl:
    """Phases seen by one photon crossing a unit.

    ``entry_phase`` is the entry-side shifter at the entry tick,
    ``exit_phase_far`` the opposite-side shifter and ``exit_phase_near`` the
    entry-side shifter at the exit tick.
    """

    entry_phase: float = 0.0
    exit_phase_far: float = 0.0
    exit_phase_near: float = 0.0


def phase_bit(phi: float, tol: float = 1e-9) -> int:
    """0 for phase 0, 1 for phase pi (mod 2 pi); anything else is rejected."""
    r = math.remainder(phi, 2 * math.pi)
    if abs(r) < tol:
        return 0
    if abs(abs(r) - math.pi) < tol:
        return 1
    raise ValueError(f"phase {phi!r} is not 0 or pi; use the engine for general phases")


def entry_sign(port: str) -> int:
    """Relative rail sign produced by the entry beam splitter."""
    if port not in ("e", "f"):
        raise ValueError(f"port must be 'e' or 'f', got {port!r}")
    return -1 if port == "e" else 1


def mcu_transfer(entry_port: str, control: McuControl) -> Transfer:
    sign = entry_sign(entry_port) * (-1) ** phase_bit(control.entry_phase)
    if sign > 0:
        return Transfer("transmit", "e" if phase_bit(control.exit_phase_far) else "f", 1)
    return Transfer("reflect", "f" if phase_bit(control.exit_phase_near) else "e", -1)


def required_control(entry_port: str, outcome: str, exit_port: str) -> McuControl:
    """Phases that make a photon entering ``entry_port`` leave as requested."""
    want = 1 if outcome == "transmit" else -1
    entry = 0.0 if entry_sign(entry_port) == want else math.pi
    if exit_port not in ("e", "f"):
        raise ValueError(f"port must be 'e' or 'f', got {exit_port!r}")
    if outcome == "transmit":
        return McuControl(entry, exit_phase_far=0.0 if exit_port == "f" else math.pi)
    if outcome == "reflect":
        return McuControl(entry, exit_phase_near=0.0 if exit_port == "e" else math.pi)
    raise ValueError(f"unknown outcome {outcome!r}")
