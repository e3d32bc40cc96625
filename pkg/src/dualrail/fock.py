"""Multi-photon states as polynomials in creation operators.

A state is a complex-weighted sum of monomials, each monomial being a
product of creation operators acting on the vacuum.  Modes are labelled by
an opaque, totally ordered site identifier plus a polarization.  Linear
optics acts by substituting every creation operator with a linear
combination of creation operators (a mode map), expanding, and collecting
like terms.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

PRUNE_TOL = 1e-12
POLARIZATIONS = ("H", "V")
BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


class MissingModeError(LookupError):
    """A mode map has no image for an occupied mode."""


@dataclass(frozen=True, order=True)
class Mode:
    site: str
    pol: str = "H"

    def __post_init__(self):
        if self.pol not in POLARIZATIONS:
            raise ValueError(f"polarization must be H or V, got {self.pol!r}")

    def __str__(self):
        return f"{self.site}@{self.pol}"


@dataclass(frozen=True, order=True)
class Monomial:
    """Canonical multiset of modes: ``((mode, count), ...)`` sorted by mode."""

    occupancy: tuple[tuple[Mode, int], ...] = ()

    @classmethod
    def of(cls, *modes: Mode) -> "Monomial":
        return cls(tuple(sorted(Counter(modes).items())))

    @property
    def photon_number(self) -> int:
        return sum(n for _, n in self.occupancy)

    @property
    def bosonic_factor(self) -> int:
        """Squared norm of the bare monomial acting on the vacuum."""
        return math.prod(math.factorial(n) for _, n in self.occupancy)

    def modes(self) -> Iterator[Mode]:
        """Each mode repeated by its occupation number."""
        for mode, n in self.occupancy:
            for _ in range(n):
                yield mode

    def sites(self) -> set[str]:
        return {m.site for m, _ in self.occupancy}

    def __mul__(self, other: "Monomial") -> "Monomial":
        counts = Counter(dict(self.occupancy))
        counts.update(dict(other.occupancy))
        return Monomial(tuple(sorted(counts.items())))

    def __str__(self):
        return " ".join(f"{m}={n}" for m, n in self.occupancy) or "vac"


VACUUM = Monomial()


def _canonical_terms(terms: Iterable[tuple[Monomial, complex]], tol: float):
    merged: dict[Monomial, complex] = defaultdict(complex)
    for mono, amp in terms:
        merged[mono] += amp
    return tuple((m, complex(a)) for m, a in sorted(merged.items()) if abs(a) >= tol)


@dataclass(frozen=True)
class PhotonState:
    """Homogeneous superposition of creation-operator monomials.

    Construction canonicalizes: like terms are merged, amplitudes smaller than
    ``PRUNE_TOL`` are dropped and terms are ordered by monomial.  The empty
    state is the zero vector; ``PhotonState.vacuum()`` is the zero-photon
    state with unit amplitude.
    """

    terms: tuple[tuple[Monomial, complex], ...] = ()
    _index: Mapping[Monomial, complex] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = _canonical_terms(self.terms, PRUNE_TOL)
        numbers = {m.photon_number for m, _ in terms}
        if len(numbers) > 1:
            raise ValueError(f"state mixes photon numbers {sorted(numbers)}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_index", dict(terms))

    @classmethod
    def from_dict(cls, terms: Mapping[Monomial, complex]) -> "PhotonState":
        return cls(tuple(terms.items()))

    @classmethod
    def vacuum(cls) -> "PhotonState":
        return cls(((VACUUM, 1.0),))

    @classmethod
    def single(cls, site: str, pol: str = "H", amplitude: complex = 1.0) -> "PhotonState":
        return cls(((Monomial.of(Mode(site, pol)), amplitude),))

    @property
    def photon_number(self) -> int | None:
        return self.terms[0][0].photon_number if self.terms else None

    def amplitude(self, mono: Monomial) -> complex:
        return self._index.get(mono, 0j)

    def sites(self) -> set[str]:
        out: set[str] = set()
        for mono, _ in self.terms:
            out |= mono.sites()
        return out

    def norm(self) -> float:
        return math.sqrt(inner_product(self, self).real)

    def normalized(self) -> "PhotonState":
        return self * (1.0 / self.norm())

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "PhotonState") -> "PhotonState":
        return PhotonState(self.terms + other.terms)

    def __neg__(self) -> "PhotonState":
        return self * -1

    def __sub__(self, other: "PhotonState") -> "PhotonState":
        return self + (-other)

    def __mul__(self, other):
        """Scalar multiple, or the product of creation-operator polynomials."""
        if isinstance(other, PhotonState):
            acc: dict[Monomial, complex] = defaultdict(complex)
            for m1, a1 in self.terms:
                for m2, a2 in other.terms:
                    acc[m1 * m2] += a1 * a2
            return PhotonState.from_dict(acc)
        return PhotonState(tuple((m, a * other) for m, a in self.terms))

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __str__(self):
        return format_state(self)


def canonicalize(state: PhotonState, tol: float = PRUNE_TOL) -> PhotonState:
    """Re-merge and prune ``state``; idempotent."""
    return PhotonState(_canonical_terms(state.terms, tol))


def inner_product(s1: PhotonState, s2: PhotonState) -> complex:
    """Bosonic inner product <s1|s2>."""
    if len(s1) > len(s2):
        return inner_product(s2, s1).conjugate()
    total = 0j
    for mono, a1 in s1.terms:
        a2 = s2.amplitude(mono)
        if a2:
            total += a1.conjugate() * a2 * mono.bosonic_factor
    return total


def _site_images(mode_map, site: str, extend_identity: bool):
    images = mode_map.images.get(site)
    if images is None:
        if not extend_identity:
            raise MissingModeError(f"mode map undefined on occupied site {site!r}")
        return ((site, 1.0),)
    return images


def apply_mode_map(state: PhotonState, mode_map, *, extend_identity: bool = False) -> PhotonState:
    """Substitute every creation operator of ``state`` by its image.

    ``mode_map`` needs an ``images`` mapping ``site -> ((site, coeff), ...)``
    applied identically to both polarizations.  Sites absent from the map
    raise :class:`MissingModeError` unless ``extend_identity`` is set.
    """
    acc: dict[Monomial, complex] = defaultdict(complex)
    for mono, amp in state.terms:
        partial: dict[tuple[Mode, ...], complex] = {(): amp}
        for mode in mono.modes():
            images = _site_images(mode_map, mode.site, extend_identity)
            nxt: dict[tuple[Mode, ...], complex] = defaultdict(complex)
            for prefix, coeff in partial.items():
                for target, c in images:
                    nxt[prefix + (Mode(target, mode.pol),)] += coeff * c
            partial = nxt
        for modes, coeff in partial.items():
            acc[Monomial.of(*modes)] += coeff
    return PhotonState.from_dict(acc)


def _pair(site_a: str, pol_a: str, site_b: str, pol_b: str) -> PhotonState:
    return PhotonState(((Monomial.of(Mode(site_a, pol_a), Mode(site_b, pol_b)), 1.0),))


def make_bell(kind: str, site_a: str, site_b: str) -> PhotonState:
    """Normalized polarization Bell state shared by ``site_a`` and ``site_b``.

    ``phi+-`` = (a_H b_H +- a_V b_V)/sqrt2, ``psi+-`` = (a_H b_V +- a_V b_H)/sqrt2.
    """
    if site_a == site_b:
        raise ValueError("Bell state needs two distinct sites")
    if kind not in BELL_KINDS:
        raise ValueError(f"unknown Bell kind {kind!r}")
    sign = 1.0 if kind.endswith("+") else -1.0
    if kind.startswith("phi"):
        first, second = _pair(site_a, "H", site_b, "H"), _pair(site_a, "V", site_b, "V")
    else:
        first, second = _pair(site_a, "H", site_b, "V"), _pair(site_a, "V", site_b, "H")
    return (first + sign * second) / math.sqrt(2)


# -- line-oriented serialization ------------------------------------------------

def _fmt_float(x: float) -> str:
    if x == 0:
        x = 0.0  # no negative zero in output
    return repr(float(x))


def format_state(state: PhotonState) -> str:
    """One term per line: ``<re> <im> <site@pol=count>...``."""
    lines = []
    for mono, amp in state.terms:
        fields = [_fmt_float(amp.real), _fmt_float(amp.imag)]
        fields += [f"{m}={n}" for m, n in mono.occupancy]
        lines.append(" ".join(fields))
    return "\n".join(lines)


def parse_state(text: str) -> PhotonState:
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ValueError(f"line {lineno}: expected amplitude and modes")
        amp = complex(float(fields[0]), float(fields[1]))
        modes = []
        for tok in fields[2:]:
            label, _, count = tok.rpartition("=")
            site, _, pol = label.rpartition("@")
            if not site or not count.isdigit():
                raise ValueError(f"line {lineno}: bad mode token {tok!r}")
            modes += [Mode(site, pol)] * int(count)
        terms.append((Monomial.of(*modes), amp))
    return PhotonState(tuple(terms))


def global_phase_between(state: PhotonState, reference: PhotonState) -> complex:
    """Unit phase p with state ~= p * reference, or 0 when orthogonal."""
    ov = inner_product(reference, state)
    return ov / abs(ov) if abs(ov) > 0 else 0j


def max_amplitude_difference(s1: PhotonState, s2: PhotonState) -> float:
    monos = {m for m, _ in s1.terms} | {m for m, _ in s2.terms}
    return max((abs(s1.amplitude(m) - s2.amplitude(m)) for m in monos), default=0.0)
