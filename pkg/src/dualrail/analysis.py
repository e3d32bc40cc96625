"""Entanglement and exit-port metrics on final states."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .elements import ModeMap
from .engine import Insertion
from .fock import POLARIZATIONS, Monomial, PhotonState, apply_mode_map, inner_product, make_bell
from .planner import DEFAULT_HOP_CAP, reachable_exits
from .topology import Endpoint, Topology, port_site, split_exit_bin

NORM_TOL = 1e-9


def _require_normalized(state: PhotonState, name: str):
    n = state.norm()
    if abs(n - 1) > NORM_TOL:
        raise ValueError(f"{name} is not normalized (norm {n:.12g})")


def fidelity(state: PhotonState, reference: PhotonState) -> float:
    """|<reference|state>|^2 for normalized pure states."""
    _require_normalized(state, "state")
    _require_normalized(reference, "reference")
    return min(1.0, abs(inner_product(reference, state)) ** 2)


def collapse_exit_bins(state: PhotonState) -> PhotonState:
    """Relabel exit-bin sites with their port site, dropping the exit tick.

    Only meaningful when no two photons left through the same port.
    """
    images = {}
    for site in state.sites():
        split = split_exit_bin(site)
        if split is not None:
            images[site] = ((split[0], 1.0),)
    return apply_mode_map(state, ModeMap(images), extend_identity=True) if images else state


def reduced_polarization_dm(state: PhotonState, site: str) -> np.ndarray:
    """Polarization density matrix (H, V basis) of the photon at ``site``.

    Every term must hold exactly one photon at ``site``; the remaining
    photons are traced out.  The result is normalized to unit trace.
    """
    state = collapse_exit_bins(state)
    idx = {p: i for i, p in enumerate(POLARIZATIONS)}
    by_rest: dict[Monomial, np.ndarray] = defaultdict(lambda: np.zeros(2, dtype=complex))
    for mono, amp in state.terms:
        here = [(m, n) for m, n in mono.occupancy if m.site == site]
        if sum(n for _, n in here) != 1:
            raise ValueError(f"term {mono} does not hold exactly one photon at {site}")
        (mode, _), = here
        rest = Monomial(tuple((m, n) for m, n in mono.occupancy if m.site != site))
        by_rest[rest][idx[mode.pol]] += amp * np.sqrt(rest.bosonic_factor)
    rho = np.zeros((2, 2), dtype=complex)
    for vec in by_rest.values():
        rho += np.outer(vec, vec.conj())
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("state has no amplitude")
    return rho / tr


@dataclass
class ExitDistribution:
    """Probability per set of terminal ports (coincidence keys).

    Keys are sorted tuples of port sites, one entry per photon; with
    polarization keying each entry is ``"<port>@<pol>"``.  ``residual``
    is the probability of terms with a photon still inside the network.
    """

    probabilities: dict[tuple[str, ...], float] = field(default_factory=dict)
    residual: float = 0.0

    @property
    def total(self) -> float:
        return sum(self.probabilities.values()) + self.residual

    def get(self, *ports) -> float:
        return self.probabilities.get(tuple(sorted(str(p) for p in ports)), 0.0)

    def marginal(self, *ports) -> float:
        """Probability that the listed ports all fire (other photons anywhere)."""
        need = sorted(str(p) for p in ports)
        total = 0.0
        for key, p in self.probabilities.items():
            rest = list(key)
            try:
                for port in need:
                    rest.remove(port)
            except ValueError:
                continue
            total += p
        return total

    def dominant(self) -> tuple[tuple[str, ...], float] | None:
        if not self.probabilities:
            return None
        key = max(sorted(self.probabilities), key=lambda k: self.probabilities[k])
        return key, self.probabilities[key]


def exit_distribution(state: PhotonState, t: Topology, by_polarization: bool = False) -> ExitDistribution:
    free = {port_site(ep) for ep in t.free_ports}
    probs: dict[tuple[str, ...], float] = defaultdict(float)
    residual = 0.0
    for mono, amp in state.terms:
        p = abs(amp) ** 2 * mono.bosonic_factor
        labels = []
        for mode in mono.modes():
            split = split_exit_bin(mode.site)
            site = split[0] if split else mode.site
            if site not in free:
                labels = None
                break
            labels.append(f"{site}@{mode.pol}" if by_polarization else site)
        if labels is None:
            residual += p
        else:
            probs[tuple(sorted(labels))] += p
    return ExitDistribution(dict(sorted(probs.items())), residual)


def site_unit(site: str) -> str:
    """Unit that owns ``site``: everything before the first ``:``."""
    return site.split(":", 1)[0]


def shared_unit_ticks(states, start: int = 0) -> list[int]:
    """Ticks from ``start`` on at which some term holds two photons in one unit.

    Arrival slots count for the unit they feed; photons frozen in exit bins
    are ignored.  An empty list means the photons never met.
    """
    ticks = []
    for tick, state in enumerate(states):
        if tick < start:
            continue
        for mono, _ in state.terms:
            units = [site_unit(m.site) for m in mono.modes() if split_exit_bin(m.site) is None]
            if len(units) != len(set(units)):
                ticks.append(tick)
                break
    return ticks


def expected_bell(kind: str, targets) -> PhotonState:
    """Bell state of ``kind`` on the port sites of two target endpoints."""
    a, b = (port_site(Endpoint.parse(x) if isinstance(x, str) else Endpoint(*x)) for x in targets)
    return make_bell(kind, a, b)


def central_insertion(t: Topology, unit: str = "C") -> Insertion:
    """Bell pair on the left side of ``unit``, tapped when those ports are linked."""
    tap = not all(t.is_free(Endpoint(unit, "L", p)) for p in "ef")
    return Insertion(unit, "L", ("e", "f"), "phi+", tap=tap)


def count_reachable(t: Topology, ins: Insertion | None = None,
                    hop_cap: int = DEFAULT_HOP_CAP) -> tuple[int, int]:
    """(passive, active) numbers of free ports reachable from ``ins``."""
    ins = ins or central_insertion(t)
    return (len(reachable_exits(t, ins, "passive", hop_cap)),
            len(reachable_exits(t, ins, "active", hop_cap)))


def _fmt(x: float, digits: int = 9) -> str:
    s = f"{x:.{digits}f}"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def format_report(name: str, t: Topology, final: PhotonState, norms, *,
                  expectations=(), reach: tuple[int, int] | None = None,
                  regime: str = "", ticks: int | None = None) -> str:
    """Plain-text run summary with fixed number formatting.

    ``expectations`` holds ``(ports, kind)`` pairs; ``kind`` may be None
    when only the coincidence probability is of interest.
    """
    dist = exit_distribution(final, t)
    worst = max((abs(n - 1) for n in norms), default=0.0)
    lines = [f"scenario: {name}"]
    if regime:
        lines.append(f"regime: {regime}")
    if ticks is not None:
        lines.append(f"ticks: {ticks}")
    lines.append(f"final_norm: {_fmt(final.norm())}")
    lines.append(f"max_norm_deviation: {worst:.3e}")
    lines.append("exit_distribution:")
    for ports, p in dist.probabilities.items():
        if p > 1e-12:
            lines.append(f"  {' '.join(ports)}: {_fmt(p)}")
    lines.append(f"residual: {_fmt(dist.residual)}")
    refs = []
    for ports, kind in expectations:
        lines.append(f"expect {' '.join(ports)}: probability {_fmt(dist.marginal(*ports))}")
        if kind is not None:
            refs.append((kind, ports))
    if refs:
        label = " x ".join(f"{k}({','.join(p)})" for k, p in refs)
        reference = PhotonState.vacuum()
        for kind, ports in refs:
            reference = reference * expected_bell(kind, ports)
        try:
            lines.append(f"fidelity {label}: {_fmt(fidelity(collapse_exit_bins(final), reference))}")
        except ValueError as exc:
            lines.append(f"fidelity {label}: unavailable ({exc})")
    if reach is not None:
        lines.append(f"reach: passive={reach[0]} active={reach[1]}")
    return "\n".join(lines) + "\n"
