"""Tick-by-tick propagation of photon states through a network.

Timing, counted from the pipeline origin (the first insertion tick):

* stage 1 (T1): entry beam splitter from arrival sites onto rails, then the
  side's phase shifter (value scheduled at this tick);
* stage 2 (T2): Grover four-port on the four rails of every unit;
* stage 3 (T3): each side's phase shifter (value at this tick), then the
  exit beam splitter from rails onto outgoing port sites;
* stage 0 (hop): outgoing amplitude on a linked port moves to the partner's
  arrival slot; amplitude on a free port moves into a frozen exit bin
  labelled with its exit tick.

Phase shifters sit on the lower rail (``b`` on the left, ``d`` on the right).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .elements import ModeMap, bs_map, grover_map, identity_map, phase_map
from .fock import BELL_KINDS, PhotonState, apply_mode_map, make_bell
from .topology import (
    PORTS,
    RAILS,
    SIDES,
    Endpoint,
    SitePlan,
    Topology,
    build_site_plan,
    exit_bin,
    require_valid,
    split_exit_bin,
)

WILDCARD = None
REGIMES = ("passive", "active")


class EngineError(RuntimeError):
    """Internal consistency failure: amplitude where no stage can act on it."""


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase per ``(unit, side, tick)``; ``tick=None`` is the wildcard.

    Absent keys read as phase 0.  Passive schedules only hold wildcard
    entries.
    """

    regime: str = "passive"
    entries: Mapping[tuple[str, str, int | None], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be passive or active, got {self.regime!r}")
        entries = dict(self.entries)
        for (unit, side, tick) in entries:
            if side not in SIDES:
                raise ValueError(f"bad side {side!r} in schedule entry for {unit}")
            if self.regime == "passive" and tick is not WILDCARD:
                raise ValueError(f"passive schedule entry ({unit}, {side}, {tick}) must use the wildcard tick")
        object.__setattr__(self, "entries", entries)

    def phase(self, unit: str, side: str, tick: int) -> float:
        if (unit, side, tick) in self.entries:
            return self.entries[(unit, side, tick)]
        return self.entries.get((unit, side, WILDCARD), 0.0)


@dataclass(frozen=True)
class Insertion:
    """Photons placed on the arrival site of one or two ports of a unit side.

    ``state`` is a Bell kind (two ports, first port carries the first
    photon), ``"single"`` (one port) or ``"product"`` (two ports, one photon
    each).  ``polarizations`` applies to single and product insertions.
    Linked ports may only be used when ``tap`` is set.
    """

    unit: str
    side: str
    ports: tuple[str, ...] = ("e", "f")
    state: str = "phi+"
    polarizations: tuple[str, ...] = ("H", "H")
    tick: int = 0
    tap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "polarizations", tuple(self.polarizations))
        if self.side not in SIDES:
            raise ValueError(f"insertion side must be L or R, got {self.side!r}")
        if any(p not in PORTS for p in self.ports) or len(set(self.ports)) != len(self.ports):
            raise ValueError(f"insertion ports must be distinct e/f, got {self.ports}")
        want = 1 if self.state == "single" else 2
        if self.state not in (*BELL_KINDS, "single", "product"):
            raise ValueError(f"unknown insertion state {self.state!r}")
        if len(self.ports) != want:
            raise ValueError(f"{self.state} insertion needs {want} port(s), got {len(self.ports)}")
        if self.state in ("single", "product") and len(self.polarizations) < want:
            raise ValueError(f"{self.state} insertion needs {want} polarization(s)")
        if not isinstance(self.tick, int) or self.tick < 0:
            raise ValueError(f"insertion tick must be a non-negative integer, got {self.tick!r}")

    @property
    def endpoints(self) -> tuple[Endpoint, ...]:
        return tuple(Endpoint(self.unit, self.side, p) for p in self.ports)

    @property
    def photon_count(self) -> int:
        return len(self.ports)

    def photon_state(self, plan: SitePlan) -> PhotonState:
        sites = [plan.arrival(ep) for ep in self.endpoints]
        if self.state in BELL_KINDS:
            return make_bell(self.state, *sites)
        out = PhotonState.vacuum()
        for site, pol in zip(sites, self.polarizations):
            out = out * PhotonState.single(site, pol)
        return out


@dataclass
class Trace:
    """Per-tick states and norms of one run."""

    states: list[PhotonState] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)

    def records(self) -> list[tuple[int, str, str, complex]]:
        """``(tick, site, pol, amplitude)`` for every occupied factor of every term."""
        out = []
        for tick, state in enumerate(self.states):
            for mono, amp in state.terms:
                for mode in mono.modes():
                    out.append((tick, mode.site, mode.pol, amp))
        return out

    def spatial_records(self) -> list[tuple[int, str, complex]]:
        return [(t, s, a) for t, s, _, a in self.records()]

    def to_text(self) -> str:
        lines = []
        by_tick: dict[int, list[str]] = {}
        for tick, site, pol, amp in self.records():
            by_tick.setdefault(tick, []).append(f"{tick}\t{site}\t{pol}\t{_num(amp.real)}\t{_num(amp.imag)}")
        for tick, norm in enumerate(self.norms):
            lines += by_tick.get(tick, [])
            lines.append(f"{tick}\tNORM\t{_num(norm)}")
        return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    return f"{(x if x != 0 else 0.0):.15g}"


def _stage(tick: int, origin: int) -> int:
    return (tick - origin) % 4


def stage_map(plan: SitePlan, sched: PhaseSchedule, tick: int, origin: int = 0) -> ModeMap:
    """Mode map for everything that moves at ``tick``; exit bins are left out."""
    t = plan.topology
    stage = _stage(tick, origin)
    maps = []
    if stage == 1:
        for u in t.units:
            for side in SIDES:
                top, bottom = (plan.rails[(u, r)] for r in RAILS[side])
                e, f = (plan.arrival(Endpoint(u, side, p)) for p in PORTS)
                maps.append(bs_map(e, f, top, bottom).then(phase_map(bottom, sched.phase(u, side, tick))))
    elif stage == 2:
        for u in t.units:
            maps.append(grover_map(*(plan.rails[(u, r)] for r in "abcd")))
    elif stage == 3:
        for u in t.units:
            for side in SIDES:
                top, bottom = (plan.rails[(u, r)] for r in RAILS[side])
                e, f = (plan.ports[Endpoint(u, side, p)] for p in PORTS)
                shift = phase_map(bottom, sched.phase(u, side, tick)) | identity_map([top])
                maps.append(shift.then(bs_map(e, f, top, bottom).inverse()))
    else:
        images = {}
        for ep, site in plan.ports.items():
            partner = t.partner(ep)
            target = plan.arrival(partner) if partner is not None else exit_bin(site, tick - 1)
            images[site] = ((target, 1.0),)
        maps.append(ModeMap(images))
    return ModeMap({site: img for m in maps for site, img in m.images.items()})


def step(state: PhotonState, t: Topology, sched: PhaseSchedule, tick: int, *, origin: int = 0) -> PhotonState:
    """Advance ``state`` by one tick."""
    plan = build_site_plan(t)
    m = stage_map(plan, sched, tick, origin)
    for site in state.sites():
        if site not in m.images and split_exit_bin(site) is None:
            raise EngineError(f"site {site} occupied at tick {tick} (stage {_stage(tick, origin)}) but no stage acts on it")
    return apply_mode_map(state, m, extend_identity=True)


def check_insertions(t: Topology, insertions: Iterable[Insertion]) -> int:
    """Validate insertions against ``t``; returns the pipeline origin tick."""
    insertions = list(insertions)
    if not insertions:
        raise ValueError("no insertions: nothing to simulate")
    known = set(t.units)
    for ins in insertions:
        if ins.unit not in known:
            raise ValueError(f"insertion references unknown unit {ins.unit!r}")
        for ep in ins.endpoints:
            if not t.is_free(ep) and not ins.tap:
                raise ValueError(f"insertion on linked port {ep} requires tap=true")
    origin = min(ins.tick for ins in insertions)
    for ins in insertions:
        if (ins.tick - origin) % 4:
            raise ValueError(f"insertion at tick {ins.tick} is out of pipeline phase with origin tick {origin}")
    return origin


def simulate(t: Topology, insertions: Iterable[Insertion], sched: PhaseSchedule,
             max_ticks: int) -> tuple[PhotonState, Trace]:
    """Run from tick 0 to ``max_ticks`` and return the final state and trace.

    Insertions with ``tick = k`` are multiplied into the state after the
    step of tick ``k``, so their first beam splitter acts at ``k + 1``.
    """
    require_valid(t)
    if not isinstance(max_ticks, int) or max_ticks < 1:
        raise ValueError(f"max_ticks must be an integer >= 1, got {max_ticks!r}")
    insertions = list(insertions)
    origin = check_insertions(t, insertions)
    plan = build_site_plan(t)
    state = PhotonState.vacuum()
    trace = Trace()
    for tick in range(max_ticks + 1):
        if tick > 0:
            state = step(state, t, sched, tick, origin=origin)
        for ins in insertions:
            if ins.tick == tick:
                state = state * ins.photon_state(plan)
        trace.states.append(state)
        trace.norms.append(state.norm())
    return state, trace


def single_unit(name: str = "C") -> Topology:
    return Topology((name,))


def run_all_bell(t: Topology | None = None) -> dict[str, PhotonState]:
    """Each Bell kind through one unit with all phases zero."""
    t = t or single_unit()
    if len(t.units) != 1:
        raise ValueError("run_all_bell needs a single-unit topology")
    (unit,) = t.units
    out = {}
    for kind in BELL_KINDS:
        final, _ = simulate(t, [Insertion(unit, "L", ("e", "f"), kind)], PhaseSchedule(), 3)
        out[kind] = final
    return out


def is_localized(state: PhotonState, plan: SitePlan) -> bool:
    """True when no amplitude sits on a rail."""
    rails = set(plan.rails.values())
    return not (state.sites() & rails)


def norm_deviation(trace: Trace) -> float:
    return max((abs(n - 1.0) for n in trace.norms), default=0.0)


__all__ = [
    "EngineError",
    "Insertion",
    "PhaseSchedule",
    "Trace",
    "WILDCARD",
    "check_insertions",
    "is_localized",
    "norm_deviation",
    "run_all_bell",
    "simulate",
    "single_unit",
    "stage_map",
    "step",
]
