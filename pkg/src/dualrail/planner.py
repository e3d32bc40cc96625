"""Phase-schedule planning: route photons from insertion ports to free ports.

Routing works on the port graph of the network.  A photon arriving at a
unit through ``(side, port)`` leaves through one of the unit's four ports;
the phases that realize each choice come from inverting the closed-form
transfer rule.  The active regime sets phases per tick, so every choice is
available at every crossing.  The passive regime fixes one phase per
``(unit, side)``; the search binds those bits lazily and keeps them
consistent across revisits and across both photons of a pair.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .elements import McuControl, entry_sign, required_control
from .engine import WILDCARD, Insertion, PhaseSchedule, check_insertions
from .topology import PORTS, SIDES, Endpoint, Topology, other_side, require_valid

TRANSMIT, REFLECT = "transmit", "reflect"
DEFAULT_HOP_CAP = 32
UTURN_DELAY = 8


class UnreachableError(Exception):
    """No schedule in the requested regime delivers a photon to ``port``."""

    def __init__(self, port, reason: str = ""):
        self.port = port
        name = " & ".join(map(str, port)) if isinstance(port, tuple) and not isinstance(port, Endpoint) else str(port)
        super().__init__(f"target {name} unreachable" + (f": {reason}" if reason else ""))


@dataclass(frozen=True)
class Traversal:
    """One photon crossing one unit; ``tick`` is the entry (T1) tick."""

    unit: str
    entry_side: str
    entry_port: str
    outcome: str
    exit_side: str
    exit_port: str
    tick: int

    @property
    def entry(self) -> Endpoint:
        return Endpoint(self.unit, self.entry_side, self.entry_port)

    @property
    def exit(self) -> Endpoint:
        return Endpoint(self.unit, self.exit_side, self.exit_port)

    @property
    def exit_tick(self) -> int:
        return self.tick + 2

    def control(self) -> McuControl:
        return required_control(self.entry_port, self.outcome, self.exit_port)

    def settings(self) -> list[tuple[tuple[str, str, int], float]]:
        c = self.control()
        exit_phase = c.exit_phase_far if self.outcome == TRANSMIT else c.exit_phase_near
        return [((self.unit, self.entry_side, self.tick), c.entry_phase),
                ((self.unit, self.exit_side, self.exit_tick), exit_phase)]

    def shifted(self, dt: int) -> "Traversal":
        return replace(self, tick=self.tick + dt)


@dataclass(frozen=True)
class JointStep:
    """Both photons of a pair crossing their insertion unit together.

    One photon always leaves on the insertion (near) side and the other on
    the far side; the exit phases pick the port on each side.
    """

    unit: str
    side: str
    near_port: str
    far_port: str
    tick: int

    @property
    def near_exit(self) -> Endpoint:
        return Endpoint(self.unit, self.side, self.near_port)

    @property
    def far_exit(self) -> Endpoint:
        return Endpoint(self.unit, other_side(self.side), self.far_port)

    def settings(self) -> list[tuple[tuple[str, str, int], float]]:
        t3 = self.tick + 2
        return [((self.unit, self.side, t3), 0.0 if self.near_port == "e" else math.pi),
                ((self.unit, other_side(self.side), t3), 0.0 if self.far_port == "f" else math.pi)]


@dataclass(frozen=True)
class PhotonRoute:
    """Path of one photon.

    ``start`` is the port through which the photon left the joint step (None
    for a photon inserted alone, whose first traversal is at the insertion
    unit).  ``target`` is the free port where it leaves the network.
    """

    target: Endpoint
    traversals: tuple[Traversal, ...] = ()
    start: Endpoint | None = None
    start_tick: int = 0  # tick of the exit through ``start``

    @property
    def exit_tick(self) -> int:
        return self.traversals[-1].exit_tick if self.traversals else self.start_tick

    @property
    def units(self) -> tuple[str, ...]:
        return tuple(tr.unit for tr in self.traversals)

    @property
    def uturns(self) -> int:
        # shortest paths never leave a unit through the port they came in by;
        # each u-turn adds two such bounces
        return sum(tr.exit == tr.entry for tr in self.traversals) // 2

    def describe(self) -> str:
        """One-line path, e.g. ``S:Rf -> B[Le>Re@5] -> D[Lf>Rf@9]``."""
        parts = [str(self.start)] if self.start is not None else []
        parts += [f"{tr.unit}[{tr.entry_side}{tr.entry_port}>{tr.exit_side}{tr.exit_port}@{tr.tick}]"
                  for tr in self.traversals]
        return " -> ".join(parts)


@dataclass(frozen=True)
class RoutePlan:
    insertion: Insertion
    regime: str
    routes: tuple[PhotonRoute, ...]
    joint: JointStep | None = None

    @property
    def duration(self) -> int:
        """Tick at which the last photon has left the network."""
        return max(r.exit_tick for r in self.routes)

    @property
    def targets(self) -> tuple[Endpoint, ...]:
        return tuple(r.target for r in self.routes)

    def settings(self) -> list[tuple[tuple[str, str, int], float]]:
        out = list(self.joint.settings()) if self.joint else []
        for r in self.routes:
            for tr in r.traversals:
                out += tr.settings()
        return out

    def schedule(self) -> PhaseSchedule:
        entries: dict[tuple[str, str, int | None], float] = {}
        for (unit, side, tick), phi in self.settings():
            key = (unit, side, WILDCARD if self.regime == "passive" else tick)
            if key in entries and not math.isclose(entries[key], phi):
                raise UnreachableError(self.targets, f"inconsistent phase requirement on {key}")
            entries[key] = phi
        # zero entries are the default; keep only the informative ones
        return PhaseSchedule(self.regime, {k: v for k, v in sorted(entries.items(), key=_key_order) if v})


def _key_order(item):
    (unit, side, tick), _ = item
    return (unit, side, -1 if tick is None else tick)


# -- single-photon search ------------------------------------------------------

def _exit_options(arrival: Endpoint, regime: str, bindings: dict):
    """(outcome, exit_side, exit_port, new_bindings) choices at one crossing."""
    unit, side, port = arrival
    far = other_side(side)
    if regime == "active":
        for s in SIDES:
            for q in PORTS:
                yield (REFLECT if s == side else TRANSMIT), s, q, bindings
        return
    near_bits = [bindings[(unit, side)]] if (unit, side) in bindings else [0, 1]
    for nb in near_bits:
        b1 = {**bindings, (unit, side): nb}
        if entry_sign(port) * (-1) ** nb < 0:
            yield REFLECT, side, port, b1
            continue
        far_bits = [b1[(unit, far)]] if (unit, far) in b1 else [0, 1]
        for fb in far_bits:
            yield TRANSMIT, far, ("e" if fb else "f"), {**b1, (unit, far): fb}


def _walk(t: Topology, arrival: Endpoint, tick: int, regime: str, bindings: dict,
          hop_cap: int) -> Iterator[tuple[tuple[Traversal, ...], Endpoint, dict]]:
    """Breadth-first enumeration of exits to free ports.

    Yields ``(traversals, free_port, bindings)`` in order of path length,
    ties ordered lexicographically by the units visited.
    """
    queue = deque([(arrival, tick, bindings, ())])
    seen = set()
    while queue:
        arr, tk, bind, path = queue.popleft()
        key = arr if regime == "active" else (arr, frozenset(bind.items()))
        if key in seen:
            continue
        seen.add(key)
        options = []
        for outcome, s, q, b in _exit_options(arr, regime, bind):
            ex = Endpoint(arr.unit, s, q)
            nxt = t.partner(ex)
            options.append(((nxt.unit if nxt else "", s, q), outcome, ex, nxt, b))
        options.sort(key=lambda o: o[0])
        for _, outcome, ex, nxt, b in options:
            tr = Traversal(arr.unit, arr.side, arr.port, outcome, ex.side, ex.port, tk)
            if nxt is None:
                yield path + (tr,), ex, b
            elif len(path) + 1 < hop_cap:
                queue.append((nxt, tk + 4, b, path + (tr,)))


def _routes_to(t: Topology, target: Endpoint, regime: str, bindings: dict, hop_cap: int, *,
               arrival: Endpoint | None = None, tick: int = 0, start: Endpoint | None = None,
               start_tick: int = 0) -> Iterator[tuple[PhotonRoute, dict]]:
    """All routes reaching ``target``, shortest first.

    Either ``arrival``/``tick`` (photon about to enter a unit at T1 ``tick``)
    or ``start``/``start_tick`` (photon leaving a unit through ``start``).
    """
    if start is not None:
        if start == target:
            yield PhotonRoute(target, (), start, start_tick), bindings
            return
        nxt = t.partner(start)
        if nxt is None:
            return
        arrival, tick = nxt, start_tick + 2
    for path, port, b in _walk(t, arrival, tick, regime, bindings, hop_cap):
        if port == target:
            yield PhotonRoute(target, path, start, start_tick), b


def reachable_exits(t: Topology, ins: Insertion, regime: str = "active",
                    hop_cap: int = DEFAULT_HOP_CAP) -> set[Endpoint]:
    """Free ports some schedule of ``regime`` can deliver an inserted photon to.

    Each inserted photon is followed on its own from its insertion port.
    """
    require_valid(t)
    check_insertions(t, [ins])
    if hop_cap < 1:
        raise ValueError("hop_cap must be >= 1")
    out: set[Endpoint] = set()
    for ep in ins.endpoints:
        for _, port, _ in _walk(t, ep, ins.tick + 1, regime, {}, hop_cap):
            out.add(port)
    return out


# -- pair planning and conflicts -------------------------------------------------

def _path_key(route: PhotonRoute):
    return len(route.traversals), route.units


def _plan_single(t, ins, target, regime, hop_cap) -> RoutePlan:
    for route, _ in _routes_to(t, target, regime, {}, hop_cap, arrival=ins.endpoints[0], tick=ins.tick + 1):
        return RoutePlan(ins, regime, (route,))
    raise UnreachableError(target, f"no {regime} schedule within {hop_cap} hops")


def _plan_pair(t, ins, targets, regime, hop_cap, max_candidates=256) -> RoutePlan:
    near = ins.side
    t3 = ins.tick + 3
    best = None
    for order, (near_target, far_target) in enumerate((targets, targets[::-1])):
        for near_port in PORTS:
            for far_port in PORTS:
                joint = JointStep(ins.unit, near, near_port, far_port, ins.tick + 1)
                bind = {}
                if regime == "passive":
                    bind = {(ins.unit, near): 0 if near_port == "e" else 1,
                            (ins.unit, other_side(near)): 0 if far_port == "f" else 1}
                found = None
                for i, (r1, b1) in enumerate(_routes_to(t, near_target, regime, bind, hop_cap,
                                                        start=joint.near_exit, start_tick=t3)):
                    if i >= max_candidates:
                        break
                    r2 = next((r for r, _ in _routes_to(t, far_target, regime, b1, hop_cap,
                                                         start=joint.far_exit, start_tick=t3)), None)
                    if r2 is not None:
                        found = (r1, r2)
                        break
                    if regime == "active":
                        break  # photons are independent; a longer near route cannot help
                if found is None:
                    continue
                r1, r2 = found
                key = (len(r1.traversals) + len(r2.traversals), r1.units + r2.units, order)
                if best is None or key < best[0]:
                    routes = (r1, r2) if order == 0 else (r2, r1)
                    best = (key, joint, routes)
    if best is None:
        raise UnreachableError(targets[0] if len(targets) == 1 else tuple(targets),
                               f"no {regime} schedule delivers the pair within {hop_cap} hops")
    _, joint, routes = best
    return RoutePlan(ins, regime, routes, joint)


def route_hops(t: Topology, route: PhotonRoute) -> list[tuple[int, Endpoint, Endpoint]]:
    """Link hops as ``(tick, from_port, to_port)``."""
    hops = []
    prev = route.start
    for tr in route.traversals:
        if prev is not None:
            hops.append((tr.tick - 1, prev, tr.entry))
        prev = tr.exit
    return hops


def route_resources(t: Topology, route: PhotonRoute) -> set[tuple]:
    """Links and shifters a route occupies, each tagged with its tick."""
    res = set()
    for tick, a, b in route_hops(t, route):
        res.add(("link", *sorted((a, b)), tick))
    for tr in route.traversals:
        res.add(("shifter", tr.unit, tr.entry_side, tr.tick))
        res.add(("shifter", tr.unit, tr.exit_side, tr.exit_tick))
    return res


def conflicts(t: Topology, first: PhotonRoute, second: PhotonRoute) -> list[tuple]:
    """Shared resources at equal ticks, earliest first."""
    return sorted(route_resources(t, first) & route_resources(t, second), key=lambda r: (r[-1], r))


def with_uturn(t: Topology, route: PhotonRoute, index: int) -> PhotonRoute:
    """Delay ``route`` by 8 ticks just before its traversal ``index``.

    The photon, on arriving for that traversal, is reflected straight back
    along the link it came from, reflected again by the previous unit, and
    then resumes its original path.
    """
    tr = route.traversals[index]
    back = t.partner(tr.entry)
    if back is None:
        raise ValueError(f"no link before traversal {index}; cannot add a u-turn there")
    detour = (
        Traversal(tr.unit, tr.entry_side, tr.entry_port, REFLECT, tr.entry_side, tr.entry_port, tr.tick),
        Traversal(back.unit, back.side, back.port, REFLECT, back.side, back.port, tr.tick + 4),
    )
    later = tuple(x.shifted(UTURN_DELAY) for x in route.traversals[index:])
    return replace(route, traversals=route.traversals[:index] + detour + later)


def deconflict(t: Topology, first: PhotonRoute, second: PhotonRoute,
               max_iterations: int = 64) -> tuple[PhotonRoute, PhotonRoute]:
    """Insert u-turns until the two routes share no link or shifter at any tick.

    The second route is delayed by preference.  Each accepted u-turn must push
    the earliest conflict later; the search gives up after
    ``max_iterations`` u-turns.
    """
    for _ in range(max_iterations):
        clash = conflicts(t, first, second)
        if not clash:
            return first, second
        earliest = clash[0][-1]
        for which in (1, 0):
            route = (first, second)[which]
            accepted = None
            for i in reversed(range(len(route.traversals))):
                if t.partner(route.traversals[i].entry) is None:
                    continue
                cand = with_uturn(t, route, i)
                pair = (first, cand) if which else (cand, second)
                rest = conflicts(t, *pair)
                if not rest or rest[0][-1] > earliest:
                    accepted = pair
                    break
            if accepted:
                first, second = accepted
                break
        else:
            raise RuntimeError(f"cannot resolve conflict on {clash[0]}")
    raise RuntimeError(f"conflicts remain after {max_iterations} u-turns")


def plan(t: Topology, ins: Insertion, targets: Sequence[Endpoint | str], regime: str = "active",
         hop_cap: int = DEFAULT_HOP_CAP) -> tuple[RoutePlan, PhaseSchedule]:
    """Route the photons of ``ins`` to ``targets`` and return the schedule.

    A pair inserted at one unit crosses that unit jointly, one photon per
    side; each photon then follows a shortest route.  Active pair plans are
    deconflicted with u-turns.
    """
    require_valid(t)
    check_insertions(t, [ins])
    if regime not in ("passive", "active"):
        raise ValueError(f"regime must be passive or active, got {regime!r}")
    targets = tuple(Endpoint.parse(x) if isinstance(x, str) else Endpoint(*x) for x in targets)
    if len(targets) != ins.photon_count:
        raise ValueError(f"{ins.state} insertion needs {ins.photon_count} target(s), got {len(targets)}")
    for x in targets:
        if x.unit not in t.units or not t.is_free(x):
            raise ValueError(f"target {x} is not a free port")
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    if ins.photon_count == 1:
        rp = _plan_single(t, ins, targets[0], regime, hop_cap)
    else:
        rp = _plan_pair(t, ins, targets, regime, hop_cap)
        if regime == "active":
            rp = replace(rp, routes=deconflict(t, *rp.routes))
    return rp, rp.schedule()
