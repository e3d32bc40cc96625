"""Network description: control units joined port to port by links.

Each unit has a left (``L``) and right (``R``) side with ports ``e`` (upper)
and ``f`` (lower).  An endpoint is written ``"<unit>:<side><port>"``, e.g.
``"C:Le"``.  Links are undirected and join exactly two endpoints; an
endpoint without a link is a free (user) port.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple

SIDES = ("L", "R")
PORTS = ("e", "f")
RAILS = {"L": ("a", "b"), "R": ("c", "d")}


class TopologyError(ValueError):
    """Raised when an operation needs a valid topology and gets an invalid one."""


class Endpoint(NamedTuple):
    unit: str
    side: str
    port: str

    def __str__(self):
        return f"{self.unit}:{self.side}{self.port}"

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        unit, sep, sp = str(text).rpartition(":")
        if not sep or not unit or len(sp) != 2 or sp[0] not in SIDES or sp[1] not in PORTS:
            raise TopologyError(f"bad endpoint {text!r}; expected '<unit>:<L|R><e|f>'")
        return cls(unit, sp[0], sp[1])


def other_side(side: str) -> str:
    return "R" if side == "L" else "L"


def unit_endpoints(unit: str) -> list[Endpoint]:
    return [Endpoint(unit, s, p) for s in SIDES for p in PORTS]


@dataclass(frozen=True)
class Topology:
    units: tuple[str, ...]
    links: tuple[tuple[Endpoint, Endpoint], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(sorted(set(self.units))))
        links = tuple(sorted(tuple(sorted((Endpoint(*a), Endpoint(*b)))) for a, b in self.links))
        object.__setattr__(self, "links", links)

    @classmethod
    def build(cls, units: Iterable[str], links: Iterable[tuple[str, str]] = ()) -> "Topology":
        """Construct from endpoint strings, e.g. ``links=[("A:Re", "B:Le")]``."""
        return cls(tuple(units), tuple((Endpoint.parse(a), Endpoint.parse(b)) for a, b in links))

    @cached_property
    def _partners(self) -> dict[Endpoint, Endpoint]:
        out = {}
        for a, b in self.links:
            out.setdefault(a, b)
            out.setdefault(b, a)
        return out

    def partner(self, endpoint: Endpoint) -> Endpoint | None:
        return self._partners.get(endpoint)

    def is_free(self, endpoint: Endpoint) -> bool:
        return endpoint not in self._partners

    @cached_property
    def free_ports(self) -> tuple[Endpoint, ...]:
        return tuple(ep for u in self.units for ep in unit_endpoints(u) if self.is_free(ep))


def layered_tree(layers: int) -> Topology:
    """Central unit ``C`` plus ``layers - 1`` generations of children.

    Every free port of the outermost generation receives a child unit whose
    nearer-side ``e`` port is linked to it.  A child is named after its
    parent and the parent port, e.g. ``C/Le`` hangs off ``C:Le``.  The result
    has ``4 * 3**(layers - 1)`` free ports.
    """
    if not isinstance(layers, int) or layers < 1:
        raise ValueError(f"layers must be an integer >= 1, got {layers!r}")
    units = ["C"]
    links = []
    frontier = unit_endpoints("C")
    for _ in range(layers - 1):
        nxt = []
        for ep in frontier:
            child = f"{ep.unit}/{ep.side}{ep.port}"
            near = other_side(ep.side)
            units.append(child)
            links.append((ep, Endpoint(child, near, "e")))
            nxt += [e for e in unit_endpoints(child) if e != Endpoint(child, near, "e")]
        frontier = nxt
    return Topology(tuple(units), tuple(links))


def validate(t: Topology) -> list[str]:
    """All invariant violations of ``t``; an empty list means valid."""
    errors = []
    known = set(t.units)
    seen: dict[Endpoint, int] = {}
    for a, b in t.links:
        for ep in (a, b):
            if ep.unit not in known:
                errors.append(f"unknown unit: {ep.unit} in link {a}--{b}")
            if ep.side not in SIDES or ep.port not in PORTS:
                errors.append(f"bad endpoint: {ep}")
            seen[ep] = seen.get(ep, 0) + 1
        if a.unit == b.unit and a.side == b.side:
            errors.append(f"degenerate link: {a}--{b}")
    for ep, n in sorted(seen.items()):
        if n > 1:
            errors.append(f"port multiply linked: {ep} ({n} links)")
    return errors


def require_valid(t: Topology) -> None:
    errors = validate(t)
    if errors:
        raise TopologyError("; ".join(errors))


# -- site plan -----------------------------------------------------------------

def port_site(ep: Endpoint) -> str:
    """Outgoing side of a port: amplitude that has just left the unit."""
    return str(ep)


def arrival_site(ep: Endpoint) -> str:
    """Amplitude about to enter the unit through ``ep`` (link slot or tap)."""
    return f"{ep}.in"


def rail_site(unit: str, rail: str) -> str:
    return f"{unit}:{rail}"


def exit_bin(site: str, tick: int) -> str:
    """Frozen record of amplitude that left the network at ``site`` at ``tick``."""
    return f"{site}#{tick}"


def split_exit_bin(site: str) -> tuple[str, int] | None:
    base, sep, tick = site.rpartition("#")
    return (base, int(tick)) if sep and tick.isdigit() else None


@dataclass(frozen=True)
class SitePlan:
    """Deterministic site labels for one topology.

    ``sites`` holds the four port and four rail sites of every unit and the
    two directed slots of every link.  Free ports additionally get a tap
    site (``taps``) through which photons are inserted.
    """

    topology: Topology
    ports: dict[Endpoint, str]
    rails: dict[tuple[str, str], str]
    slots: dict[Endpoint, str]
    taps: dict[Endpoint, str]

    @property
    def sites(self) -> tuple[str, ...]:
        return tuple(sorted([*self.ports.values(), *self.rails.values(), *self.slots.values()]))

    @property
    def all_sites(self) -> tuple[str, ...]:
        return tuple(sorted([*self.sites, *self.taps.values()]))

    def arrival(self, ep: Endpoint) -> str:
        return self.slots.get(ep) or self.taps[ep]

    @cached_property
    def free_port_sites(self) -> frozenset[str]:
        return frozenset(self.ports[ep] for ep in self.topology.free_ports)

    @cached_property
    def endpoint_of_port_site(self) -> dict[str, Endpoint]:
        return {s: ep for ep, s in self.ports.items()}


@lru_cache(maxsize=64)
def build_site_plan(t: Topology) -> SitePlan:
    require_valid(t)
    ports, rails, slots, taps = {}, {}, {}, {}
    for u in t.units:
        for ep in unit_endpoints(u):
            ports[ep] = port_site(ep)
            if t.is_free(ep):
                taps[ep] = arrival_site(ep)
            else:
                slots[ep] = arrival_site(ep)
        for side in SIDES:
            for r in RAILS[side]:
                rails[(u, r)] = rail_site(u, r)
    return SitePlan(t, ports, rails, slots, taps)


# -- DOT export ----------------------------------------------------------------

_ROUTE_COLORS = ("forestgreen", "firebrick", "royalblue", "darkorange")


def to_dot(t: Topology, routes: Iterable[Iterable[tuple[Endpoint, Endpoint]]] = ()) -> str:
    """Graphviz description: one node per unit, one edge per link.

    Free ports are listed in the node label.  ``routes`` is a sequence of
    hop lists (pairs of linked endpoints); hops on a route are coloured.
    """
    colors: dict[tuple[Endpoint, Endpoint], list[str]] = {}
    for i, hops in enumerate(routes):
        color = _ROUTE_COLORS[i % len(_ROUTE_COLORS)]
        for a, b in hops:
            key = tuple(sorted((a, b)))
            if color not in colors.setdefault(key, []):
                colors[key].append(color)
    lines = ["graph network {", "  node [shape=box];"]
    for u in t.units:
        free = [f"{ep.side}{ep.port}" for ep in unit_endpoints(u) if t.is_free(ep)]
        label = u + (f"\\nfree: {' '.join(free)}" if free else "")
        lines.append(f'  "{u}" [label="{label}"];')
    for a, b in t.links:
        attrs = f'taillabel="{a.side}{a.port}", headlabel="{b.side}{b.port}"'
        if (a, b) in colors:
            attrs += f', color="{":".join(colors[(a, b)])}", penwidth=2'
        lines.append(f'  "{a.unit}" -- "{b.unit}" [{attrs}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
