"""Scenario files: a strict YAML schema describing one run.

Example::

    version: 1
    name: mcu_phiplus
    topology: {layered: 1}
    insertions:
      - {unit: C, side: L, ports: [e, f], state: phi+}
    control:
      regime: passive
      schedule: []
    run: {max_ticks: 4}
    expect:
      - {kind: phi+, ports: ["C:Le", "C:Rf"]}

``control`` holds ``regime`` plus exactly one of ``schedule`` (explicit
phase entries, ``tick`` omitted for the passive wildcard, ``phase`` a number
or ``pi``) and ``targets`` (free ports for the planner).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .engine import WILDCARD, Insertion, PhaseSchedule
from .fock import BELL_KINDS
from .planner import DEFAULT_HOP_CAP
from .topology import Endpoint, Topology, TopologyError, layered_tree

VERSION = 1

_TOP_KEYS = {"version", "name", "description", "topology", "insertions", "control", "run", "expect", "routes"}
_REQUIRED = {"version", "name", "topology", "insertions", "control"}
_INSERTION_KEYS = {"unit", "side", "ports", "state", "polarizations", "tick", "tap"}
_CONTROL_KEYS = {"regime", "schedule", "targets"}
_ENTRY_KEYS = {"unit", "side", "tick", "phase"}
_RUN_KEYS = {"max_ticks", "hop_cap", "seed"}
_EXPECT_KEYS = {"kind", "ports"}


class ScenarioError(ValueError):
    """The scenario text violates the schema."""


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where} must be a mapping")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ScenarioError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ScenarioError(f"missing key(s) in {where}: {', '.join(missing)}")


def _int(value, where, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ScenarioError(f"{where} must be an integer >= {minimum}, got {value!r}")
    return value


def parse_phase(value) -> float:
    if isinstance(value, str):
        text = value.strip().lower().replace(" ", "")
        if text in ("pi", "π"):
            return math.pi
        try:
            return float(text)
        except ValueError:
            raise ScenarioError(f"bad phase {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"bad phase {value!r}")
    return float(value)


def format_phase(phi: float):
    if math.isclose(phi, math.pi, abs_tol=1e-12):
        return "pi"
    return 0 if phi == 0 else phi


@dataclass(frozen=True)
class Expectation:
    ports: tuple[str, ...]
    kind: str | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    insertions: tuple[Insertion, ...]
    regime: str
    layers: int | None = None
    units: tuple[str, ...] = ()
    links: tuple[tuple[str, str], ...] = ()
    schedule: tuple[tuple[str, str, int | None, float], ...] | None = None
    targets: tuple[str, ...] | None = None
    max_ticks: int | None = None
    hop_cap: int = DEFAULT_HOP_CAP
    seed: int = 0
    expect: tuple[Expectation, ...] = ()
    description: str = ""
    routes: tuple[str, ...] = field(default=())

    def topology(self) -> Topology:
        if self.layers is not None:
            return layered_tree(self.layers)
        return Topology.build(self.units, self.links)

    def phase_schedule(self) -> PhaseSchedule:
        if self.schedule is None:
            raise ScenarioError("scenario has no explicit schedule")
        return PhaseSchedule(self.regime, {(u, s, k): phi for u, s, k, phi in self.schedule})

    # -- conversion ----------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Any) -> "Scenario":
        _check_keys(data, _TOP_KEYS, "scenario", _REQUIRED)
        if data["version"] != VERSION:
            raise ScenarioError(f"unsupported scenario version {data['version']!r} (expected {VERSION})")
        name = data["name"]
        if not isinstance(name, str) or not name:
            raise ScenarioError("name must be a non-empty string")

        topo = data["topology"]
        if not isinstance(topo, dict):
            raise ScenarioError("topology must be a mapping")
        kw: dict[str, Any] = {}
        if "layered" in topo:
            _check_keys(topo, {"layered"}, "topology")
            kw["layers"] = _int(topo["layered"], "topology.layered", 1)
        else:
            _check_keys(topo, {"units", "links"}, "topology", ("units",))
            units = topo["units"]
            if not isinstance(units, list) or not units or not all(isinstance(u, str) for u in units):
                raise ScenarioError("topology.units must be a non-empty list of names")
            links = topo.get("links") or []
            if not isinstance(links, list) or not all(isinstance(x, list) and len(x) == 2 for x in links):
                raise ScenarioError("topology.links must be a list of [port, port] pairs")
            kw["units"] = tuple(units)
            kw["links"] = tuple((str(a), str(b)) for a, b in links)

        ins_list = data["insertions"]
        if not isinstance(ins_list, list):
            raise ScenarioError("insertions must be a list")
        if not ins_list:
            raise ScenarioError("insertions is empty: nothing to simulate")
        insertions = []
        for i, raw in enumerate(ins_list):
            where = f"insertions[{i}]"
            _check_keys(raw, _INSERTION_KEYS, where, ("unit", "side"))
            args = dict(raw)
            if "tick" in args:
                _int(args["tick"], f"{where}.tick")
            if "tap" in args and not isinstance(args["tap"], bool):
                raise ScenarioError(f"{where}.tap must be true or false")
            if args.get("state") == "single" and "ports" not in args:
                raise ScenarioError(f"{where}: single insertion needs ports")
            if args.get("state") == "single" and "polarizations" not in args:
                args["polarizations"] = ("H",)
            try:
                insertions.append(Insertion(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in args.items()}))
            except (TypeError, ValueError) as exc:
                raise ScenarioError(f"{where}: {exc}") from None

        control = data["control"]
        _check_keys(control, _CONTROL_KEYS, "control", ("regime",))
        if control["regime"] not in ("passive", "active"):
            raise ScenarioError(f"control.regime must be passive or active, got {control['regime']!r}")
        has_sched, has_targets = "schedule" in control, "targets" in control
        if has_sched and has_targets:
            raise ScenarioError("control section ambiguous: give either schedule or targets, not both")
        if not (has_sched or has_targets):
            raise ScenarioError("control section needs a schedule or targets")
        if has_sched:
            entries = control["schedule"] or []
            if not isinstance(entries, list):
                raise ScenarioError("control.schedule must be a list")
            sched = []
            for i, e in enumerate(entries):
                where = f"control.schedule[{i}]"
                _check_keys(e, _ENTRY_KEYS, where, ("unit", "side", "phase"))
                tick = e.get("tick", WILDCARD)
                if tick is not WILDCARD:
                    _int(tick, f"{where}.tick")
                sched.append((str(e["unit"]), str(e["side"]), tick, parse_phase(e["phase"])))
            kw["schedule"] = tuple(sched)
        else:
            targets = control["targets"]
            if not isinstance(targets, list) or not targets:
                raise ScenarioError("control.targets must be a non-empty list of ports")
            try:
                kw["targets"] = tuple(str(Endpoint.parse(str(x))) for x in targets)
            except (TopologyError, ValueError) as exc:
                raise ScenarioError(f"control.targets: {exc}") from None

        run = data.get("run") or {}
        _check_keys(run, _RUN_KEYS, "run")
        if "max_ticks" in run:
            kw["max_ticks"] = _int(run["max_ticks"], "run.max_ticks", 1)
        if "hop_cap" in run:
            kw["hop_cap"] = _int(run["hop_cap"], "run.hop_cap", 1)
        if "seed" in run:
            kw["seed"] = _int(run["seed"], "run.seed")
        if kw.get("schedule") is not None and "max_ticks" not in kw:
            raise ScenarioError("run.max_ticks is required with an explicit schedule")

        expect = []
        for i, e in enumerate(data.get("expect") or []):
            _check_keys(e, _EXPECT_KEYS, f"expect[{i}]", ("ports",))
            kind = e.get("kind")
            if kind is not None and kind not in BELL_KINDS:
                raise ScenarioError(f"expect[{i}].kind must be a Bell kind, got {kind!r}")
            ports = e["ports"]
            if not isinstance(ports, list) or not ports or (kind and len(ports) != 2):
                raise ScenarioError(f"expect[{i}].ports must list the exit port(s)")
            expect.append(Expectation(tuple(str(Endpoint.parse(str(p))) for p in ports), kind))

        routes = data.get("routes") or []
        if not isinstance(routes, list) or not all(isinstance(r, str) for r in routes):
            raise ScenarioError("routes must be a list of strings")
        desc = data.get("description", "")
        if not isinstance(desc, str):
            raise ScenarioError("description must be a string")
        return cls(name=name, insertions=tuple(insertions), regime=control["regime"],
                   expect=tuple(expect), description=desc, routes=tuple(routes), **kw)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"version": VERSION, "name": self.name}
        if self.description:
            out["description"] = self.description
        if self.layers is not None:
            out["topology"] = {"layered": self.layers}
        else:
            out["topology"] = {"units": list(self.units), "links": [list(x) for x in self.links]}
        out["insertions"] = [_insertion_dict(ins) for ins in self.insertions]
        control: dict[str, Any] = {"regime": self.regime}
        if self.schedule is not None:
            control["schedule"] = [_entry_dict(*e) for e in self.schedule]
        else:
            control["targets"] = list(self.targets)
        out["control"] = control
        run: dict[str, Any] = {}
        if self.max_ticks is not None:
            run["max_ticks"] = self.max_ticks
        run["hop_cap"] = self.hop_cap
        run["seed"] = self.seed
        out["run"] = run
        if self.expect:
            out["expect"] = [{"kind": e.kind, "ports": list(e.ports)} if e.kind else {"ports": list(e.ports)}
                             for e in self.expect]
        if self.routes:
            out["routes"] = list(self.routes)
        return out


def _insertion_dict(ins: Insertion) -> dict:
    d: dict[str, Any] = {"unit": ins.unit, "side": ins.side, "ports": list(ins.ports), "state": ins.state}
    if ins.state in ("single", "product"):
        d["polarizations"] = list(ins.polarizations[:ins.photon_count])
    d["tick"] = ins.tick
    d["tap"] = ins.tap
    return d


def _entry_dict(unit, side, tick, phase) -> dict:
    d: dict[str, Any] = {"unit": unit, "side": side}
    if tick is not WILDCARD:
        d["tick"] = tick
    d["phase"] = format_phase(phase)
    return d


def loads(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    return Scenario.from_dict(data)


def dumps(sc: Scenario) -> str:
    return yaml.safe_dump(sc.to_dict(), sort_keys=False, default_flow_style=None, width=100)


def load(path) -> Scenario:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc), encoding="utf-8")
