"""Dense-matrix reference evolution, independent of the polynomial engine.

Per tick the whole single-photon unitary over every (site, polarization)
basis vector is assembled as a matrix straight from the beam-splitter and
Grover matrices, and the multi-photon state is evolved as an n-index
amplitude tensor, one tensor axis per photon.  Only the site labelling and
the stage timing are shared with the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .engine import Insertion, PhaseSchedule, check_insertions, simulate
from .fock import POLARIZATIONS, Mode, Monomial, PhotonState, max_amplitude_difference
from .topology import (
    PORTS,
    RAILS,
    SIDES,
    Endpoint,
    Topology,
    build_site_plan,
    exit_bin,
    layered_tree,
    require_valid,
)

# rows: (upper rail, lower rail); columns: (e, f)
BS = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2)
GROVER = np.array([[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]]) / 2.0


class _Basis:
    def __init__(self, t: Topology, max_ticks: int, origin: int):
        self.plan = build_site_plan(t)
        bins = [exit_bin(self.plan.ports[ep], tick)
                for ep in t.free_ports for tick in range(max_ticks + 1) if (tick - origin) % 4 == 3]
        self.sites = sorted([*self.plan.all_sites, *bins])
        self.index = {(s, p): 2 * i + k for i, s in enumerate(self.sites) for k, p in enumerate(POLARIZATIONS)}
        self.dim = 2 * len(self.sites)

    def idx(self, site: str, pol: str) -> int:
        return self.index[(site, pol)]


def _place(u: np.ndarray, basis: _Basis, rows, cols, block: np.ndarray):
    """Write ``block`` (rows <- cols) and its adjoint (cols <- rows) for both polarizations."""
    for pol in POLARIZATIONS:
        r = [basis.idx(s, pol) for s in rows]
        c = [basis.idx(s, pol) for s in cols]
        u[np.ix_(r, c)] = block
        u[np.ix_(c, r)] = block.conj().T


def tick_unitary(t: Topology, basis: _Basis, sched: PhaseSchedule, tick: int, origin: int) -> np.ndarray:
    plan = basis.plan
    u = np.eye(basis.dim, dtype=complex)
    stage = (tick - origin) % 4
    if stage in (1, 3):
        for unit in t.units:
            for side in SIDES:
                rails = [plan.rails[(unit, r)] for r in RAILS[side]]
                shift = np.diag([1.0, np.exp(1j * sched.phase(unit, side, tick))])
                if stage == 1:
                    ports = [plan.arrival(Endpoint(unit, side, p)) for p in PORTS]
                    block, rows, cols = shift @ BS, rails, ports
                else:
                    ports = [plan.ports[Endpoint(unit, side, p)] for p in PORTS]
                    block, rows, cols = BS.T @ shift, ports, rails
                for pol in POLARIZATIONS:
                    for s in rows + cols:
                        u[basis.idx(s, pol), basis.idx(s, pol)] = 0
                _place(u, basis, rows, cols, block)
    elif stage == 2:
        for unit in t.units:
            rails = [plan.rails[(unit, r)] for r in "abcd"]
            for pol in POLARIZATIONS:
                ix = [basis.idx(s, pol) for s in rails]
                u[np.ix_(ix, ix)] = GROVER
    else:
        for ep, site in plan.ports.items():
            partner = t.partner(ep)
            dest = plan.arrival(partner) if partner is not None else exit_bin(site, tick - 1)
            if (dest, POLARIZATIONS[0]) not in basis.index:
                continue
            for pol in POLARIZATIONS:
                i, j = basis.idx(site, pol), basis.idx(dest, pol)
                u[i, i] = u[j, j] = 0
                u[j, i] = u[i, j] = 1
    return u


def _insertion_tensor(ins: Insertion, basis: _Basis) -> np.ndarray:
    sites = [basis.plan.arrival(ep) for ep in ins.endpoints]
    if ins.state in ("single", "product"):
        out = np.ones(())
        for site, pol in zip(sites, ins.polarizations):
            v = np.zeros(basis.dim, dtype=complex)
            v[basis.idx(site, pol)] = 1
            out = np.multiply.outer(out, v)
        return out
    a, b = sites
    sign = 1.0 if ins.state.endswith("+") else -1.0
    pairs = [("H", "H"), ("V", "V")] if ins.state.startswith("phi") else [("H", "V"), ("V", "H")]
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for k, (pa, pb) in enumerate(pairs):
        out[basis.idx(a, pa), basis.idx(b, pb)] = (1.0 if k == 0 else sign) / math.sqrt(2)
    return out


def _apply(u, tensor: np.ndarray) -> np.ndarray:
    for axis in range(tensor.ndim):
        moved = np.moveaxis(tensor, axis, 0)
        shape = moved.shape
        moved = np.asarray(u @ moved.reshape(shape[0], -1)).reshape(shape)
        tensor = np.moveaxis(moved, 0, axis)
    return tensor


def _to_state(tensor: np.ndarray, basis: _Basis, tol: float = 1e-14) -> PhotonState:
    if tensor.ndim == 0:
        return PhotonState.vacuum()
    modes = [Mode(s, p) for s in basis.sites for p in POLARIZATIONS]
    acc: dict[tuple[int, ...], complex] = {}
    for idx in zip(*np.nonzero(np.abs(tensor) > tol)):
        key = tuple(sorted(int(i) for i in idx))
        acc[key] = acc.get(key, 0j) + complex(tensor[idx])
    return PhotonState(tuple((Monomial.of(*(modes[i] for i in key)), a) for key, a in acc.items()))


def dense_oracle(t: Topology, insertions, sched: PhaseSchedule, max_ticks: int,
                 *, unitaries: list | None = None) -> PhotonState:
    """Evolve the same scenario as :func:`dualrail.engine.simulate` with dense matrices.

    Pass a list as ``unitaries`` to collect the per-tick matrices.
    """
    require_valid(t)
    if not isinstance(max_ticks, int) or max_ticks < 1:
        raise ValueError(f"max_ticks must be an integer >= 1, got {max_ticks!r}")
    insertions = list(insertions)
    origin = check_insertions(t, insertions)
    basis = _Basis(t, max_ticks, origin)
    tensor = np.ones((), dtype=complex)
    for tick in range(max_ticks + 1):
        if tick > 0 and tensor.ndim:
            u = tick_unitary(t, basis, sched, tick, origin)
            if unitaries is not None:
                unitaries.append(u)
            tensor = _apply(sparse.csr_matrix(u), tensor)
        for ins in insertions:
            if ins.tick == tick:
                tensor = np.multiply.outer(tensor, _insertion_tensor(ins, basis))
    return _to_state(tensor, basis)


# -- randomized equivalence check ----------------------------------------------

@dataclass(frozen=True)
class Scenario:
    topology: Topology
    insertions: tuple[Insertion, ...]
    schedule: PhaseSchedule
    max_ticks: int


def random_scenario(rng: np.random.Generator, max_layers: int = 3, max_ticks: int = 24) -> Scenario:
    t = layered_tree(int(rng.integers(1, max_layers + 1)))
    unit = t.units[int(rng.integers(len(t.units)))]
    side = SIDES[int(rng.integers(2))]
    kind = ("phi+", "phi-", "psi+", "psi-", "product", "single")[int(rng.integers(6))]
    ports = (PORTS[int(rng.integers(2))],) if kind == "single" else ("e", "f")
    pols = tuple(POLARIZATIONS[int(rng.integers(2))] for _ in ports)
    tap = any(not t.is_free(Endpoint(unit, side, p)) for p in ports)
    ins = Insertion(unit, side, ports, kind, pols, tap=tap)
    ticks = int(rng.integers(4, max_ticks + 1))
    entries = {(u, s, k): math.pi * int(rng.integers(2))
               for u in t.units for s in SIDES for k in range(1, ticks + 1)}
    return Scenario(t, (ins,), PhaseSchedule("active", entries), ticks)


def oracle_check(seed: int = 1, trials: int = 100) -> dict:
    """Run ``trials`` random scenarios through both evolutions.

    Returns the maximum termwise amplitude deviation and the maximum per-tick
    norm deviation of the engine.
    """
    rng = np.random.default_rng(seed)
    worst_amp = worst_norm = 0.0
    for _ in range(trials):
        sc = random_scenario(rng)
        final, trace = simulate(sc.topology, sc.insertions, sc.schedule, sc.max_ticks)
        ref = dense_oracle(sc.topology, sc.insertions, sc.schedule, sc.max_ticks)
        worst_amp = max(worst_amp, max_amplitude_difference(final, ref))
        worst_norm = max(worst_norm, max(abs(n - 1) for n in trace.norms))
    return {"trials": trials, "seed": seed, "max_amplitude_deviation": worst_amp,
            "max_norm_deviation": worst_norm}
