"""Gate-level circuits for sequential photon emission and an ideal statevector simulator.

A circuit is an ordered list of events on named registers (transmons ``T*``,
ancilla qudits ``A*``/``C*``). Gate events apply a unitary on a footprint of
registers; emission events swap a transmon into a fresh photonic qudit,
leaving the transmon in its ground state. Photons are appended in emission
order and remember the lattice coordinate they were emitted for.

The simulator keeps every register truncated to the levels that actually
carry amplitude, so a qudit that only ever holds a bond index does not pay
for its full register dimension.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

MAX_AMPLITUDES = 2 ** 22
GROUND_TOL = 1e-12

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def swap_gate(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


SWAP = swap_gate(2)


class CircuitTooLarge(ValueError):
    pass


@dataclass
class GateEvent:
    """Unitary on ``registers`` (first register is the slowest index of ``matrix``).

    ``matrix`` may be None for depth-only circuits that are never simulated.
    """

    name: str
    registers: tuple[str, ...]
    matrix: np.ndarray | None
    layer: int | None = None
    kind: str = "unitary"

    def __post_init__(self):
        self.registers = tuple(self.registers)
        if len(set(self.registers)) != len(self.registers):
            raise ValueError(f"repeated register in {self.registers}")


@dataclass
class EmitEvent:
    """Emission from transmon ``register`` into a photon labelled ``coord``."""

    register: str
    coord: Hashable
    drain: bool = False
    dim: int | None = None
    layer: int | None = None
    kind: str = "emit"

    @property
    def registers(self) -> tuple[str, ...]:
        return (self.register,)


@dataclass
class PlaquetteCircuit:
    registers: dict[str, int]
    events: list = field(default_factory=list)
    source_point: tuple = (0, 0)
    meta: dict = field(default_factory=dict)

    def gate(self, name: str, registers: Sequence[str], matrix: np.ndarray | None) -> GateEvent:
        for r in registers:
            if r not in self.registers:
                raise KeyError(f"unknown register {r!r}")
        if matrix is not None:
            dim = math.prod(self.registers[r] for r in registers)
            if matrix.shape != (dim, dim):
                raise ValueError(f"{name}: matrix {matrix.shape} does not fit registers of dim {dim}")
        ev = GateEvent(name, tuple(registers), matrix)
        self.events.append(ev)
        return ev

    def emit(self, register: str, coord: Hashable, drain: bool = False,
             dim: int | None = None) -> EmitEvent:
        """``dim`` keeps only the lowest levels of the register in the photon."""
        if register not in self.registers:
            raise KeyError(f"unknown register {register!r}")
        if dim is not None and not 1 <= dim <= self.registers[register]:
            raise ValueError("photon dimension must not exceed the register")
        ev = EmitEvent(register, coord, drain, dim)
        self.events.append(ev)
        return ev

    @property
    def gates(self) -> list[GateEvent]:
        return [e for e in self.events if e.kind == "unitary"]

    @property
    def emissions(self) -> list[EmitEvent]:
        return [e for e in self.events if e.kind == "emit"]

    def photon_coords(self) -> list:
        return [e.coord for e in self.emissions]

    def photon_dims(self) -> list[int]:
        return [e.dim or self.registers[e.register] for e in self.emissions]

    def to_json(self) -> str:
        mats: dict[str, dict] = {}
        events = []
        circuit_depth(self)
        for e in self.events:
            if e.kind == "emit":
                events.append({"kind": "emit", "register": e.register, "coord": _jsonable(e.coord),
                               "drain": e.drain, "dim": e.dim, "layer": e.layer})
                continue
            ref = None
            if e.matrix is not None:
                m = np.ascontiguousarray(e.matrix, dtype=complex)
                ref = hashlib.sha256(m.tobytes()).hexdigest()[:16]
                mats.setdefault(ref, {"re": m.real.tolist(), "im": m.imag.tolist()})
            events.append({"kind": "unitary", "name": e.name, "footprint": list(e.registers),
                           "matrix": ref, "layer": e.layer})
        return json.dumps({"registers": self.registers, "source_point": list(self.source_point),
                           "meta": self.meta, "events": events, "matrices": mats}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PlaquetteCircuit":
        d = json.loads(text)
        c = cls({k: int(v) for k, v in d["registers"].items()}, [], tuple(d["source_point"]), d["meta"])
        for e in d["events"]:
            if e["kind"] == "emit":
                c.emit(e["register"], _coord(e["coord"]), e["drain"], e.get("dim"))
            else:
                m = None
                if e["matrix"] is not None:
                    raw = d["matrices"][e["matrix"]]
                    m = np.array(raw["re"]) + 1j * np.array(raw["im"])
                c.gate(e["name"], e["footprint"], m)
        circuit_depth(c)
        return c


def _jsonable(coord):
    return list(coord) if isinstance(coord, tuple) else coord


def _coord(raw):
    return tuple(raw) if isinstance(raw, list) else raw


def compose(dims: Sequence[int], steps: Iterable[tuple[np.ndarray, Sequence[int]]]) -> np.ndarray:
    """Matrix of a product of gates, each acting on positions of a small register list.

    Steps are applied in order, so the last step is the leftmost factor.
    """
    dims = list(dims)
    total = math.prod(dims)
    u = np.eye(total, dtype=complex).reshape(dims + [total])
    for gate, pos in steps:
        pos = list(pos)
        k = len(pos)
        g = gate.reshape([dims[p] for p in pos] * 2)
        u = np.tensordot(g, u, axes=(list(range(k, 2 * k)), pos))
        u = np.moveaxis(u, list(range(k)), pos)
    return u.reshape(total, total)


def circuit_depth(c: PlaquetteCircuit) -> int:
    """As-soon-as-possible layering; each gate event is one layer on its footprint.

    Emissions take no layer of their own but keep their order on the register.
    Layer indices are written back into the events.
    """
    last: dict[str, int] = {}
    depth = 0
    for e in c.events:
        start = max((last.get(r, 0) for r in e.registers), default=0)
        if e.kind == "unitary":
            e.layer = start + 1
            depth = max(depth, e.layer)
        else:
            e.layer = start
        for r in e.registers:
            last[r] = e.layer
    return depth


@dataclass
class PhotonicState:
    """Photonic statevector, photon order = ``coords`` order (first is slowest)."""

    vector: np.ndarray
    coords: list
    dims: list[int]

    def __post_init__(self):
        if len(set(map(_key, self.coords))) != len(self.coords):
            raise ValueError("photon coordinates must be unique")
        if self.vector.size != math.prod(self.dims):
            raise ValueError("vector size does not match photon dims")

    def tensor(self) -> np.ndarray:
        return self.vector.reshape(self.dims) if self.dims else self.vector.reshape(())

    def index(self, coord) -> int:
        keys = [_key(c) for c in self.coords]
        return keys.index(_key(coord))

    def reordered(self, coords: Sequence) -> "PhotonicState":
        perm = [self.index(c) for c in coords]
        t = np.transpose(self.tensor(), perm)
        return PhotonicState(t.reshape(-1).copy(), list(coords), [self.dims[p] for p in perm])

    def overlap(self, other: "PhotonicState") -> complex:
        o = other.reordered(self.coords)
        return complex(np.vdot(self.vector, o.vector))

    def expectation(self, ops: dict) -> float:
        """<psi| prod_c O_c |psi> for single-qudit operators keyed by coordinate.

        Values may be Pauli letters or matrices.
        """
        t = self.tensor()
        out = t
        for coord, op in ops.items():
            m = PAULI[op] if isinstance(op, str) else np.asarray(op)
            ax = self.index(coord)
            out = np.moveaxis(np.tensordot(m, out, axes=([1], [ax])), 0, ax)
        return float(np.real(np.vdot(t.reshape(-1), out.reshape(-1))))


def _key(c):
    return json.dumps(_jsonable(c))


class _Register:
    __slots__ = ("name", "full", "axis")

    def __init__(self, name, full):
        self.name, self.full, self.axis = name, full, None


def simulate_circuit(c: PlaquetteCircuit, max_amplitudes: int = MAX_AMPLITUDES) -> PhotonicState:
    """Apply the events of ``c`` to all registers in |0> and return the photons.

    Raises CircuitTooLarge when the stored state or the output exceeds
    ``max_amplitudes`` and ValueError if a register is not back in its ground
    state at the end.
    """
    out_size = math.prod(c.photon_dims())
    if out_size > max_amplitudes:
        raise CircuitTooLarge(f"output has {out_size} amplitudes (limit {max_amplitudes})")
    psi = np.ones((), dtype=complex)
    axes: list = []          # labels of psi axes: ("reg", name) or ("ph", index)
    regs = {name: _Register(name, d) for name, d in c.registers.items()}
    coords, dims = [], []

    def axis_of(label):
        return axes.index(label)

    def ensure(name):
        nonlocal psi
        if ("reg", name) not in axes:
            psi = psi[..., None]
            axes.append(("reg", name))

    for ev in c.events:
        if ev.kind == "unitary":
            if ev.matrix is None:
                raise ValueError(f"gate {ev.name} has no matrix")
            for r in ev.registers:
                ensure(r)
            full = [regs[r].full for r in ev.registers]
            pos = [axis_of(("reg", r)) for r in ev.registers]
            cur = [psi.shape[p] for p in pos]
            k = len(pos)
            m = ev.matrix.reshape(full * 2)
            m = m[(Ellipsis,) + tuple(slice(0, n) for n in cur)]
            used = np.abs(m) > 0
            keep = []
            for a in range(k):
                other = tuple(b for b in range(2 * k) if b != a)
                nz = np.nonzero(np.any(used, axis=other))[0]
                keep.append(int(nz[-1]) + 1 if nz.size else 1)
            m = m[tuple(slice(0, n) for n in keep) + (Ellipsis,)]
            new_size = psi.size // math.prod(cur) * math.prod(keep)
            if new_size > max_amplitudes:
                raise CircuitTooLarge(f"state would hold {new_size} amplitudes (limit {max_amplitudes})")
            psi = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), pos))
            psi = np.moveaxis(psi, list(range(k)), pos)
        else:
            name = ev.register
            ensure(name)
            p = axis_of(("reg", name))
            # swap the transmon with a fresh photon in |0>; the transmon keeps that |0>
            axes[p] = ("ph", len(coords))
            psi = psi[..., None]
            axes.append(("reg", name))
            coords.append(ev.coord)
            dims.append(ev.dim or regs[name].full)
            if psi.shape[p] > dims[-1]:
                if np.linalg.norm(np.take(psi, range(dims[-1], psi.shape[p]), axis=p)) > GROUND_TOL:
                    raise ValueError(f"photon {ev.coord} has amplitude above its declared dimension")
                psi = np.take(psi, range(dims[-1]), axis=p)
            q = axis_of(("reg", name))
            excited = np.take(psi, range(1, psi.shape[q]), axis=q) if psi.shape[q] > 1 else None
            if excited is not None and np.linalg.norm(excited) > GROUND_TOL:
                raise AssertionError(f"transmon {name} not in its ground state after emission")
            psi = np.take(psi, 0, axis=q)
            axes.pop(q)

    leftover = [i for i, a in enumerate(axes) if a[0] == "reg"]
    for i in sorted(leftover, reverse=True):
        if psi.shape[i] > 1 and np.linalg.norm(np.take(psi, range(1, psi.shape[i]), axis=i)) > 1e-10:
            raise ValueError(f"register {axes[i][1]} was not drained to its ground state")
        psi = np.take(psi, 0, axis=i)
        axes.pop(i)
    order = [a[1] for a in axes]
    psi = np.transpose(psi, np.argsort(order)) if order else psi
    # pad truncated photon axes back to their register dimension
    pad = [(0, d - s) for d, s in zip(dims, psi.shape)]
    psi = np.pad(psi, pad) if pad else psi
    return PhotonicState(psi.reshape(-1).copy(), coords, dims)


@dataclass
class StabilizerReport:
    kind: str
    labels: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.abs(self.values) > 1 + 1e-9):
            raise ValueError("stabilizer expectations must lie in [-1, 1]")

    def all_plus(self, tol: float = 1e-10) -> bool:
        return bool(np.all(np.abs(self.values - 1) <= tol))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "operator", "expectation"])
            for lab, v in zip(self.labels, self.values):
                w.writerow([self.kind, lab, repr(float(v))])


def stabilizer_report(state: PhotonicState, kind: str, stabilizers: dict[str, dict]) -> StabilizerReport:
    labels = list(stabilizers)
    return StabilizerReport(kind, labels, [state.expectation(stabilizers[k]) for k in labels])
