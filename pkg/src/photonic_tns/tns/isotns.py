"""Isometric tensor networks: tensors, L-shaped gates and their emission circuit.

A site tensor is stored as ``B[k, l, u, r, b]``: physical k, left l, up u,
right r and bottom b. Left and bottom legs are incoming, up and right are
outgoing, and the isometry condition is

    sum_{k,u,r} B[k,l,u,r,b] conj(B[k,l',u,r,b']) = delta_{ll'} delta_{bb'}.

The L-shaped gate acts on (T_{j+1}, T_j, C_j) and maps |0, b, l> to
sum B[k,l,u,r,b] |u, k, r>, so the transmon of row j is emitted carrying k.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..hilbert import complete_isometry, random_isometry
from .simulate import PhotonicState, PlaquetteCircuit

ISOMETRY_TOL = 1e-10
CONTRACT_MAX_AMPLITUDES = 2 ** 22


@dataclass(frozen=True)
class TnsTensor:
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 5:
            raise ValueError("site tensor must have legs (k, l, u, r, b)")
        object.__setattr__(self, "data", np.asarray(self.data, dtype=complex))

    @property
    def physical_dim(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> dict[str, int]:
        return dict(zip("klurb", self.data.shape))

    def matrix(self) -> np.ndarray:
        """Map from incoming (b, l) to outgoing (u, k, r) as a tall matrix."""
        k, l, u, r, b = self.data.shape
        return self.data.transpose(2, 0, 3, 4, 1).reshape(u * k * r, b * l)


def verify_isometry(t: TnsTensor) -> float:
    m = t.matrix()
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


def toric_isotns_tensor(lam: int) -> TnsTensor:
    """Z_lam toric code tensor with physical qudits (l-u, u-r, r-b, b-l) mod lam."""
    if lam < 2:
        raise ValueError("lambda must be at least 2")
    B = np.zeros((lam ** 4, lam, lam, lam, lam), dtype=complex)
    for l, u, r, b in itertools.product(range(lam), repeat=4):
        i = [(l - u) % lam, (u - r) % lam, (r - b) % lam, (b - l) % lam]
        k = ((i[0] * lam + i[1]) * lam + i[2]) * lam + i[3]
        B[k, l, u, r, b] = 1.0 / lam
    return TnsTensor(B)


def toric_qubit_tensor() -> TnsTensor:
    """Bond- and physical-dimension-2 tensor with Z_2 link deltas.

    B[k,l,u,r,b] = delta(k = l+u) delta(r = u+b) / sqrt(2) (mod 2): the emitted
    qubit records the horizontal link difference and the right bond carries the
    vertical one, keeping the loop constraint k + r = l + b.
    """
    B = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    for l, u, b in itertools.product(range(2), repeat=3):
        B[(l + u) % 2, l, u, (u + b) % 2, b] = 1 / np.sqrt(2)
    return TnsTensor(B)


def product_tensor(phys: np.ndarray) -> TnsTensor:
    """Trivial bonds: the site emits ``phys`` and passes nothing on."""
    phys = np.asarray(phys, dtype=complex)
    return TnsTensor(phys.reshape(-1, 1, 1, 1, 1) / np.linalg.norm(phys))


def random_isometric_tensor(d: int, D: int, rng: np.random.Generator,
                            dims: dict[str, int] | None = None) -> TnsTensor:
    dd = {"k": d, "l": D, "u": D, "r": D, "b": D}
    dd.update(dims or {})
    iso = random_isometry(dd["u"] * dd["k"] * dd["r"], dd["b"] * dd["l"], rng)
    B = iso.reshape(dd["u"], dd["k"], dd["r"], dd["b"], dd["l"]).transpose(1, 4, 0, 2, 3)
    return TnsTensor(B)


def mps_tensor(mats) -> TnsTensor:
    """Chain tensor from MPS matrices V^k[r, l] with trivial vertical bonds."""
    V = np.asarray(mats, dtype=complex)
    return TnsTensor(V.transpose(0, 2, 1)[:, :, None, :, None])


def _register_dims(t: TnsTensor, t_dim: int | None, c_dim: int | None) -> tuple[int, int]:
    d = t.dims
    t_dim = t_dim or max(d["u"], d["b"], d["k"])
    c_dim = c_dim or max(d["l"], d["r"])
    if t_dim < max(d["u"], d["b"], d["k"]) or c_dim < max(d["l"], d["r"]):
        raise ValueError("register too small for the tensor legs")
    return t_dim, c_dim


def lshaped_unitary(t: TnsTensor, t_dim: int | None = None, c_dim: int | None = None) -> np.ndarray:
    """Unitary on (T_{j+1}, T_j, C_j) whose |0, b, l> columns are the tensor.

    The remaining columns come from a deterministic Gram-Schmidt completion.
    """
    if verify_isometry(t) > ISOMETRY_TOL:
        raise ValueError("tensor is not isometric from (l, b) to (k, u, r)")
    t_dim, c_dim = _register_dims(t, t_dim, c_dim)
    k, l, u, r, b = t.data.shape
    total = t_dim * t_dim * c_dim
    iso = np.zeros((total, b * l), dtype=complex)
    cols = []
    for bb, ll in itertools.product(range(b), range(l)):
        col = np.zeros((t_dim, t_dim, c_dim), dtype=complex)
        col[:u, :k, :r] = t.data[:, ll, :, :, bb].transpose(1, 0, 2)
        cols.append(((0 * t_dim + bb) * c_dim + ll, col.reshape(-1)))
    for j, (_, v) in enumerate(cols):
        iso[:, j] = v
    full = complete_isometry(iso)
    # put the tensor columns at their input positions |0, b, l>
    target = [c for c, _ in cols]
    rest = [c for c in range(total) if c not in set(target)]
    U = np.empty_like(full)
    U[:, target] = full[:, : len(cols)]
    U[:, rest] = full[:, len(cols):]
    return U


def tensor_from_lshaped(U: np.ndarray, shape: tuple[int, int, int, int, int],
                        t_dim: int, c_dim: int) -> TnsTensor:
    """Read B[k,l,u,r,b] = <u,k,r| U |0,b,l> back out of the gate."""
    k, l, u, r, b = shape
    u4 = U.reshape(t_dim, t_dim, c_dim, t_dim, t_dim, c_dim)
    block = u4[:u, :k, :r, 0, :b, :l]           # [u, k, r, b, l]
    return TnsTensor(block.transpose(1, 4, 0, 2, 3).copy())


def _grid(tensors, n: int, m: int):
    g = [[tensors[i][j] for j in range(m)] for i in range(n)]
    for i, j in itertools.product(range(n), range(m)):
        if not isinstance(g[i][j], TnsTensor):
            raise TypeError("tensors must be TnsTensor instances")
    return g


def isotns_circuit(tensors, n: int, m: int) -> PlaquetteCircuit:
    """Column-by-column emission of an isoTNS with its orthogonality centre at (0, 0).

    ``tensors[i][j]`` is the site in column i, row j. Row j has transmon ``Tj``
    and ancilla ``Cj``; an extra transmon ``T{m}`` catches the top bond of each
    column and is emitted as photon ("top", i). After the last column the
    ancillas are drained as photons ("right", j).
    """
    g = _grid(tensors, n, m)
    for col in g:
        for t in col:
            if verify_isometry(t) > ISOMETRY_TOL:
                raise ValueError("non-isometric tensor in the network")
    t_dim = max(max(t.dims["u"], t.dims["b"], t.dims["k"]) for col in g for t in col)
    c_dim = max(max(t.dims["l"], t.dims["r"]) for col in g for t in col)
    regs = {f"T{j}": t_dim for j in range(m + 1)}
    regs.update({f"C{j}": c_dim for j in range(m)})
    c = PlaquetteCircuit(regs, source_point=(0, 0), meta={"state": "isotns", "n": n, "m": m})
    for i in range(n):
        for j in range(m):
            c.gate(f"B[{i},{j}]", [f"T{j + 1}", f"T{j}", f"C{j}"], lshaped_unitary(g[i][j], t_dim, c_dim))
            c.emit(f"T{j}", ("site", i, j), dim=g[i][j].physical_dim)
        c.emit(f"T{m}", ("top", i), dim=g[i][m - 1].dims["u"])
    if c_dim > t_dim:
        raise ValueError("ancilla dimension exceeds the transmon register")
    # drain: move each ancilla into its (ground-state) transmon and emit it
    swap_tc = _partial_swap(t_dim, c_dim)
    for j in range(m):
        c.gate(f"S[{j}]", [f"T{j}", f"C{j}"], swap_tc)
        c.emit(f"T{j}", ("right", j), drain=True, dim=g[n - 1][j].dims["r"])
    return c


def _partial_swap(t_dim: int, c_dim: int) -> np.ndarray:
    """Unitary on (T, C) sending |0, a> to |a, 0>, completed elsewhere."""
    iso = np.zeros((t_dim * c_dim, c_dim), dtype=complex)
    for a in range(c_dim):
        iso[a * c_dim + 0, a] = 1.0
    full = complete_isometry(iso)
    U = np.empty_like(full)
    target = list(range(c_dim))            # inputs |0, a> sit at flat index a
    rest = [x for x in range(t_dim * c_dim) if x not in target]
    U[:, target] = full[:, :c_dim]
    U[:, rest] = full[:, c_dim:]
    return U


def contract_tns_small(tensors, n: int, m: int, boundary: str = "open",
                       max_amplitudes: int = CONTRACT_MAX_AMPLITUDES) -> PhotonicState:
    """Explicit contraction of the network into a normalised statevector.

    ``open``: incoming left/bottom legs are fixed to |0> and outgoing top/right
    legs stay open as photons ("top", i) and ("right", j). ``periodic``: the
    right legs close onto the left ones and the top legs onto the bottom ones.
    Output order is sites (column-major, i slowest) then top then right.
    """
    if boundary not in ("open", "periodic"):
        raise ValueError("boundary must be open or periodic")
    g = _grid(tensors, n, m)
    coords = [("site", i, j) for i in range(n) for j in range(m)]
    dims = [g[i][j].physical_dim for i in range(n) for j in range(m)]
    if boundary == "open":
        coords += [("top", i) for i in range(n)] + [("right", j) for j in range(m)]
        dims += [g[i][m - 1].dims["u"] for i in range(n)] + [g[n - 1][j].dims["r"] for j in range(m)]
    size = math.prod(dims)
    if size > max_amplitudes:
        raise ValueError(f"network output has {size} amplitudes (limit {max_amplitudes})")

    labels = itertools.count()
    kl = {(i, j): next(labels) for i in range(n) for j in range(m)}
    h = {(i, j): next(labels) for i in range(n + 1) for j in range(m)}   # bond left of column i
    v = {(i, j): next(labels) for i in range(n) for j in range(m + 1)}   # bond below row j
    if boundary == "periodic":
        for j in range(m):
            h[(n, j)] = h[(0, j)]
        for i in range(n):
            v[(i, m)] = v[(i, 0)]
    if next(labels) > 52:
        raise ValueError("network too large for a single contraction")
    ops = []
    for i in range(n):
        for j in range(m):
            ops += [g[i][j].data, [kl[i, j], h[i, j], v[i, j + 1], h[i + 1, j], v[i, j]]]
    out = [kl[i, j] for i in range(n) for j in range(m)]
    if boundary == "open":
        for j in range(m):
            e = np.zeros(g[0][j].dims["l"], dtype=complex)
            e[0] = 1
            ops += [e, [h[0, j]]]
        for i in range(n):
            e = np.zeros(g[i][0].dims["b"], dtype=complex)
            e[0] = 1
            ops += [e, [v[i, 0]]]
        out += [v[i, m] for i in range(n)] + [h[n, j] for j in range(m)]
    psi = np.einsum(*ops, out, optimize="greedy").reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("network contracts to zero")
    return PhotonicState(psi / norm, coords, dims)


def toric_site_stars(state: PhotonicState, lam: int = 2) -> list[float]:
    """<Z^{(x)4}> on each site's four link qudits for the lambda = 2 toric tensor."""
    if lam != 2:
        raise ValueError("star check implemented for lambda = 2")
    zz = np.diag([(-1) ** bin(k).count("1") for k in range(16)]).astype(complex)
    return [state.expectation({c: zz}) for c in state.coords if c[0] == "site"]
