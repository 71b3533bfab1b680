"""Emission circuits for 2D photonic states built plaquette by plaquette.

Rows j = 0..m-1 each own a transmon ``Tj`` and ancilla qubits ``Aj`` (or
``Aj_k`` for larger plaquettes). Column i of photons is emitted after the
plaquette unitaries of column i; the ancillas carry the columns still to come
and are drained by swap-and-emit at the end.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..budget import plan_ancilla
from ..hilbert import complete_isometry, random_isometry, stack_isometry
from ..mpdo import (CLUSTER_LAST_V0, CLUSTER_LAST_V1, CLUSTER_V0, CLUSTER_V1, MpsTarget)
from .simulate import (CNOT, CZ, H, I2, SWAP, PhotonicState, PlaquetteCircuit, compose)


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    m: int
    L_p: int = 2
    D_prime: int = 2
    L_c: int | None = None
    qudit_dim: int = 2
    physical_dim: int = 2
    couplers: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.L_p < 2 or self.D_prime < 2:
            raise ValueError("need L_p >= 2 and D' >= 2")
        if self.L_c is None:
            object.__setattr__(self, "L_c", plan_ancilla(self.L_p, self.D_prime))
        if self.D_prime ** self.L_c < 2 ** (self.L_p - 1):
            raise ValueError("ancilla cavities cannot hold L_p - 1 qubits per row")
        if self.n < self.L_p or self.m < self.L_p:
            raise ValueError("lattice must be at least L_p x L_p")


def _row_regs(j: int) -> tuple[str, str]:
    return f"T{j}", f"A{j}"


def _plaquette(c: PlaquetteCircuit, name: str, rows: list[int], steps: list) -> None:
    """One gate event on (T, A) of the given rows; steps use (row, 'T'|'A') addresses."""
    regs = [r for j in rows for r in _row_regs(j)]
    slot = {(j, kind): 2 * a + (kind == "A") for a, j in enumerate(rows) for kind in "TA"}
    mat = compose([2] * len(regs), [(g, [slot[q] for q in where]) for g, where in steps])
    c.gate(name, regs, mat)


def _staggered(m: int) -> list[int]:
    """Plaquette start rows: even tiling first, then odd."""
    return list(range(0, m - 1, 2)) + list(range(1, m - 1, 2))


def _drain(c: PlaquetteCircuit, m: int, column: int) -> None:
    for j in range(m):
        t, a = _row_regs(j)
        c.gate(f"S[{j}]", [t, a], SWAP)
    for j in range(m):
        c.emit(f"T{j}", (column, j), drain=True)


def cluster2d_circuit(n: int, m: int) -> PlaquetteCircuit:
    """n x m cluster state (n photon columns) with one ancilla qubit per row.

    Column 0 prepares T and A rows in |+>, entangles T-T vertically, A-A
    vertically and T-A horizontally, then emits the transmons. Each later
    column swaps the ancilla into the transmon, re-prepares the ancilla, adds
    the next vertical and horizontal CZs and emits. Plaquettes on rows (j, j+1)
    come in two staggered tilings, so each column costs two layers.
    """
    if n < 2 or m < 2:
        raise ValueError("cluster lattice needs n, m >= 2")
    regs = {r: 2 for j in range(m) for r in _row_regs(j)}
    c = PlaquetteCircuit(regs, source_point=(0, 0), meta={"state": "cluster2d", "n": n, "m": m})
    for col in range(n - 1):
        fresh = set(range(m))
        for j in _staggered(m):
            steps = []
            for row in (j, j + 1):
                if row in fresh:
                    fresh.discard(row)
                    if col == 0:
                        steps += [(H, [(row, "T")]), (H, [(row, "A")])]
                    else:
                        steps += [(SWAP, [(row, "T"), (row, "A")]), (H, [(row, "A")])]
                    steps.append((CZ, [(row, "T"), (row, "A")]))
            if col == 0:
                steps.append((CZ, [(j, "T"), (j + 1, "T")]))
            steps.append((CZ, [(j, "A"), (j + 1, "A")]))
            _plaquette(c, f"U[{col},{j}]", [j, j + 1], steps)
        for j in range(m):
            c.emit(f"T{j}", (col, j))
    _drain(c, m, n - 1)
    return c


def graph_state(coords: list, edges: list[tuple]) -> PhotonicState:
    """Direct CZ-graph construction: prod CZ_e |+>^N on the listed qubits."""
    n = len(coords)
    idx = {cd: k for k, cd in enumerate(coords)}
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)
    sign = np.ones(len(bits))
    for a, b in edges:
        sign *= np.where(bits[:, idx[a]] & bits[:, idx[b]], -1.0, 1.0)
    return PhotonicState((sign / np.sqrt(2.0 ** n)).astype(complex), list(coords), [2] * n)


def grid_edges(n: int, m: int) -> list[tuple]:
    e = [((i, j), (i + 1, j)) for i in range(n - 1) for j in range(m)]
    e += [((i, j), (i, j + 1)) for i in range(n) for j in range(m - 1)]
    return e


def cluster_stabilizers(n: int, m: int) -> dict[str, dict]:
    out = {}
    nbrs = {(i, j): [] for i in range(n) for j in range(m)}
    for a, b in grid_edges(n, m):
        nbrs[a].append(b)
        nbrs[b].append(a)
    for q, ns in nbrs.items():
        ops = {q: "X"}
        ops.update({p: "Z" for p in ns})
        out[f"K{q}"] = ops
    return out


def chain_circuit(n: int) -> PlaquetteCircuit:
    """Linear cluster from the source unitaries: cavity qubit C and transmon T.

    Each round applies the completion of (V^0; V^1) on (T, C) with T in |0>
    and emits; the last round uses the disentangling isometry so the cavity
    ends in |0>.
    """
    if n < 1:
        raise ValueError("need at least one photon")
    c = PlaquetteCircuit({"T": 2, "C": 2}, meta={"state": "cluster1d", "n": n})
    c.gate("prep", ["T", "C"], np.kron(I2, H))
    # (V^0; V^1) maps |c> to sum_i |i>_T V^i |c>, i.e. rows ordered (T, C) with T slowest
    bulk = complete_isometry(stack_isometry(CLUSTER_V0, CLUSTER_V1))
    last = complete_isometry(stack_isometry(CLUSTER_LAST_V0, CLUSTER_LAST_V1))
    for k in range(n):
        c.gate(f"U[{k}]", ["T", "C"], last if k == n - 1 else bulk)
        c.emit("T", k)
    return c


def _toric_faces(n: int, m: int) -> tuple[list, list]:
    """Rotated-lattice stabilizers on an n x m qubit grid (i = column, j = row).

    Returns (x_type, z_type) lists of (column, qubit list) pairs. Face (i, j)
    covers columns i, i+1 and rows j, j+1; it is X-type when i + j is even.
    Weight-two X checks close the top and bottom edges next to Z faces and
    weight-two Z checks close the left and right edges next to X faces.
    """
    xs, zs = [], []
    for i in range(n - 1):
        for j in range(m - 1):
            qs = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
            (xs if (i + j) % 2 == 0 else zs).append((i, qs))
        for j in (0, m - 1):
            face_row = 0 if j == 0 else m - 2
            if (i + face_row) % 2 == 1:
                xs.append((i, [(i, j), (i + 1, j)]))
    for i in (0, n - 1):
        face_col = 0 if i == 0 else n - 2
        for j in range(m - 1):
            if (face_col + j) % 2 == 0:
                zs.append((face_col, [(i, j), (i, j + 1)]))
    return xs, zs


def toric_stabilizers(n: int, m: int) -> tuple[dict[str, dict], dict[str, dict]]:
    """Star checks A_s (Z type) and plaquette checks B_p (X type) of the planar patch."""
    xs, zs = _toric_faces(n, m)
    star = {f"A{tuple(qs)}": {q: "Z" for q in qs} for _, qs in zs}
    plaq = {f"B{tuple(qs)}": {q: "X" for q in qs} for _, qs in xs}
    return star, plaq


def toric_circuit(n: int, m: int) -> PlaquetteCircuit:
    """Planar toric-code patch on n x m photons.

    Starting from |0...0> (all stars satisfied), each X check is enforced by a
    Hadamard on its representative qubit followed by CNOTs onto the rest. The
    representative is the top qubit of the check in the right-hand column,
    which still sits untouched in the ancilla. Column i's plaquettes hold the
    checks spanning columns i and i+1; plaquettes with no check are kept as
    identities so both staggered tilings appear in every column.
    """
    if n < 2 or m < 2:
        raise ValueError("toric patch needs n, m >= 2")
    xs, _ = _toric_faces(n, m)
    regs = {r: 2 for j in range(m) for r in _row_regs(j)}
    c = PlaquetteCircuit(regs, source_point=(0, 0), meta={"state": "toric", "n": n, "m": m})
    by_col: dict[int, list] = {}
    for col, qs in xs:
        by_col.setdefault(col, []).append(qs)
    for col in range(n - 1):
        fresh = set(range(m))
        placed: set[int] = set()
        for j in _staggered(m):
            rows = [j, j + 1]
            steps = []
            for row in rows:
                if row in fresh and col > 0:
                    steps.append((SWAP, [(row, "T"), (row, "A")]))
                fresh.discard(row)
            for k, qs in enumerate(by_col.get(col, [])):
                if k in placed or not {q[1] for q in qs} <= set(rows):
                    continue
                # single-row checks go into the plaquette of their own tiling only
                if len(qs) == 4 and min(q[1] for q in qs) != j:
                    continue
                placed.add(k)
                rep = min((q for q in qs if q[0] == col + 1), key=lambda q: q[1])
                addr = {q: (q[1], "A" if q[0] == col + 1 else "T") for q in qs}
                steps.append((H, [addr[rep]]))
                steps += [(CNOT, [addr[rep], addr[q]]) for q in qs if q != rep]
            _plaquette(c, f"U[{col},{j}]", rows, steps)
        missing = set(range(len(by_col.get(col, [])))) - placed
        if missing:
            raise ValueError("unsupported geometry: a check does not fit a plaquette")
        for j in range(m):
            c.emit(f"T{j}", (col, j))
    _drain(c, m, n - 1)
    return c


def product_zero_state(n: int, m: int) -> PhotonicState:
    coords = [(i, j) for i in range(n) for j in range(m)]
    v = np.zeros(2 ** len(coords), dtype=complex)
    v[0] = 1.0
    return PhotonicState(v, coords, [2] * len(coords))


def rppeps_circuit(n: int, m: int, L_p: int = 2, unitaries: str = "identity",
                   seed: int = 0) -> PlaquetteCircuit:
    """Generic plaquette sequence: U_[i,j] on rows j..j+L_p-1 for i < n, j <= m - L_p.

    Each row has a transmon and L_p - 1 ancilla qubits. After U_[i,j] the
    transmon of row j is emitted; the last plaquette of a column also emits
    the rows above it. The drain then emits L_p - 1 further columns, so the
    photonic lattice is (n + L_p - 1) x m.

    ``unitaries`` is "identity", "random" (Haar, seeded) or "none" for a
    depth-only circuit without matrices.
    """
    spec = LatticeSpec(max(n, L_p), m, L_p)
    if unitaries not in ("identity", "random", "none"):
        raise ValueError("unitaries must be identity, random or none")
    rng = np.random.default_rng(seed)
    rows_regs = {j: [f"T{j}"] + [f"A{j}_{k}" for k in range(L_p - 1)] for j in range(m)}
    regs = {r: 2 for rs in rows_regs.values() for r in rs}
    c = PlaquetteCircuit(regs, source_point=(0, 0),
                         meta={"state": "rp-peps", "n": n, "m": m, "L_p": L_p, "L_c": spec.L_c})
    dim = 2 ** (L_p * L_p)
    for i in range(n):
        for j in range(m - L_p + 1):
            foot = [r for row in range(j, j + L_p) for r in rows_regs[row]]
            if unitaries == "none":
                mat = None
            elif unitaries == "identity":
                mat = np.eye(dim, dtype=complex)
            else:
                mat = random_isometry(dim, dim, rng)
            c.gate(f"U[{i},{j}]", foot, mat)
            emit_rows = [j] if j < m - L_p else list(range(j, m))
            for row in emit_rows:
                c.emit(f"T{row}", (i, row))
    swap = None if unitaries == "none" else SWAP
    for k in range(L_p - 1):
        for j in range(m):
            c.gate(f"S[{k},{j}]", [f"T{j}", f"A{j}_{k}"], swap)
        for j in range(m):
            c.emit(f"T{j}", (n + k, j), drain=True)
    return c


def column_mps(c: PlaquetteCircuit, rows: int) -> MpsTarget:
    """View a row-parallel emission circuit as an MPS over photon columns.

    The bond is the joint state of the ancillas ``A0..A{rows-1}`` and each
    round emits one column of ``rows`` transmons as a single qudit of
    dimension 2^rows. Works for circuits whose columns are separated by full
    emission sweeps (cluster, toric).
    """
    t_regs = [f"T{j}" for j in range(rows)]
    a_regs = [f"A{j}" for j in range(rows)]
    order = t_regs + a_regs
    pos = {r: k for k, r in enumerate(order)}
    dims = [2] * len(order)
    rounds, steps = [], []
    emitted = 0
    for ev in c.events:
        if ev.kind == "unitary":
            steps.append((ev.matrix, [pos[r] for r in ev.registers]))
            continue
        emitted += 1
        if emitted % rows:
            continue
        u = compose(dims, steps).reshape(2 ** rows, 2 ** rows, 2 ** rows, 2 ** rows)
        # V^k[a_out, a_in] = <k_T, a_out| U |0_T, a_in>
        rounds.append(tuple(u[k, :, 0, :] for k in range(2 ** rows)))
        steps = []
    zero = np.zeros(2 ** rows, dtype=complex)
    zero[0] = 1.0
    return MpsTarget(tuple(rounds), zero, zero)
