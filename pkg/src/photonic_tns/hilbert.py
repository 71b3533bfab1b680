"""Hilbert-space bookkeeping for the cavity-transmon source.

Basis convention used by every module in the package: factors are stored
slow-to-fast, and the default layout is ``("transmon", "cavity")`` so that

    flat index = transmon_index * N_C + cavity_index.

Operators on the composite space are therefore ``kron(op_transmon, op_cavity)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TRANSMON = "transmon"
CAVITY = "cavity"
DEFAULT_LAYOUT = (TRANSMON, CAVITY)

UNITARITY_TOL = 1e-12
ISOMETRY_TOL = 1e-10
_GS_DEPENDENCE_TOL = 1e-8


@dataclass(frozen=True)
class TruncationSpec:
    """Fock cutoff, number of transmon levels and ancilla dimension."""

    cavity_cutoff: int = 5
    transmon_levels: int = 3
    ancilla_dim: int = 2

    def __post_init__(self):
        if self.cavity_cutoff < 1 or self.ancilla_dim < 1:
            raise ValueError("cutoffs must be positive")
        if self.transmon_levels not in (2, 3):
            raise ValueError(f"transmon_levels must be 2 or 3, got {self.transmon_levels}")
        if not self.ancilla_dim < self.cavity_cutoff:
            raise ValueError(
                f"ancilla_dim ({self.ancilla_dim}) must be smaller than "
                f"cavity_cutoff ({self.cavity_cutoff})"
            )


@dataclass(frozen=True)
class CompositeSpace:
    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("factor labels must be unique")
        if any(d < 1 for d in self.dims):
            raise ValueError("factor dimensions must be positive")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def factor_dim(self, label: str) -> int:
        return self.dims[self.labels.index(label)]

    def flat_index(self, multi_index: dict[str, int] | Sequence[int]) -> int:
        if isinstance(multi_index, dict):
            multi_index = [multi_index[lab] for lab in self.labels]
        return int(np.ravel_multi_index(tuple(multi_index), self.dims))

    def multi_index(self, flat: int) -> dict[str, int]:
        idx = np.unravel_index(flat, self.dims)
        return {lab: int(i) for lab, i in zip(self.labels, idx)}

    def basis_vector(self, **levels: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.flat_index({lab: levels.get(lab, 0) for lab in self.labels})] = 1.0
        return v

    def embed(self, label: str, op: np.ndarray) -> np.ndarray:
        """Kronecker-embed a single-factor operator, identity elsewhere."""
        mats = [op if lab == label else np.eye(d) for lab, d in zip(self.labels, self.dims)]
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    space: CompositeSpace

    def __post_init__(self):
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match space dimension {self.space.dim}"
            )

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_space(self, other)
        return OperatorMatrix(self.matrix @ other.matrix, self.space)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_space(self, other)
        return OperatorMatrix(self.matrix + other.matrix, self.space)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(scalar * self.matrix, self.space)

    __rmul__ = __mul__

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, self.space)


def _check_same_space(a: OperatorMatrix, b: OperatorMatrix):
    if a.space != b.space:
        raise ValueError("operators act on different spaces")


def build_space(spec: TruncationSpec, layout: Sequence[str] = DEFAULT_LAYOUT) -> CompositeSpace:
    if sorted(layout) != sorted(DEFAULT_LAYOUT):
        raise ValueError(f"layout must order the factors {DEFAULT_LAYOUT}, got {tuple(layout)}")
    dims = {TRANSMON: spec.transmon_levels, CAVITY: spec.cavity_cutoff}
    return CompositeSpace(tuple(layout), tuple(dims[lab] for lab in layout))


def source_space(cavity_cutoff: int, transmon_levels: int) -> CompositeSpace:
    return CompositeSpace(DEFAULT_LAYOUT, (transmon_levels, cavity_cutoff))


def lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def sigma(levels: int, alpha: int, beta: int) -> np.ndarray:
    """Transition operator |alpha><beta| on a ``levels``-dimensional factor."""
    if not (0 <= alpha < levels and 0 <= beta < levels):
        raise ValueError(f"sigma({alpha},{beta}) outside {levels} levels")
    s = np.zeros((levels, levels), dtype=complex)
    s[alpha, beta] = 1.0
    return s


def make_operator(kind: str, space: CompositeSpace, factor: str, alpha: int | None = None,
                  beta: int | None = None) -> OperatorMatrix:
    """Build ``lower``, ``raise``, ``number`` or ``sigma`` on one factor."""
    if factor not in space.labels:
        raise ValueError(f"space has no factor {factor!r}")
    d = space.factor_dim(factor)
    if kind == "lower":
        op = lowering(d)
    elif kind == "raise":
        op = lowering(d).conj().T
    elif kind == "number":
        op = np.diag(np.arange(d)).astype(complex)
    elif kind == "sigma":
        if alpha is None or beta is None:
            raise ValueError("sigma needs both alpha and beta")
        op = sigma(d, alpha, beta)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    if kind in ("lower", "raise") and d < 2:
        raise ValueError("ladder operators need at least two levels")
    return OperatorMatrix(space.embed(factor, op), space)


def permute_basis(op: OperatorMatrix, new_order: Sequence[str]) -> OperatorMatrix:
    """Reorder the tensor factors of ``op`` (a similarity by a permutation)."""
    space = op.space
    if sorted(new_order) != sorted(space.labels):
        raise ValueError(f"factor sets differ: {tuple(new_order)} vs {space.labels}")
    axes = [space.labels.index(lab) for lab in new_order]
    n = len(axes)
    t = op.matrix.reshape(space.dims + space.dims)
    t = t.transpose(axes + [a + n for a in axes])
    new_space = CompositeSpace(tuple(new_order), tuple(space.dims[a] for a in axes))
    return OperatorMatrix(t.reshape(new_space.dim, new_space.dim), new_space)


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def isometry_defect(stacked: np.ndarray) -> float:
    """max |A^dag A - I| for an isometry stored as a tall matrix."""
    return float(np.max(np.abs(stacked.conj().T @ stacked - np.eye(stacked.shape[1]))))


def complete_isometry(iso: np.ndarray, tol: float = _GS_DEPENDENCE_TOL) -> np.ndarray:
    """Extend the orthonormal columns of ``iso`` to a square unitary.

    Canonical basis vectors are offered in ascending order and kept when their
    residual after (twice repeated) Gram-Schmidt exceeds ``tol``.
    """
    n, k = iso.shape
    cols = [iso[:, j].astype(complex) for j in range(k)]
    basis = np.array(cols).T if cols else np.zeros((n, 0), dtype=complex)
    for e in range(n):
        if basis.shape[1] == n:
            break
        v = np.zeros(n, dtype=complex)
        v[e] = 1.0
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            basis = np.column_stack([basis, v / norm])
    if basis.shape[1] != n:
        raise ValueError("could not complete isometry to a unitary")
    return basis


@dataclass(frozen=True)
class TargetUnitary:
    """Full-space unitary whose H_D x H_T block realises a target isometry.

    ``matrix`` is in the natural basis of ``space``; ``permuted`` is the same
    unitary written in the reordered basis [H_D x H_T, others], where it has
    the block form [[A, B1], [0, B2]].
    """

    matrix: np.ndarray
    isometry: np.ndarray
    permutation: np.ndarray
    space: CompositeSpace
    ancilla_dim: int
    permuted: np.ndarray = field(repr=False)

    @property
    def B1(self) -> np.ndarray:
        k = self.isometry.shape[0]
        return self.permuted[:k, self.ancilla_dim:]

    @property
    def B2(self) -> np.ndarray:
        k = self.isometry.shape[0]
        return self.permuted[k:, self.ancilla_dim:]

    @property
    def leak_block(self) -> np.ndarray:
        k = self.isometry.shape[0]
        return self.permuted[k:, : self.ancilla_dim]

    @property
    def input_indices(self) -> np.ndarray:
        """Flat indices of |c>_C|0>_T, c < D, in the natural basis."""
        return self.permutation[: self.ancilla_dim]

    @property
    def output_indices(self) -> np.ndarray:
        """Flat indices spanning H_D x H_T in the natural basis."""
        return self.permutation[: 2 * self.ancilla_dim]

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.matrix)


def subspace_permutation(space: CompositeSpace, ancilla_dim: int) -> np.ndarray:
    """Natural-basis indices ordered as [H_D x H_T (transmon slow), others]."""
    first = [space.flat_index({TRANSMON: j, CAVITY: c}) for j in range(2) for c in range(ancilla_dim)]
    rest = [i for i in range(space.dim) if i not in set(first)]
    return np.array(first + rest)


def embed_isometry(iso: np.ndarray, space: CompositeSpace, ancilla_dim: int | None = None) -> TargetUnitary:
    """Embed a 2D x D isometry (rows = (transmon j, cavity c), j slow) into a unitary.

    The returned unitary acts on a two-level-transmon copy of ``space``.
    """
    iso = np.asarray(iso, dtype=complex)
    D = iso.shape[1] if ancilla_dim is None else ancilla_dim
    if iso.shape != (2 * D, D):
        raise ValueError(f"isometry must have shape (2D, D) = {(2 * D, D)}, got {iso.shape}")
    n_c = space.factor_dim(CAVITY)
    if not D < n_c:
        raise ValueError(f"ancilla dimension {D} must be smaller than the cavity cutoff {n_c}")
    defect = isometry_defect(iso)
    if defect > ISOMETRY_TOL:
        raise ValueError(f"input is not an isometry (defect {defect:.2e})")
    qspace = source_space(n_c, 2)
    perm = subspace_permutation(qspace, D)
    n = qspace.dim
    tall = np.zeros((n, D), dtype=complex)
    tall[: 2 * D] = iso
    u_perm = complete_isometry(tall)
    # exact zero leak block by construction
    u_perm[2 * D:, :D] = 0.0
    u = np.zeros((n, n), dtype=complex)
    u[np.ix_(perm, perm)] = u_perm
    return TargetUnitary(u, iso, perm, qspace, D, u_perm)


def stack_isometry(v0: np.ndarray, v1: np.ndarray) -> np.ndarray:
    """Stack (V^0; V^1) into the 2D x D isometry acting from H_D."""
    return np.vstack([v0, v1]).astype(complex)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
