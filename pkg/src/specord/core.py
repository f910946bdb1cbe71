"""Dense complex matrix primitives.

Schur triangularization with a prescribed eigenvalue order, the normalized
trace, the Fuglede-Kadison determinant |det T|^(1/n), and operator-norm
power-growth sequences.  All functions are pure; returned arrays are freshly
allocated and inputs are never mutated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cmp_to_key
from hashlib import sha256
from typing import Callable, Sequence

import numpy as np
import scipy.linalg


class SchurConvergenceError(RuntimeError):
    """The QR iteration exhausted its sweep budget without triangularizing."""


def as_matrix(obj) -> np.ndarray:
    """Validate `obj` as a square matrix and return a complex128 copy."""
    A = np.array(obj, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("matrix entries must be finite")
    return A


def operator_norm(A) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(A), 2))


def normalized_trace(A) -> complex:
    """tr(A)/n, the tracial state at matrix scale."""
    A = as_matrix(A)
    return complex(np.trace(A)) / A.shape[0]


def fk_determinant(T) -> float:
    """Fuglede-Kadison determinant |det T|^(1/n); 0 for singular T."""
    T = as_matrix(T)
    sign, logdet = np.linalg.slogdet(T)
    if sign == 0 or np.isneginf(logdet):
        return 0.0
    return float(np.exp(logdet / T.shape[0]))


def power_growth(T, m_max: int) -> list[float]:
    """Operator-norm growth sequence ||T^m||^(1/m) for m = 1..m_max.

    Powers are taken on T/||T|| and rescaled, so no intermediate can
    overflow.  Entry m equals the norm of ((T*)^m T^m)^(1/2m).
    """
    T = as_matrix(T)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    s = operator_norm(T)
    if s == 0.0:
        return [0.0] * m_max
    M = T / s
    P = np.eye(T.shape[0], dtype=np.complex128)
    out = []
    for m in range(1, m_max + 1):
        P = P @ M
        nm = float(np.linalg.norm(P, 2))
        out.append(s * nm ** (1.0 / m) if nm > 0.0 else 0.0)
    return out


# ---------------------------------------------------------------------------
# eigenvalue clustering

def cluster_tolerance(T) -> float:
    """Distance below which two computed eigenvalues count as one point."""
    return 1e-8 * max(1.0, operator_norm(T))


@dataclass(frozen=True)
class Cluster:
    """A group of numerically coincident eigenvalues."""

    location: complex
    members: tuple[complex, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)


def cluster_points(values: Sequence[complex], tol: float) -> list[Cluster]:
    """Partition `values` into connected components of the <=tol proximity graph.

    Components are located at the arithmetic mean of their members and
    returned sorted by (real, imag) of the location.
    """
    vals = [complex(v) for v in values]
    k = len(vals)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if abs(vals[i] - vals[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[complex]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(vals[i])
    clusters = [
        Cluster(location=sum(g) / len(g), members=tuple(g)) for g in groups.values()
    ]
    clusters.sort(key=lambda c: (c.location.real, c.location.imag))
    return clusters


def nearest_cluster(clusters: Sequence[Cluster], z: complex) -> int:
    """Index of the cluster whose location is closest to z."""
    return min(range(len(clusters)), key=lambda i: abs(clusters[i].location - z))


def eigenvalue_matching_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Bottleneck matching distance between two eigenvalue multisets.

    The minimum over bijections of the largest matched |a_i - b_j|;
    infinity when the multisets have different sizes.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if len(a) != len(b):
        return float("inf")
    if not a:
        return 0.0
    dist = np.abs(np.subtract.outer(np.array(a), np.array(b)))
    return _bottleneck(dist)


def _bottleneck(dist: np.ndarray) -> float:
    """Smallest d such that the bipartite graph {dist <= d} has a perfect matching."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_bipartite_matching

    k = dist.shape[0]
    levels = np.unique(dist)
    lo, hi = 0, len(levels) - 1
    # quick exit: greedy diagonal of the sorted rows often already perfect
    while lo < hi:
        mid = (lo + hi) // 2
        adj = csr_matrix(dist <= levels[mid])
        match = maximum_bipartite_matching(adj, perm_type="column")
        if np.all(match >= 0):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


# ---------------------------------------------------------------------------
# Schur forms

@dataclass(frozen=True, eq=False)
class SchurForm:
    """Unitary U and upper triangular R with U R U* equal to the input.

    `diag_order` records the diagonal of R, i.e. the eigenvalues in the
    order the form realizes.
    """

    unitary: np.ndarray
    triangular: np.ndarray
    diag_order: tuple[complex, ...]

    @property
    def n(self) -> int:
        return self.triangular.shape[0]

    def reconstruct(self) -> np.ndarray:
        U, R = self.unitary, self.triangular
        return U @ R @ U.conj().T


def schur_form(T) -> SchurForm:
    """Complex Schur triangularization T = U R U*.

    Uses the LAPACK QR iteration (deterministic shift strategy, internal
    sweep cap); a non-converged iteration raises SchurConvergenceError
    rather than returning a partial factorization.
    """
    T = as_matrix(T)
    try:
        R, U = scipy.linalg.schur(T, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise SchurConvergenceError(f"QR iteration did not converge: {exc}") from exc
    R = np.triu(R)  # discard strictly-lower roundoff noise
    return SchurForm(unitary=U, triangular=R, diag_order=tuple(np.diag(R)))


def _swap_adjacent(U: np.ndarray, R: np.ndarray, j: int) -> None:
    """Exchange diagonal positions j, j+1 of a triangular R by a unitary rotation.

    The rotation sends the eigenvector of the trailing eigenvalue of the
    2x2 block to the leading position; the swapped diagonal entries are
    written back exactly so the diagonal multiset never drifts.
    """
    a = R[j, j]
    b = R[j, j + 1]
    c = R[j + 1, j + 1]
    v = np.array([b, c - a], dtype=np.complex128)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return  # identical block with zero coupling: swap is a no-op
    G = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]]) / nv
    R[j : j + 2, :] = G.conj().T @ R[j : j + 2, :]
    R[:, j : j + 2] = R[:, j : j + 2] @ G
    U[:, j : j + 2] = U[:, j : j + 2] @ G
    R[j + 1, j] = 0.0
    R[j, j] = c
    R[j + 1, j + 1] = a


def _reorder_by_keys(
    form: SchurForm, keys: Sequence[int], skip_tol: float = 0.0
) -> tuple[SchurForm, list[dict]]:
    """Bubble the diagonal into nondecreasing key order via adjacent swaps.

    An adjacent inversion whose diagonal entries are within `skip_tol`
    of each other is never rotated (the swap would be ill conditioned);
    such pairs are reported instead of silently reordered.
    """
    U = form.unitary.copy()
    R = form.triangular.copy()
    keys = list(keys)
    n = len(keys)
    moved = True
    while moved:
        moved = False
        for j in range(n - 1):
            if keys[j] <= keys[j + 1]:
                continue
            if abs(R[j, j] - R[j + 1, j + 1]) <= skip_tol:
                continue
            _swap_adjacent(U, R, j)
            keys[j], keys[j + 1] = keys[j + 1], keys[j]
            moved = True
    skipped = [
        {
            "position": j,
            "left": complex(R[j, j]),
            "right": complex(R[j + 1, j + 1]),
        }
        for j in range(n - 1)
        if keys[j] > keys[j + 1]
    ]
    return SchurForm(unitary=U, triangular=R, diag_order=tuple(np.diag(R))), skipped


def reorder_schur(
    form: SchurForm,
    cmp: Callable[[complex, complex], int],
    skip_tol: float = 0.0,
) -> tuple[SchurForm, list[dict]]:
    """Sort the Schur diagonal nondecreasingly under a total order on C.

    `cmp(z1, z2)` returns a negative, zero, or positive integer.  Entries
    comparing equal form one class and their relative order is preserved
    (the sort is stable).  Returns the reordered form and the list of
    inversions that were skipped because the entries were within
    `skip_tol` (see `_reorder_by_keys`).
    """
    d = list(form.diag_order)
    order = sorted(range(len(d)), key=cmp_to_key(lambda i, j: cmp(d[i], d[j])))
    keys = [0] * len(d)
    cls = 0
    for pos, idx in enumerate(order):
        if pos > 0 and cmp(d[order[pos - 1]], d[idx]) != 0:
            cls += 1
        keys[idx] = cls
    return _reorder_by_keys(form, keys, skip_tol=skip_tol)


# ---------------------------------------------------------------------------
# matrix file format

def matrix_json_bytes(T) -> bytes:
    """Serialize to the repo-wide JSON format with 17 significant digits."""
    T = as_matrix(T)
    n = T.shape[0]
    cells = ",".join(f"[{z.real:.17g},{z.imag:.17g}]" for z in T.ravel())
    return f'{{"n":{n},"entries":[{cells}]}}'.encode("ascii")


def save_matrix(T, path) -> None:
    with open(path, "wb") as fh:
        fh.write(matrix_json_bytes(T))
        fh.write(b"\n")


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        doc = json.load(fh)
    return matrix_from_dict(doc)


def matrix_from_dict(doc: dict) -> np.ndarray:
    if not isinstance(doc, dict) or "n" not in doc or "entries" not in doc:
        raise ValueError("matrix document must carry 'n' and 'entries'")
    n = int(doc["n"])
    entries = doc["entries"]
    if n < 1 or len(entries) != n * n:
        raise ValueError(f"expected {n * n} entries for n={n}, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return as_matrix(flat.reshape(n, n))


def matrix_digest(T) -> str:
    """sha256 hex digest of the canonical serialization."""
    return sha256(matrix_json_bytes(T)).hexdigest()
