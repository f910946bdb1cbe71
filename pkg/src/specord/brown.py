"""Eigenvalue counting measures and log-potential density surrogates.

At matrix scale the Brown measure of T is the normalized eigenvalue counting
measure: atoms at the eigenvalue clusters with weight multiplicity/n.  The
log-potential  (1/2) tau log((T-l)*(T-l) + eps^2)  recovers it as a density
through the distributional Laplacian; `brown_density_grid` discretizes that
identity with a 5-point stencil over the working square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, cluster_points, cluster_tolerance, operator_norm
from .regions import Region, Square, ambient_square


@dataclass(frozen=True)
class PointMeasure:
    """Finite atomic probability measure on C.

    `atoms` holds (location, weight) pairs with positive weights summing to
    one; `counts` optionally records the integer multiplicities behind the
    weights for exact rank arithmetic.
    """

    atoms: tuple[tuple[complex, float], ...]
    counts: tuple[int, ...] | None = None

    def __post_init__(self):
        total = sum(w for _, w in self.atoms)
        if self.atoms and abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("weights must be positive")
        if self.counts is not None and len(self.counts) != len(self.atoms):
            raise ValueError("counts must parallel atoms")

    @property
    def locations(self) -> tuple[complex, ...]:
        return tuple(z for z, _ in self.atoms)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.atoms)

    def support_radius(self) -> float:
        return max((abs(z) for z, _ in self.atoms), default=0.0)


def delta(location: complex = 0.0) -> PointMeasure:
    return PointMeasure(atoms=((complex(location), 1.0),), counts=(1,))


def _measure_from_values(values, tol: float) -> PointMeasure:
    n = len(values)
    clusters = cluster_points(values, tol)
    atoms = tuple((c.location, c.multiplicity / n) for c in clusters)
    counts = tuple(c.multiplicity for c in clusters)
    return PointMeasure(atoms=atoms, counts=counts)


def empirical_brown(T, tol: float | None = None) -> PointMeasure:
    """Normalized eigenvalue counting measure, clustered at `tol`."""
    T = as_matrix(T)
    if tol is None:
        tol = cluster_tolerance(T)
    return _measure_from_values(np.linalg.eigvals(T).tolist(), tol)


def mixture(parts: list[tuple[PointMeasure, float]], tol: float) -> PointMeasure:
    """Convex combination of measures, re-clustering coincident atoms."""
    locs: list[complex] = []
    weights: list[float] = []
    for m, coeff in parts:
        if coeff < 0:
            raise ValueError("mixture coefficients must be nonnegative")
        for z, w in m.atoms:
            locs.append(z)
            weights.append(coeff * w)
    total = sum(weights)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture coefficients must sum to 1, got {total}")
    clusters = cluster_points(locs, tol)
    # accumulate weights per cluster by nearest-center assignment
    centers = [c.location for c in clusters]
    sums = [0.0] * len(centers)
    for z, w in zip(locs, weights):
        i = min(range(len(centers)), key=lambda i: abs(centers[i] - z))
        sums[i] += w
    out = tuple((centers[i], sums[i] / total) for i in range(len(centers)) if sums[i] > 0)
    return PointMeasure(atoms=out)


def region_mass(m: PointMeasure, B: Region) -> float:
    """Total weight of the atoms lying in B."""
    return float(sum(w for z, w in m.atoms if B.contains(z)))


def _bottleneck_locations(a: list[complex], b: list[complex]) -> float:
    from .core import eigenvalue_matching_distance

    return eigenvalue_matching_distance(a, b)


def measure_distance(m1: PointMeasure, m2: PointMeasure, weight_tol: float = 1e-9) -> float:
    """Optimal-matching distance between two atomic measures.

    Atoms are grouped into equal-weight classes (weights compared within
    `weight_tol`); within each class the bottleneck matching distance of the
    locations is taken, and the maximum over classes is returned.  If the
    weight profiles disagree the measures are incomparable and the result
    is infinity.
    """
    w1 = sorted(m1.weights)
    w2 = sorted(m2.weights)
    if len(w1) != len(w2):
        return float("inf")
    if any(abs(x - y) > weight_tol for x, y in zip(w1, w2)):
        return float("inf")
    # group both atom lists by weight class
    all_weights = sorted(set(w1) | set(w2))
    classes: list[float] = []
    for w in all_weights:
        if not classes or w - classes[-1] > weight_tol:
            classes.append(w)

    def klass(w: float) -> int:
        return min(range(len(classes)), key=lambda i: abs(classes[i] - w))

    out = 0.0
    for ci in range(len(classes)):
        a = [z for z, w in m1.atoms if klass(w) == ci]
        b = [z for z, w in m2.atoms if klass(w) == ci]
        if len(a) != len(b):
            return float("inf")
        if a:
            out = max(out, _bottleneck_locations(a, b))
    return out


# ---------------------------------------------------------------------------
# log potential and density grids

def log_potential(T, lam: complex, eps: float) -> float:
    """(1/2) tau log((T-lam)*(T-lam) + eps^2 I).

    With eps = 0 this is log of the Fuglede-Kadison determinant of T-lam;
    a singular shift then yields -inf.
    """
    T = as_matrix(T)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    n = T.shape[0]
    sv = np.linalg.svd(T - complex(lam) * np.eye(n), compute_uv=False)
    if eps == 0.0:
        if np.any(sv == 0.0):
            return float("-inf")
        return float(np.log(sv).mean())
    return float(0.5 * np.log(sv**2 + eps * eps).mean())


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Cell masses of the discrete Laplacian of the log potential.

    `masses` holds the raw stencil output: each entry is the mass the
    5-point Laplacian assigns to one grid cell, and the full array sums to
    the measure captured by the square (about 1, up to boundary leakage).
    The stencil produces genuine negative lobes next to atoms when the
    regularization is smaller than the cell size; `clamped()` zeroes them
    for display, and `negative_mass`/`min_mass` report what was clipped.
    Row 0 is the top row of the square.
    """

    square: Square
    resolution: int
    eps: float
    masses: np.ndarray

    @property
    def min_mass(self) -> float:
        return float(self.masses.min())

    @property
    def negative_mass(self) -> float:
        return float(self.masses[self.masses < 0].sum())

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def clamped(self) -> np.ndarray:
        return np.clip(self.masses, 0.0, None)


def default_epsilon(T) -> float:
    return 1e-3 * max(1.0, operator_norm(T))


def brown_density_grid(
    T,
    g: int = 256,
    eps: float | None = None,
    square: Square | None = None,
) -> DensityGrid:
    """Discrete-Laplacian density of the regularized log potential.

    Evaluates the potential at the centers of a (g+2)^2 grid covering the
    working square plus one guard ring, then applies the 5-point stencil.
    Evaluation order is fixed, so the result is reproducible bit for bit.
    """
    T = as_matrix(T)
    if g < 16:
        raise ValueError("grid resolution must be >= 16")
    if eps is None:
        eps = default_epsilon(T)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if square is None:
        square = ambient_square(operator_norm(T))
    n = T.shape[0]
    h = square.side / g
    xs = square.x0 + (np.arange(-1, g + 1) + 0.5) * h
    ys = square.y1 - (np.arange(-1, g + 1) + 0.5) * h  # row 0 on top
    lam = (xs[None, :] + 1j * ys[:, None]).ravel()

    I = np.eye(n, dtype=np.complex128)
    Th = T.conj().T
    ThT = Th @ T
    phi = np.empty(lam.size, dtype=np.float64)
    chunk = max(1, min(512, lam.size))
    M = np.empty((chunk, n, n), dtype=np.complex128)
    tmp = np.empty((chunk, n, n), dtype=np.complex128)
    for s in range(0, lam.size, chunk):
        ls = lam[s : s + chunk]
        b = ls.size
        Mb, tb = M[:b], tmp[:b]
        Mb[:] = ThT
        np.multiply(np.conj(ls)[:, None, None], T[None, :, :], out=tb)
        Mb -= tb
        np.multiply(ls[:, None, None], Th[None, :, :], out=tb)
        Mb -= tb
        diag = np.einsum("bii->bi", Mb)
        diag += (np.abs(ls) ** 2 + eps * eps)[:, None]
        L = np.linalg.cholesky(Mb)
        d = np.einsum("bii->bi", L).real
        phi[s : s + b] = np.log(d).mean(axis=1)
    phi = phi.reshape(g + 2, g + 2)
    masses = (
        phi[:-2, 1:-1] + phi[2:, 1:-1] + phi[1:-1, :-2] + phi[1:-1, 2:]
        - 4.0 * phi[1:-1, 1:-1]
    ) / (2.0 * math.pi)
    return DensityGrid(square=square, resolution=g, eps=float(eps), masses=masses)


# ---------------------------------------------------------------------------
# file output

def write_atoms_csv(m: PointMeasure, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("re,im,weight\n")
        for z, w in m.atoms:
            fh.write(f"{z.real:.17g},{z.imag:.17g},{w:.17g}\n")


def read_atoms_csv(path) -> PointMeasure:
    atoms = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if header.strip() != "re,im,weight":
            raise ValueError("unexpected atoms CSV header")
        for line in fh:
            re_, im_, w = (float(v) for v in line.strip().split(","))
            atoms.append((complex(re_, im_), w))
    return PointMeasure(atoms=tuple(atoms))


def write_density_csv(grid: DensityGrid, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for row in grid.masses:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def write_density_pgm(grid: DensityGrid, path) -> None:
    """8-bit binary PGM of the clamped, max-normalized masses."""
    img = grid.clamped()
    peak = img.max()
    if peak > 0:
        img = img / peak
    pix = np.round(255.0 * img).astype(np.uint8)
    g = grid.resolution
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g} {g}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())
