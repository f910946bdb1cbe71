"""Deterministic test-matrix ensembles.

All randomness flows through one documented pipeline so samples are
reproducible from the spec string alone:

* uniforms: the PCG64 bit generator seeded with the spec's seed, read
  through `Generator.random` (53-bit mantissa draws),
* normals: Box-Muller on consecutive uniform pairs,
  z = sqrt(-2 ln u1) * exp(2 pi i u2)  yields two independent N(0,1)
  values (real and imaginary part),
* complex standard normals: (x + iy)/sqrt(2) with x, y independent N(0,1),
* unit-disk points: r = sqrt(u1), angle = 2 pi u2,
* unitaries: QR of a complex Gaussian matrix with the R diagonal phases
  normalized to 1.

Supported kinds: ginibre, elliptic(rho), jordan(lambda), strict_upper,
normal_plus_nilpotent(scale), diag_perturb(eps).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import as_matrix, matrix_digest


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    seed: int = 0
    params: tuple[tuple[str, float], ...] = ()

    def param(self, name: str, default: float) -> float:
        for key, val in self.params:
            if key == name:
                return val
        return default

    def spec_string(self) -> str:
        parts = [f"n={self.n}"]
        parts += [f"{k}={v:.17g}" for k, v in self.params]
        parts.append(f"seed={self.seed}")
        return f"{self.kind}:" + ",".join(parts)


def parse_ensemble(spec: str) -> EnsembleSpec:
    """Parse a spec string like 'ginibre:n=32,seed=7' or 'jordan:n=4,lam=2'."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    n = None
    seed = 0
    params = []
    if rest:
        for fieldspec in rest.split(","):
            key, _, val = fieldspec.partition("=")
            if key == "n":
                n = int(val)
            elif key == "seed":
                seed = int(val)
            else:
                params.append((key, float(val)))
    if n is None:
        raise ValueError(f"ensemble spec needs n=<dim>: {spec!r}")
    return EnsembleSpec(kind=kind, n=n, seed=seed, params=tuple(params))


class _Rand:
    """Documented deterministic stream: PCG64 uniforms -> Box-Muller normals."""

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniforms(self, count: int) -> np.ndarray:
        return self._gen.random(count)

    def normals(self, count: int) -> np.ndarray:
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1-u avoids log(0)
        ang = 2.0 * np.pi * u[:, 1]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(ang)
        out[1::2] = r * np.sin(ang)
        return out[:count]

    def complex_normals(self, count: int) -> np.ndarray:
        xy = self.normals(2 * count)
        return (xy[0::2] + 1j * xy[1::2]) / np.sqrt(2.0)

    def disk_points(self, count: int) -> np.ndarray:
        u = self.uniforms(2 * count).reshape(count, 2)
        r = np.sqrt(u[:, 0])
        ang = 2.0 * np.pi * u[:, 1]
        return r * np.exp(1j * ang)

    def unitary(self, n: int) -> np.ndarray:
        G = self.complex_normals(n * n).reshape(n, n)
        Q, R = np.linalg.qr(G)
        d = np.diag(R)
        ph = d / np.abs(d)
        return Q * ph[None, :]


def _ginibre(rand: _Rand, n: int) -> np.ndarray:
    return rand.complex_normals(n * n).reshape(n, n) / np.sqrt(n)


def sample(spec: EnsembleSpec) -> np.ndarray:
    """Materialize the matrix described by `spec`."""
    if spec.n < 1:
        raise ValueError("n must be >= 1")
    rand = _Rand(spec.seed)
    n = spec.n
    kind = spec.kind
    if kind == "ginibre":
        return as_matrix(_ginibre(rand, n))
    if kind == "elliptic":
        rho = spec.param("rho", 0.5)
        if abs(rho) > 1.0:
            raise ValueError("elliptic correlation must satisfy |rho| <= 1")
        G1 = rand.complex_normals(n * n).reshape(n, n)
        G2 = rand.complex_normals(n * n).reshape(n, n)
        H1 = (G1 + G1.conj().T) / np.sqrt(2.0)
        H2 = (G2 + G2.conj().T) / np.sqrt(2.0)
        A = (np.sqrt(1.0 + rho) * H1 + 1j * np.sqrt(1.0 - rho) * H2) / np.sqrt(2.0)
        return as_matrix(A / np.sqrt(n))
    if kind == "jordan":
        lam = complex(spec.param("lam", 0.0), spec.param("lam_im", 0.0))
        J = np.diag(np.full(n, lam, dtype=np.complex128))
        J += np.diag(np.ones(n - 1), 1) if n > 1 else 0.0
        return as_matrix(J)
    if kind == "strict_upper":
        A = np.zeros((n, n), dtype=np.complex128)
        count = n * (n - 1) // 2
        if count:
            vals = rand.complex_normals(count) / np.sqrt(n)
            A[np.triu_indices(n, 1)] = vals
        return as_matrix(A)
    if kind == "normal_plus_nilpotent":
        scale = spec.param("scale", 0.5)
        if scale < 0:
            raise ValueError("scale must be >= 0")
        d = rand.disk_points(n)
        A = np.diag(d)
        count = n * (n - 1) // 2
        if count:
            A[np.triu_indices(n, 1)] = scale * rand.complex_normals(count) / np.sqrt(n)
        U = rand.unitary(n)
        return as_matrix(U @ A @ U.conj().T)
    if kind == "diag_perturb":
        eps = spec.param("eps", 1e-6)
        if eps < 0:
            raise ValueError("eps must be >= 0")
        d = rand.disk_points(n)
        G = rand.complex_normals(n * n).reshape(n, n) / np.sqrt(n)
        return as_matrix(np.diag(d) + eps * G)
    raise ValueError(f"unknown ensemble kind {kind!r}")


_KINDS = (
    "ginibre",
    "elliptic",
    "jordan",
    "strict_upper",
    "normal_plus_nilpotent",
    "diag_perturb",
)


def _edge_diag(n: int, values) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.complex128)
    np.fill_diagonal(A, np.array(values, dtype=np.complex128))
    return A


def curve_stress_matrices() -> list[tuple[str, np.ndarray]]:
    """Normal matrices whose eigenvalues sit exactly on dyadic cell edges.

    With norm 1 the working square has side 3, so the level-1 grid lines
    pass through 0 and the level-2 lines through multiples of 0.75; the
    eigenvalues below land exactly on those edges and corners, exercising
    the half-open assignment rules.
    """
    m1 = _edge_diag(5, [1.0, -1.0, 0.5j, -0.5j, 0.0])
    m2 = _edge_diag(4, [1.0, 0.75, -0.75, 0.75j])
    return [("edge_axis", m1), ("edge_quarters", m2)]


def corpus() -> list[EnsembleSpec]:
    """The fixed corpus used by the acceptance suite: sizes 2..64, all kinds."""
    specs: list[EnsembleSpec] = []

    def add(kind, n, seed=0, **params):
        specs.append(EnsembleSpec(kind=kind, n=n, seed=seed,
                                  params=tuple(sorted(params.items()))))

    for n, seed in [(2, 1), (3, 2), (4, 3), (6, 7), (8, 4), (12, 5), (16, 6),
                    (24, 8), (32, 7), (48, 9), (64, 7)]:
        add("ginibre", n, seed)
    for n, seed, rho in [(8, 11, 0.5), (16, 12, -0.5), (32, 13, 0.9), (24, 14, 0.0)]:
        add("elliptic", n, seed, rho=rho)
    for n, lam, lam_im in [(2, 0.0, 0.0), (4, 2.0, 0.0), (8, 1.0, 1.0), (3, -1.5, 0.0)]:
        add("jordan", n, 0, lam=lam, lam_im=lam_im)
    for n, seed in [(4, 21), (16, 22), (32, 23), (64, 24)]:
        add("strict_upper", n, seed)
    for n, seed, scale in [(6, 31, 0.5), (12, 32, 1.0), (24, 33, 0.25),
                           (48, 34, 0.5), (64, 35, 0.75)]:
        add("normal_plus_nilpotent", n, seed, scale=scale)
    for n, seed, eps in [(8, 41, 0.0), (16, 42, 1e-6), (32, 43, 1e-2),
                         (64, 44, 1e-4)]:
        add("diag_perturb", n, seed, eps=eps)
    # small dimensions for every kind
    add("ginibre", 2, 51)
    add("elliptic", 2, 52, rho=0.5)
    add("strict_upper", 1, 53)
    add("normal_plus_nilpotent", 2, 54, scale=0.5)
    add("diag_perturb", 3, 55, eps=1e-3)
    add("jordan", 6, 0, lam=0.5, lam_im=-0.5)
    # moderate extremes
    add("ginibre", 40, 61)
    add("elliptic", 48, 62, rho=-0.9)
    add("normal_plus_nilpotent", 32, 63, scale=2.0)
    add("strict_upper", 8, 64)
    add("diag_perturb", 12, 65, eps=1e-1)
    add("ginibre", 20, 66)
    return specs


def corpus_matrices() -> list[tuple[str, np.ndarray]]:
    """Corpus samples plus the curve-stress constructions, with their names."""
    out = [(s.spec_string(), sample(s)) for s in corpus()]
    out += [(f"stress:{name}", M) for name, M in curve_stress_matrices()]
    return out


def corpus_manifest() -> list[dict]:
    """Spec strings and digests for every corpus entry (stress cases included)."""
    return [
        {"spec": name, "n": int(M.shape[0]), "digest": matrix_digest(M)}
        for name, M in corpus_matrices()
    ]


def corpus_manifest_json() -> str:
    return json.dumps(corpus_manifest(), indent=1) + "\n"
