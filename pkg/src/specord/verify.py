"""Property verification harness.

Every named identity the library promises is packaged as a check that
measures residuals against explicit bounds and emits a machine-readable
`CheckReport`.  Checks never assert an identity outside its hypotheses:
runs whose preconditions fail are reported as skipped, not failed.

Tolerance policy: structural identities 1e-9 absolute on unit-normalized
data, determinant identities 1e-10 relative, growth and limit checks 0.05
to 0.1 additive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .brown import PointMeasure, empirical_brown, measure_distance, mixture, region_mass
from .core import (
    as_matrix,
    cluster_tolerance,
    fk_determinant,
    operator_norm,
)
from .curves import OrderingCurve, segment_region
from .projections import Projection, _range_basis, hyperinvariance_check
from .regions import (
    AmbiguousRegionError,
    CellUnion,
    EmptyRegion,
    FullPlane,
    Region,
    disk,
    halfplane,
)
from .spectral import SpectralTable, build_table, decompose

TOL_STRUCTURAL = 1e-9
TOL_DETERMINANT = 1e-10
TOL_GROWTH = 0.1

KNOWN_CHECKS = (
    "spectral-trace-law",
    "spectral-intersection-law",
    "spectral-additivity-law",
    "flag-spectral-agreement",
    "flag-trace-law",
    "flag-invariance",
    "flag-monotonicity",
    "flag-compression-inside",
    "flag-compression-outside",
    "flag-hyperinvariance",
    "commutant-compression-support",
    "blockdiag-determinant-agreement",
    "normal-part-normality",
    "normal-part-measure",
    "residual-quasinilpotence",
    "grid-expectation-rate",
    "grid-residual-radius",
    "grid-power-bound",
    "grid-residual-squared-radius",
    "corner-determinant-product",
    "corner-measure-split",
)


@dataclass(frozen=True)
class CheckValue:
    name: str
    measured: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


@dataclass(frozen=True)
class CheckReport:
    """One verified identity: measured residuals against stated bounds."""

    check_id: str
    claim: str
    inputs_digest: str
    seed: int
    tolerance: float
    values: tuple[CheckValue, ...]
    verdict: str  # "pass" | "fail" | "skip"
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "claim": self.claim,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "values": [
                {"name": v.name, "measured": v.measured, "bound": v.bound}
                for v in self.values
            ],
            "verdict": self.verdict,
            "note": self.note,
        }

    @staticmethod
    def from_dict(doc: dict) -> "CheckReport":
        return CheckReport(
            check_id=doc["check_id"],
            claim=doc["claim"],
            inputs_digest=doc["inputs_digest"],
            seed=int(doc["seed"]),
            tolerance=float(doc["tolerance"]),
            values=tuple(
                CheckValue(v["name"], float(v["measured"]), float(v["bound"]))
                for v in doc["values"]
            ),
            verdict=doc["verdict"],
            note=doc.get("note", ""),
        )


def make_report(
    check_id: str,
    claim: str,
    digest: str,
    values: list[CheckValue],
    tolerance: float,
    seed: int = 0,
    skip: str | None = None,
) -> CheckReport:
    if skip is not None:
        verdict = "skip"
    else:
        verdict = "pass" if all(v.ok for v in values) else "fail"
    return CheckReport(
        check_id=check_id,
        claim=claim,
        inputs_digest=digest,
        seed=seed,
        tolerance=tolerance,
        values=tuple(values),
        verdict=verdict,
        note=skip or "",
    )


def reports_to_json(reports: list[CheckReport]) -> str:
    docs = [r.to_dict() for r in sorted(reports, key=lambda r: r.check_id)]
    return json.dumps(docs, indent=1, sort_keys=True) + "\n"


def reports_from_json(text: str) -> list[CheckReport]:
    return [CheckReport.from_dict(d) for d in json.loads(text)]


def _fro(A: np.ndarray) -> float:
    return float(np.linalg.norm(A))


def _context_digest(T, curve: OrderingCurve | None = None, extra: str = "") -> str:
    from hashlib import sha256

    from .core import matrix_json_bytes

    h = sha256(matrix_json_bytes(T))
    if curve is not None:
        h.update(curve.spec_string().encode())
    h.update(extra.encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# random region machinery

def _random_region(rng: np.random.Generator, table: SpectralTable) -> Region:
    """A boundary-decidable random region for the table's spectrum."""
    square = table.curve.square
    for _ in range(60):
        B = _candidate_region(rng, square)
        try:
            table.member_clusters(B)
        except AmbiguousRegionError:
            continue
        return B
    return FullPlane()


def _candidate_region(rng: np.random.Generator, square) -> Region:
    kind = int(rng.integers(0, 5))
    if kind == 0:
        cx = rng.uniform(square.x0, square.x1)
        cy = rng.uniform(square.y0, square.y1)
        r = rng.uniform(0.05, 0.8) * square.side
        return disk(cx, cy, r)
    if kind == 1:
        a, b = rng.standard_normal(2)
        if a == 0.0 and b == 0.0:
            a = 1.0
        px = rng.uniform(square.x0, square.x1)
        py = rng.uniform(square.y0, square.y1)
        return halfplane(a, b, a * px + b * py)
    if kind == 2:
        level = int(rng.integers(1, 4))
        total = 1 << (2 * level)
        count = int(rng.integers(1, total + 1))
        ks = rng.choice(np.arange(1, total + 1), size=count, replace=False)
        return CellUnion(square, level, [int(k) for k in ks])
    if kind == 3:
        return _candidate_region(rng, square) & ~_candidate_region(rng, square)
    return _candidate_region(rng, square) | _candidate_region(rng, square)


def _exact_mass_count(table: SpectralTable, B: Region) -> int:
    return sum(table.clusters[i].multiplicity for i in table.member_clusters(B))


def _random_param(rng: np.random.Generator, bits: int):
    """Uniform dyadic parameter with the given number of fractional bits."""
    from fractions import Fraction

    num = 0
    remaining = bits
    while remaining > 0:
        take = min(remaining, 32)
        num = (num << take) | int(rng.integers(0, 1 << take))
        remaining -= take
    return Fraction(num, 1 << bits)


# ---------------------------------------------------------------------------
# measure laws

def verify_measure_laws(
    T, curve: OrderingCurve, trials: int = 100, seed: int = 0,
    structural_tol: float = TOL_STRUCTURAL,
) -> list[CheckReport]:
    """Trace, intersection, and additivity laws of the spectral measure E."""
    T = as_matrix(T)
    TOL = structural_tol
    table = build_table(T, curve)
    rng = np.random.default_rng(seed)
    digest = _context_digest(T, curve, f"measure-laws:{seed}:{trials}")

    nu = empirical_brown(T, tol=table.tol)
    trace_vals: list[CheckValue] = []
    inter_vals: list[CheckValue] = []
    add_vals: list[CheckValue] = []
    n = table.n
    eye = np.eye(n, dtype=np.complex128)

    for t in range(trials):
        B1 = _random_region(rng, table)
        B2 = _random_region(rng, table)
        E1 = table.spectral_projection(B1)
        E2 = table.spectral_projection(B2)
        # trace law, exact rank arithmetic against the counting measure
        for tag, B, E in (("a", B1, E1), ("b", B2, E2)):
            count = _exact_mass_count(table, B)
            mass = region_mass(nu, B)
            trace_vals.append(
                CheckValue(f"rank-vs-count[{t}{tag}]", float(abs(E.rank - count)), 0.0)
            )
            trace_vals.append(
                CheckValue(f"rank-vs-measure[{t}{tag}]", abs(E.rank - mass * n), 1e-6)
            )
        # intersection law
        try:
            both = table.spectral_projection(B1 & B2)
        except AmbiguousRegionError:
            continue
        inter_vals.append(
            CheckValue(
                f"product[{t}]",
                _fro(E1.matrix @ E2.matrix - both.matrix),
                TOL,
            )
        )
        # additivity across a disjoint split
        try:
            rest = table.spectral_projection(B2 & ~B1)
            union = table.spectral_projection(B1 | (B2 & ~B1))
        except AmbiguousRegionError:
            continue
        add_vals.append(
            CheckValue(
                f"disjoint-union[{t}]",
                _fro(E1.matrix + rest.matrix - union.matrix),
                TOL,
            )
        )

    # complements and a full cell partition
    add_vals.append(
        CheckValue(
            "complement",
            _fro(
                table.spectral_projection(FullPlane()).matrix
                - table.spectral_projection(EmptyRegion()).matrix
                - eye
            ),
            TOL,
        )
    )
    level = 2
    total = np.zeros((n, n), dtype=np.complex128)
    for k in range(1, (1 << (2 * level)) + 1):
        cell = CellUnion(table.curve.square, level, {k})
        total += table.spectral_projection(cell).matrix
    add_vals.append(
        CheckValue("cell-partition", _fro(total - eye), TOL)
    )

    return [
        make_report(
            "spectral-trace-law",
            "tau(E(B)) equals the eigenvalue counting mass of B, by rank arithmetic",
            digest,
            trace_vals,
            0.0,
            seed,
        ),
        make_report(
            "spectral-intersection-law",
            "E(B1) E(B2) = E(B1 intersect B2)",
            digest,
            inter_vals,
            TOL,
            seed,
        ),
        make_report(
            "spectral-additivity-law",
            "E is additive over disjoint regions and cell partitions",
            digest,
            add_vals,
            TOL,
            seed,
        ),
    ]


# ---------------------------------------------------------------------------
# grid convergence

def _commutes_with_cluster_projs(table: SpectralTable) -> bool:
    T = table.matrix
    bound = 1e-9 * max(1.0, operator_norm(T))
    for P in table.cluster_projs:
        if _fro(T @ P.matrix - P.matrix @ T) > bound:
            return False
    return True


def verify_convergence(T, curve: OrderingCurve, n_max: int = 8,
                       seed: int = 0) -> list[CheckReport]:
    """Grid expectation rate, residual support radii, and the power bound.

    The rate bound holds unconditionally.  The residual-radius and power
    bounds assume an input commuting with its cluster projections; a
    non-commuting T is preconditioned to its normal part (which commutes by
    construction) and the report notes the substitution.  The power bound
    additionally needs the input scaled to norm 1/2, so the zero matrix
    skips it.
    """
    T = as_matrix(T)
    table = build_table(T, curve)
    digest = _context_digest(T, curve, f"convergence:{n_max}:{seed}")
    norm = operator_norm(T)
    N = table.normal_part()

    rate_vals = []
    for lvl in range(1, n_max + 1):
        bound = 3.0 * math.sqrt(2.0) * norm / (1 << lvl)
        E_n = table.expectation(lvl)
        rate_vals.append(
            CheckValue(f"rate[n={lvl}]", float(np.linalg.norm(N - E_n, 2)), bound + 1e-12)
        )
    reports = [
        make_report(
            "grid-expectation-rate",
            "||N - E_{D_n}(T)|| <= 3 sqrt(2) ||T|| / 2^n",
            digest,
            rate_vals,
            0.0,
            seed,
        )
    ]

    if _commutes_with_cluster_projs(table):
        X, xtable = T, table
        precond = ""
    else:
        X = N
        xtable = build_table(X, curve)
        precond = " (preconditioned to the commuting normal part)"
    xnorm = operator_norm(X)

    radius_vals = []
    for lvl in range(1, n_max + 1):
        bound = 6.0 * math.sqrt(2.0) * xnorm / (1 << lvl)
        resid = X - xtable.expectation(lvl)
        radius_vals.append(
            CheckValue(
                f"radius[n={lvl}]",
                float(np.abs(np.linalg.eigvals(resid)).max()),
                bound + 1e-12,
            )
        )
    reports.append(
        make_report(
            "grid-residual-radius",
            "spectrum of T - E_{D_n}(T) lies within 6 sqrt(2) ||T|| / 2^n" + precond,
            digest,
            radius_vals,
            0.0,
            seed,
        )
    )

    if xnorm == 0.0:
        reports.append(
            make_report("grid-power-bound",
                        "binomial bound on ||(T - E_D(T))^{2m} eta||",
                        digest, [], TOL_GROWTH, seed, skip="zero matrix"))
        reports.append(
            make_report("grid-residual-squared-radius",
                        "spectrum of (T - E_D(T))^2 lies within 28 sqrt(2) ||T|| / 2^n",
                        digest, [], TOL_GROWTH, seed, skip="zero matrix"))
        return reports

    # scale to norm 1/2 and rebuild so the working square matches the scale
    S = X / (2.0 * xnorm)
    stable = build_table(S, type(curve)(square=_scaled_square(curve, 0.5 / xnorm),
                                        depth=curve.depth))
    Ns = stable.normal_part()
    Qs = S - Ns
    ns = 0.5
    rng = np.random.default_rng(seed)
    power_vals = []
    n_dim = S.shape[0]
    for lvl in range(1, min(n_max, 6) + 1):
        delta = 3.0 * math.sqrt(2.0) * ns / (1 << lvl)
        En = stable.expectation(lvl)
        Dn = S - En
        for trial in range(20):
            eta = rng.standard_normal(n_dim) + 1j * rng.standard_normal(n_dim)
            eta /= np.linalg.norm(eta)
            v = eta.copy()
            w = eta.copy()
            for m in range(1, 21):
                v = Qs @ (Qs @ v)     # (S - N)^{2m} eta
                w = Dn @ w            # (S - E_n)^m eta
                lhs = float(np.linalg.norm(v))
                rhs = (4.0**m) * max(delta**m, float(np.linalg.norm(w)))
                power_vals.append(
                    CheckValue(
                        f"power[n={lvl},trial={trial},m={m}]",
                        lhs,
                        rhs * (1.0 + 1e-9) + 1e-300,
                    )
                )
    reports.append(
        make_report(
            "grid-power-bound",
            "||(T - E_D(T))^{2m} eta|| <= 2^{2m} max((3 sqrt(2)||T||/2^n)^m,"
            " ||(T - E_{D_n}(T))^m eta||)" + precond,
            digest,
            power_vals,
            0.0,
            seed,
        )
    )

    sq_vals = []
    Q2 = Qs @ Qs
    sq_radius = float(np.abs(np.linalg.eigvals(Q2)).max())
    for lvl in range(1, n_max + 1):
        bound = 28.0 * math.sqrt(2.0) * ns / (1 << lvl)
        sq_vals.append(CheckValue(f"sq-radius[n={lvl}]", sq_radius, bound + 1e-12))
    reports.append(
        make_report(
            "grid-residual-squared-radius",
            "spectrum of (T - E_D(T))^2 lies within 28 sqrt(2) ||T|| / 2^n" + precond,
            digest,
            sq_vals,
            0.0,
            seed,
        )
    )
    return reports


def _scaled_square(curve: OrderingCurve, factor: float):
    from .regions import Square

    sq = curve.square
    return Square(sq.cx * factor, sq.cy * factor, sq.side * factor)


# ---------------------------------------------------------------------------
# corner splits

def _snap_atoms(values: list[complex], targets: list[complex]) -> list[complex] | None:
    """Snap computed eigenvalues onto reference atoms.

    Eigenvalues of a numerically materialized corner of a defective matrix
    can scatter around the true (multiple) eigenvalue; each computed value
    is assigned to the nearest reference atom, provided that assignment is
    unambiguous (closer than half the reference separation when there are
    several atoms).
    """
    if not targets:
        return None
    if len(targets) == 1:
        return [targets[0]] * len(values)
    sep = min(
        abs(a - b) for i, a in enumerate(targets) for b in targets[i + 1 :]
    )
    out = []
    for v in values:
        d, z = min(((abs(v - t), t) for t in targets), key=lambda p: p[0])
        if d > sep / 2:
            return None
        out.append(z)
    return out


def _corner_measure(T: np.ndarray, basis: np.ndarray,
                    reference: PointMeasure, tol: float) -> PointMeasure | None:
    vals = np.linalg.eigvals(basis.conj().T @ T @ basis).tolist()
    snapped = _snap_atoms(vals, list(reference.locations))
    if snapped is None:
        return None
    from .brown import _measure_from_values

    return _measure_from_values(snapped, tol)


def verify_block_split(T, p: Projection, seed: int = 0,
                       det_tol: float = TOL_DETERMINANT) -> list[CheckReport]:
    """Determinant and measure splitting across a T-invariant projection.

    With A and C the compressions of T to range(p) and its complement,
    Delta(T) = Delta(A)^{tau(p)} Delta(C)^{tau(1-p)} and the counting
    measure of T is the convex split tau(p) nu_A + tau(1-p) nu_C.
    """
    T = as_matrix(T)
    norm = operator_norm(T)
    digest = _context_digest(T, None, f"block-split:{p.rank}:{seed}")
    leak = _fro((np.eye(p.n) - p.matrix) @ T @ p.matrix)
    if leak > 1e-9 * max(1.0, norm):
        raise ValueError(
            f"projection is not T-invariant: ||(I-p) T p|| = {leak:.3e}"
        )
    n = T.shape[0]
    k = p.rank
    tol = cluster_tolerance(T)
    nu_T = empirical_brown(T, tol=tol)

    if k == 0 or k == n:
        det_vals = [CheckValue("degenerate", 0.0, det_tol)]
        meas_vals = [CheckValue("degenerate", 0.0, tol)]
        return [
            make_report("corner-determinant-product",
                        "Delta(T) = Delta(A)^{tau(p)} Delta(C)^{tau(1-p)}",
                        digest, det_vals, det_tol, seed),
            make_report("corner-measure-split",
                        "nu_T = tau(p) nu_A + tau(1-p) nu_C",
                        digest, meas_vals, tol, seed),
        ]

    B = _range_basis(p)
    Bc = p.complement_basis()
    A = B.conj().T @ T @ B
    C = Bc.conj().T @ T @ Bc

    dT = fk_determinant(T)
    dA = fk_determinant(A)
    dC = fk_determinant(C)
    split = (dA ** (k / n)) * (dC ** ((n - k) / n))
    scale = max(dT, split, 1e-300)
    det_vals = [CheckValue("relative-error", abs(dT - split) / scale, det_tol)]

    nu_A = _corner_measure(T, B, nu_T, tol)
    nu_C = _corner_measure(T, Bc, nu_T, tol)
    if nu_A is None or nu_C is None:
        meas_vals = [CheckValue("atom-snap", float("inf"), tol)]
    else:
        mix = mixture([(nu_A, k / n), (nu_C, (n - k) / n)], tol)
        meas_vals = [CheckValue("matching-distance",
                                measure_distance(mix, nu_T), max(tol, 1e-12))]
    return [
        make_report("corner-determinant-product",
                    "Delta(T) = Delta(A)^{tau(p)} Delta(C)^{tau(1-p)}",
                    digest, det_vals, det_tol, seed),
        make_report("corner-measure-split",
                    "nu_T = tau(p) nu_A + tau(1-p) nu_C",
                    digest, meas_vals, tol, seed),
    ]


# ---------------------------------------------------------------------------
# full decomposition verification

def verify_decomposition(T, curve: OrderingCurve, seed: int = 0,
                         random_t: int = 10,
                         structural_tol: float = TOL_STRUCTURAL) -> list[CheckReport]:
    """End-to-end checks of the decomposition pipeline for one input."""
    T = as_matrix(T)
    dec = decompose(T, curve)
    table = dec.table
    digest = _context_digest(T, curve, f"decomposition:{seed}")
    norm = operator_norm(T)
    tol = table.tol
    rng = np.random.default_rng(seed)
    reports = []

    # N is normal; counting measures agree; Q is quasinilpotent
    reports.append(
        make_report(
            "normal-part-normality",
            "N N* = N* N",
            digest,
            [CheckValue("defect", dec.report["normality_defect"],
                        structural_tol * max(dec.report["normal_fro_sq"], 1e-30))],
            structural_tol,
            seed,
        )
    )
    reports.append(
        make_report(
            "normal-part-measure",
            "the counting measures of N and T coincide",
            digest,
            [CheckValue("matching-distance", dec.report["measure_distance"], 1e-8)],
            1e-8,
            seed,
        )
    )
    qn_bound = 1e-8 * max(1.0, norm)
    reports.append(
        make_report(
            "residual-quasinilpotence",
            "in the ordered basis Q is strictly upper triangular with"
            " vanishing diagonal",
            digest,
            [
                CheckValue("diagonal", dec.report["quasinilpotent_diag"], qn_bound),
                CheckValue("lower-residual", dec.report["quasinilpotent_lower"],
                           structural_tol * max(1.0, norm)),
            ],
            qn_bound,
            seed,
        )
    )

    # flags against the cover-stabilized spectral projections
    agree_vals = []
    ts = list(table.params)
    bits = 2 * table.curve.depth
    for _ in range(random_t):
        ts.append(_random_param(rng, bits))
    for i, t in enumerate(ts):
        E = table.spectral_projection(segment_region(table.curve, t))
        P = table.flag_at(t)
        agree_vals.append(
            CheckValue(f"agreement[{i}]", _fro(E.matrix - P.matrix), structural_tol)
        )
    reports.append(
        make_report(
            "flag-spectral-agreement",
            "E of a curve segment equals the flag projection at its endpoint",
            digest,
            agree_vals,
            structural_tol,
            seed,
        )
    )

    # per-flag structural checks
    trace_vals, inv_vals, mono_vals = [], [], []
    inside_vals, outside_vals = [], []
    cum = 0
    for i, P in enumerate(table.flags):
        cum += table.clusters[i].multiplicity
        trace_vals.append(CheckValue(f"rank[{i}]", float(abs(P.rank - cum)), 0.0))
        inv_vals.append(
            CheckValue(
                f"invariance[{i}]",
                _fro((np.eye(table.n) - P.matrix) @ T @ P.matrix),
                structural_tol * max(1.0, norm),
            )
        )
        if i + 1 < len(table.flags):
            Pn = table.flags[i + 1]
            mono_vals.append(
                CheckValue(
                    f"monotone[{i}]",
                    _fro(P.matrix - P.matrix @ Pn.matrix),
                    structural_tol,
                )
            )
        inside_locs = [c.location for c in table.clusters[: i + 1]]
        outside_locs = [c.location for c in table.clusters[i + 1 :]]
        if P.rank > 0:
            vals = np.linalg.eigvals(
                table.unitary[:, : P.rank].conj().T @ T @ table.unitary[:, : P.rank]
            )
            snapped = _snap_atoms(vals.tolist(), inside_locs)
            inside_vals.append(
                CheckValue(
                    f"inside[{i}]",
                    0.0 if snapped is not None else float("inf"),
                    0.0,
                )
            )
        if P.rank < table.n:
            vals = np.linalg.eigvals(
                table.unitary[:, P.rank :].conj().T @ T @ table.unitary[:, P.rank :]
            )
            snapped = _snap_atoms(vals.tolist(), outside_locs)
            outside_vals.append(
                CheckValue(
                    f"outside[{i}]",
                    0.0 if snapped is not None else float("inf"),
                    0.0,
                )
            )
    reports.append(
        make_report("flag-trace-law",
                    "flag traces accumulate the cluster multiplicities",
                    digest, trace_vals, 0.0, seed))
    reports.append(
        make_report("flag-invariance", "T maps each flag range into itself",
                    digest, inv_vals, structural_tol, seed))
    reports.append(
        make_report("flag-monotonicity", "the flag chain is increasing",
                    digest, mono_vals, structural_tol, seed))
    reports.append(
        make_report("flag-compression-inside",
                    "the inside compression's spectrum lies on the ordered prefix",
                    digest, inside_vals, 0.0, seed))
    reports.append(
        make_report("flag-compression-outside",
                    "the outside compression's spectrum lies on the ordered suffix",
                    digest, outside_vals, 0.0, seed))

    # hyperinvariance of a sampled flag
    if table.flags:
        mid = table.flags[len(table.flags) // 2]
        hrep = hyperinvariance_check(T, mid, samples=12, seed=seed)
        reports.append(
            make_report(
                "flag-hyperinvariance",
                "sampled commutant elements leave the flag range invariant",
                digest,
                [CheckValue("max-leak", hrep.max_leak, 1e-8)],
                1e-8,
                seed,
                skip=None if hrep.samples > 0 else "no commutant samples accepted",
            )
        )

    # corner compressions of a commuting input concentrate where they should;
    # a non-commuting input is preconditioned to its normal part
    if _commutes_with_cluster_projs(table):
        X, xtable = T, table
        precond = ""
    else:
        X = dec.N
        xtable = build_table(X, curve)
        precond = " (preconditioned to the commuting normal part)"
    comm_vals = []
    for trial in range(5):
        B = _random_region(rng, xtable)
        members = xtable.member_clusters(B)
        if not members:
            continue
        basis = np.concatenate(
            [
                xtable.unitary[:, xtable.ranks[i] : xtable.ranks[i + 1]]
                for i in members
            ],
            axis=1,
        )
        vals = np.linalg.eigvals(basis.conj().T @ X @ basis)
        locs = [xtable.clusters[i].location for i in members]
        snapped = _snap_atoms(vals.tolist(), locs)
        ok = snapped is not None and all(B.contains(z) for z in set(snapped))
        comm_vals.append(
            CheckValue(f"support[{trial}]", 0.0 if ok else float("inf"), 0.0)
        )
    reports.append(
        make_report(
            "commutant-compression-support",
            "for commuting inputs the corner compression of E(B) T E(B)"
            " concentrates in B" + precond,
            digest, comm_vals, 0.0, seed,
            skip=None if comm_vals else "no region with spectral mass sampled",
        )
    )

    # block-diagonal expectation preserves shifted determinants
    D = table.block_diagonal_part()
    det_vals = []
    margin = 0.05 * max(1.0, norm)
    locs = [c.location for c in table.clusters]
    count = 0
    attempts = 0
    sq = table.curve.square
    while count < 20 and attempts < 400:
        attempts += 1
        lam = complex(rng.uniform(sq.x0, sq.x1), rng.uniform(sq.y0, sq.y1))
        if min(abs(lam - z) for z in locs) < margin:
            continue
        d1 = fk_determinant(T - lam * np.eye(table.n))
        d2 = fk_determinant(D - lam * np.eye(table.n))
        det_vals.append(
            CheckValue(
                f"shift[{count}]",
                abs(d1 - d2) / max(d1, d2, 1e-300),
                1e-8,
            )
        )
        count += 1
    reports.append(
        make_report(
            "blockdiag-determinant-agreement",
            "T and its block-diagonal expectation share all shifted determinants",
            digest,
            det_vals,
            1e-8,
            seed,
        )
    )
    return reports


# ---------------------------------------------------------------------------
# suite driver

def run_suite(
    matrices: list[tuple[str, np.ndarray]],
    curve_specs: tuple[str, ...] = ("hilbert:depth=32", "morton:depth=32", "lex"),
    seed: int = 0,
    checks: tuple[str, ...] | None = None,
    measure_trials: int = 20,
    n_max: int = 6,
    structural_tol: float = TOL_STRUCTURAL,
    det_tol: float = TOL_DETERMINANT,
) -> list[CheckReport]:
    """Run every requested check over labeled matrices and curves."""
    from .curves import curve_for_matrix

    if checks is not None:
        unknown = set(checks) - set(KNOWN_CHECKS)
        if unknown:
            raise ValueError(f"unknown check ids: {sorted(unknown)}")
    out: list[CheckReport] = []
    for label, T in matrices:
        for cspec in curve_specs:
            curve = curve_for_matrix(cspec, T)
            batch: list[CheckReport] = []
            batch += verify_decomposition(T, curve, seed=seed,
                                          structural_tol=structural_tol)
            batch += verify_measure_laws(T, curve, trials=measure_trials,
                                         seed=seed, structural_tol=structural_tol)
            batch += verify_convergence(T, curve, n_max=n_max, seed=seed)
            table = build_table(T, curve)
            if table.flags:
                mid = table.flags[len(table.flags) // 2]
                batch += verify_block_split(T, mid, seed=seed, det_tol=det_tol)
            for rep in batch:
                tagged = CheckReport(
                    check_id=f"{rep.check_id}@{label}@{cspec}",
                    claim=rep.claim,
                    inputs_digest=rep.inputs_digest,
                    seed=rep.seed,
                    tolerance=rep.tolerance,
                    values=rep.values,
                    verdict=rep.verdict,
                    note=rep.note,
                )
                if checks is None or rep.check_id in checks:
                    out.append(tagged)
    return sorted(out, key=lambda r: r.check_id)


def suite_summary(reports: list[CheckReport]) -> dict:
    return {
        "total": len(reports),
        "passed": sum(1 for r in reports if r.verdict == "pass"),
        "failed": sum(1 for r in reports if r.verdict == "fail"),
        "skipped": sum(1 for r in reports if r.verdict == "skip"),
    }
