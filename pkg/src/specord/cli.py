"""Command-line surface.

Commands
--------
decompose   split a matrix into N + Q along a curve and write the bundle
brown       write the counting measure and log-potential density of a matrix
project     write the invariant-subspace projection selected by a region
verify      run the check suite over the corpus or a single input
curve       tabulate a curve, order a spectrum, or compare two curves
replay      re-run a recorded config.json and reproduce its outputs

Exit codes: 0 success, 1 at least one check failed, 2 invalid input or
usage.  Every run writes a config.json into its output directory; `replay`
reproduces the run (byte-identical report.json) from that file alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import ensembles
from .brown import (
    brown_density_grid,
    empirical_brown,
    write_atoms_csv,
    write_density_csv,
    write_density_pgm,
)
from .core import (
    load_matrix,
    matrix_digest,
    matrix_from_dict,
    matrix_json_bytes,
    operator_norm,
)
from .curves import curve_for_matrix, parse_curve
from .projections import hs_projection
from .regions import parse_region
from .spectral import decompose, write_bundle
from .verify import (
    KNOWN_CHECKS,
    reports_to_json,
    run_suite,
    suite_summary,
    verify_decomposition,
)


@dataclass
class RunConfig:
    """Complete, replayable description of one CLI run."""

    command: str
    matrix_path: str | None = None
    matrix_data: dict | None = None
    ensemble: str | None = None
    curve: str = "hilbert:depth=32"
    curve2: str | None = None
    regions: list[str] = field(default_factory=list)
    level: int = 3
    grid: int = 256
    seed: int = 0
    checks: list[str] = field(default_factory=list)
    count: int = 16
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "RunConfig":
        doc = json.loads(text)
        return RunConfig(**doc)


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _resolve_matrix(cfg: RunConfig) -> np.ndarray:
    if cfg.matrix_data is not None:
        return matrix_from_dict(cfg.matrix_data)
    if cfg.matrix_path is not None:
        T = load_matrix(cfg.matrix_path)
        cfg.matrix_data = json.loads(matrix_json_bytes(T))
        return T
    if cfg.ensemble is not None:
        spec = ensembles.parse_ensemble(cfg.ensemble)
        return ensembles.sample(spec)
    raise ValueError("no input: pass --matrix or --ensemble")


def _write_config(cfg: RunConfig, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(cfg.to_json(), encoding="ascii")


def _run_decompose(cfg: RunConfig, outdir: Path) -> int:
    from .verify import TOL_STRUCTURAL

    T = _resolve_matrix(cfg)
    curve = curve_for_matrix(cfg.curve, T)
    _write_config(cfg, outdir)
    dec = decompose(T, curve, grid_level=cfg.level)
    write_bundle(dec, outdir)
    reports = verify_decomposition(
        T, curve, seed=cfg.seed,
        structural_tol=float(cfg.tolerances.get("structural", TOL_STRUCTURAL)),
    )
    (outdir / "report.json").write_text(reports_to_json(reports), encoding="ascii")
    summary = suite_summary(reports)
    print(f"decompose: {summary['passed']} passed, {summary['failed']} failed, "
          f"{summary['skipped']} skipped -> {outdir}")
    return 0 if summary["failed"] == 0 else 1


def _run_brown(cfg: RunConfig, outdir: Path) -> int:
    T = _resolve_matrix(cfg)
    _write_config(cfg, outdir)
    measure = empirical_brown(T)
    write_atoms_csv(measure, outdir / "atoms.csv")
    grid = brown_density_grid(T, g=cfg.grid)
    write_density_csv(grid, outdir / "density.csv")
    write_density_pgm(grid, outdir / "density.pgm")
    info = {
        "input_digest": matrix_digest(T),
        "atoms": len(measure.atoms),
        "grid": cfg.grid,
        "eps": grid.eps,
        "total_mass": grid.total_mass(),
        "min_mass": grid.min_mass,
        "negative_mass": grid.negative_mass,
    }
    (outdir / "report.json").write_text(
        json.dumps(info, indent=1, sort_keys=True) + "\n", encoding="ascii"
    )
    print(f"brown: {len(measure.atoms)} atoms, grid mass "
          f"{grid.total_mass():.6f} -> {outdir}")
    return 0


def _run_project(cfg: RunConfig, outdir: Path) -> int:
    T = _resolve_matrix(cfg)
    if not cfg.regions:
        raise ValueError("project needs at least one --region")
    from .regions import ambient_square

    square = ambient_square(operator_norm(T))
    _write_config(cfg, outdir)
    results = []
    for i, spec in enumerate(cfg.regions):
        B = parse_region(spec, square)
        P = hs_projection(T, B)
        from .core import save_matrix

        save_matrix(P.matrix, outdir / f"P{i}.json")
        leak = float(np.linalg.norm((np.eye(P.n) - P.matrix) @ T @ P.matrix))
        results.append({
            "region": spec,
            "rank": P.rank,
            "trace": P.rank / P.n,
            "invariance_leak": leak,
            "file": f"P{i}.json",
        })
    (outdir / "report.json").write_text(
        json.dumps(results, indent=1, sort_keys=True) + "\n", encoding="ascii"
    )
    print(f"project: {len(results)} projection(s) -> {outdir}")
    return 0


def _run_verify(cfg: RunConfig, outdir: Path) -> int:
    if cfg.checks:
        unknown = set(cfg.checks) - set(KNOWN_CHECKS)
        if unknown:
            raise ValueError(f"unknown check ids: {sorted(unknown)}")
    if cfg.matrix_data is not None or cfg.matrix_path is not None or cfg.ensemble:
        T = _resolve_matrix(cfg)
        matrices = [("input", T)]
    else:
        matrices = ensembles.corpus_matrices()
    _write_config(cfg, outdir)
    from .verify import TOL_DETERMINANT, TOL_STRUCTURAL

    reports = run_suite(
        matrices,
        curve_specs=(cfg.curve,) if cfg.curve2 is None else (cfg.curve, cfg.curve2),
        seed=cfg.seed,
        checks=tuple(cfg.checks) or None,
        n_max=cfg.level if cfg.level > 0 else 6,
        structural_tol=float(cfg.tolerances.get("structural", TOL_STRUCTURAL)),
        det_tol=float(cfg.tolerances.get("determinant", TOL_DETERMINANT)),
    )
    (outdir / "report.json").write_text(reports_to_json(reports), encoding="ascii")
    summary = suite_summary(reports)
    print(f"verify: {summary['passed']} passed, {summary['failed']} failed, "
          f"{summary['skipped']} skipped -> {outdir}")
    return 0 if summary["failed"] == 0 else 1


def _run_curve(cfg: RunConfig, outdir: Path, mode: str) -> int:
    from fractions import Fraction

    if mode == "tabulate":
        curve = parse_curve(cfg.curve, radius=1.0)
        _write_config(cfg, outdir)
        lines = ["t,re,im"]
        count = max(2, cfg.count)
        for i in range(count + 1):
            t = Fraction(i, count)
            z = curve.eval(t)
            lines.append(f"{float(t):.17g},{z.real:.17g},{z.imag:.17g}")
        (outdir / "curve.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
        print(f"curve tabulate: {count + 1} samples -> {outdir}")
        return 0
    T = _resolve_matrix(cfg)
    curve = curve_for_matrix(cfg.curve, T)
    _write_config(cfg, outdir)
    if mode == "order":
        from .spectral import build_table

        table = build_table(T, curve)
        doc = table.to_json_dict()
        (outdir / "order.json").write_text(
            json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="ascii"
        )
        locs = ", ".join(f"{c.location:.4g}" for c in table.clusters)
        print(f"curve order ({cfg.curve}): {locs}")
        return 0
    if mode == "compare":
        if cfg.curve2 is None:
            raise ValueError("curve compare needs --curve2")
        from .brown import measure_distance
        from .spectral import decompose as _dec

        curve_b = curve_for_matrix(cfg.curve2, T)
        da = _dec(T, curve)
        db = _dec(T, curve_b)
        dist = measure_distance(
            empirical_brown(da.N, tol=da.table.tol),
            empirical_brown(db.N, tol=db.table.tol),
        )
        doc = {
            "curve_a": cfg.curve,
            "curve_b": cfg.curve2,
            "normal_parts_equal_measure": dist,
            "normal_part_difference": float(np.linalg.norm(da.N - db.N)),
            "order_a": [f"{c.location.real:.17g}{c.location.imag:+.17g}j"
                        for c in da.table.clusters],
            "order_b": [f"{c.location.real:.17g}{c.location.imag:+.17g}j"
                        for c in db.table.clusters],
        }
        (outdir / "compare.json").write_text(
            json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="ascii"
        )
        print(f"curve compare: measure distance {dist:.3e}, operator "
              f"difference {doc['normal_part_difference']:.3e} -> {outdir}")
        return 0
    raise ValueError(f"unknown curve mode {mode!r}")


def _run_replay(config_path: str, outdir: Path) -> int:
    cfg = RunConfig.from_json(Path(config_path).read_text(encoding="ascii"))
    command = cfg.command
    if command == "decompose":
        return _run_decompose(cfg, outdir)
    if command == "brown":
        return _run_brown(cfg, outdir)
    if command == "project":
        return _run_project(cfg, outdir)
    if command == "verify":
        return _run_verify(cfg, outdir)
    if command.startswith("curve:"):
        return _run_curve(cfg, outdir, command.split(":", 1)[1])
    raise ValueError(f"config carries unknown command {command!r}")


def _add_common(p: argparse.ArgumentParser, need_out: bool = True) -> None:
    p.add_argument("--matrix", help="path to a matrix JSON file")
    p.add_argument("--ensemble", help="ensemble spec, e.g. ginibre:n=32,seed=7")
    p.add_argument("--curve", default="hilbert:depth=32",
                   help="curve spec: hilbert:depth=32, morton:depth=32, lex, radial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=int, default=3,
                   help="dyadic grid level (verify: deepest level checked)")
    p.add_argument("--tol-structural", type=float, default=None,
                   help="override the structural identity tolerance (default 1e-9)")
    p.add_argument("--tol-determinant", type=float, default=None,
                   help="override the determinant identity tolerance (default 1e-10)")
    if need_out:
        p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specord",
                                 description="spectral orderings and decompositions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="split T into N + Q along a curve")
    _add_common(p)

    p = sub.add_parser("brown", help="counting measure and density heatmap")
    _add_common(p)
    p.add_argument("--grid", type=int, default=256)

    p = sub.add_parser("project", help="invariant projection for region(s)")
    _add_common(p)
    p.add_argument("--region", action="append", default=[],
                   help="region spec, repeatable: disk:cx,cy,r | halfplane:a,b,c"
                        " | cells:n=3,k=1,5,9 with & | ! combinators")

    p = sub.add_parser("verify", help="run the check suite")
    _add_common(p)
    p.add_argument("--curve2", help="second curve spec for the suite")
    p.add_argument("--check", action="append", default=[],
                   help=f"restrict to check ids; known: {', '.join(KNOWN_CHECKS)}")
    p.add_argument("--list-corpus", action="store_true",
                   help="print the corpus manifest and exit")

    p = sub.add_parser("curve", help="tabulate/order/compare curves")
    p.add_argument("mode", choices=["tabulate", "order", "compare"])
    _add_common(p)
    p.add_argument("--curve2", help="second curve for compare")
    p.add_argument("--count", type=int, default=16,
                   help="samples for tabulate")

    p = sub.add_parser("replay", help="re-run a recorded config.json")
    p.add_argument("config", help="path to config.json")
    p.add_argument("--out", required=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "verify" and args.list_corpus:
            print(ensembles.corpus_manifest_json(), end="")
            return 0
        outdir = Path(args.out)
        if args.command == "replay":
            return _run_replay(args.config, outdir)
        tolerances = {}
        if getattr(args, "tol_structural", None) is not None:
            tolerances["structural"] = args.tol_structural
        if getattr(args, "tol_determinant", None) is not None:
            tolerances["determinant"] = args.tol_determinant
        cfg = RunConfig(
            command=args.command,
            matrix_path=getattr(args, "matrix", None),
            ensemble=getattr(args, "ensemble", None),
            curve=getattr(args, "curve", "hilbert:depth=32"),
            curve2=getattr(args, "curve2", None),
            regions=list(getattr(args, "region", []) or []),
            seed=getattr(args, "seed", 0),
            checks=list(getattr(args, "check", []) or []),
            grid=getattr(args, "grid", 256),
            count=getattr(args, "count", 16),
            level=getattr(args, "level", 3),
            tolerances=tolerances,
        )
        if args.command == "decompose":
            return _run_decompose(cfg, outdir)
        if args.command == "brown":
            return _run_brown(cfg, outdir)
        if args.command == "project":
            return _run_project(cfg, outdir)
        if args.command == "verify":
            return _run_verify(cfg, outdir)
        if args.command == "curve":
            cfg.command = f"curve:{args.mode}"
            return _run_curve(cfg, outdir, args.mode)
        return _fail(f"unknown command {args.command!r}")
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
