"""Command-line front end: every experiment as a reproducible command.

Each command reads an optional key=value config file (flags override it),
writes CSV or JSON output plus a JSON metadata sidecar, and uses fixed exit
codes: 0 success, 2 validation failure, 3 infeasible (enumeration budget or
bond ambiguity), 4 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from cslab.exact import (
    DEFAULT_BUDGET,
    EnumerationBudgetError,
    build_state,
    enumeration_dim,
    overlap,
    singlet_defect,
    total_spin,
    translation_overlap,
)
from cslab.lattice import AmbiguousDisplacementError, B_SPACING, LatticeError, build_lattice
from cslab.qec import build_code, kl_check, pattern_map, singlet_reduction_check
from cslab.valence_bond import (
    DEFAULT_MAX_DX,
    DEFAULT_MAX_DY,
    enumerate_coverings,
    gap_parity_string,
    parity_class_census,
    seam_count,
    seam_parity,
    ulsm_vb_expectation,
)
from cslab.vmc import (
    PAPER_TABLE1,
    VmcSchedule,
    table1_report,
    ulsm_limit,
    ulsm_scan,
)
from cslab.wavefunction import boundary_residuals, make_wavefunction

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_USAGE = 4

_VERIFY_TOL = 1e-8

# Lattices small enough for the exact engine under the default budget.
ENUMERABLE_LATTICES = [
    (4, 2), (6, 2), (4, 3), (4, 4), (6, 3), (4, 5), (8, 3), (6, 4), (4, 6),
]


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("cslab")
    except Exception:
        return "unknown"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_lattice(text: str) -> tuple[int, int]:
    try:
        n1, n2 = text.lower().split("x")
        return int(n1), int(n2)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"lattice must look like 6x4, got {text!r}") from exc


def _parse_length(text: str) -> float:
    """Length flag value: either a raw float or a multiple of b like '2b'."""
    text = text.strip()
    if text.endswith("b"):
        return float(text[:-1] or 1.0) * B_SPACING
    return float(text)


def _load_config(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_CONFIG_PARSERS = {
    "lattice": _parse_lattice,
    "sector": str,
    "seed": int,
    "chains": int,
    "sweeps": int,
    "warmup": int,
    "block": int,
    "budget": int,
    "max_dx": _parse_length,
    "max_dy": _parse_length,
    "out": str,
    "format": str,
    "n2": int,
    "n1_list": lambda s: [int(x) for x in s.split(",")],
    "limit": int,
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill in None-valued options from the config file, if any."""
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        for key, raw in cfg.items():
            key = key.replace("-", "_")
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            if getattr(args, key, None) is None:
                setattr(args, key, _CONFIG_PARSERS[key](raw))
    return args


def _default(args, key, value):
    if getattr(args, key, None) is None:
        setattr(args, key, value)


def _schedule(args) -> VmcSchedule:
    base = VmcSchedule()
    return VmcSchedule(
        n_chains=args.chains if args.chains is not None else base.n_chains,
        sweeps_warmup=args.warmup if args.warmup is not None else base.sweeps_warmup,
        sweeps_measure=args.sweeps if args.sweeps is not None else base.sweeps_measure,
        block_size=args.block if args.block is not None else base.block_size,
        seed=args.seed if args.seed is not None else base.seed,
    )


def _sectors(args) -> list[int]:
    sector = getattr(args, "sector", None) or "both"
    if sector == "both":
        return [0, 1]
    if sector in ("0", "1"):
        return [int(sector)]
    raise ValueError(f"sector must be 0, 1 or both, got {sector!r}")


def _write_rows(rows: list[dict], out: str | None, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, default=str) + "\n"
    else:
        if rows:
            fields = list(rows[0])
            for row in rows[1:]:
                for key in row:
                    if key not in fields:
                        fields.append(key)
            import io

            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
            text = buf.getvalue()
        else:
            text = ""
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_sidecar(out: str | None, command: str, config: dict) -> None:
    if not out:
        return
    meta = {
        "command": command,
        "config": config,
        "version": _package_version(),
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, default=str) + "\n")


def _public_config(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def cmd_verify(args) -> int:
    N1, N2 = args.lattice
    _default(args, "budget", DEFAULT_BUDGET)
    lattice = build_lattice(N1, N2)
    dim = enumeration_dim(lattice)
    if dim > args.budget:
        print(
            f"{N1}x{N2} has {dim} configurations, above the budget {args.budget}; "
            "use the VMC engine (table1/fig1 commands) for this lattice",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE

    rows = []
    failed = False

    def check(name, value, tol=_VERIFY_TOL):
        nonlocal failed
        ok = value <= tol
        failed = failed or not ok
        rows.append({"check": name, "value": value, "tol": tol, "pass": ok})
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} (tol {tol:g})")

    states = {n: build_state(make_wavefunction(N1, N2, n), args.budget) for n in (0, 1)}
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    for n in _sectors(args):
        sv = states[n]
        check(f"singlet_defect[{n}]", singlet_defect(sv))
        check(f"total_spin[{n}]", total_spin(sv))
        check(f"ty_overlap[{n}]", abs(abs(translation_overlap(sv, sv, "y")) - 1.0))
        partner = states[1 - n] if N2 % 2 else sv
        check(f"tx_overlap[{n}]", abs(abs(translation_overlap(partner, sv, "x")) - 1.0))
        zs = rng.uniform(0, lattice.L1, lattice.n_bosons) + 1j * rng.uniform(
            0, lattice.L2, lattice.n_bosons
        )
        res_x, res_y = boundary_residuals(make_wavefunction(N1, N2, n), list(zs))
        check(f"boundary_x[{n}]", res_x)
        check(f"boundary_y[{n}]", res_y)

    _write_rows(rows, args.out, args.format or "csv")
    _write_sidecar(args.out, "verify", _public_config(args))
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_table1(args) -> int:
    schedule = _schedule(args)
    lattices = [args.lattice] if args.lattice else None
    rows = table1_report(schedule, lattices)
    _write_rows(rows, args.out, args.format or "csv")
    _write_sidecar(args.out, "table1", _public_config(args))
    worst = max((row.get("pull", 0.0) for row in rows), default=0.0)
    print(f"worst pull: {worst:.2f}", file=sys.stderr)
    return EXIT_VALIDATION if worst > 4.0 else EXIT_OK


def cmd_fig1(args) -> int:
    _default(args, "n2", 3)
    _default(args, "n1_list", [4, 8, 12, 16])
    if any(n1 % 2 for n1 in args.n1_list):
        print("all N1 values must be even", file=sys.stderr)
        return EXIT_USAGE
    schedule = _schedule(args)
    rows = []
    trend_broken = False
    for sector in _sectors(args):
        limit = ulsm_limit(args.n2, sector)
        scan = ulsm_scan(args.n2, args.n1_list, sector, schedule)
        gaps = [abs(row["re"] - limit) for row in scan]
        moved_away = any(b > a + 3.0 * scan[i + 1]["stderr"] for i, (a, b) in enumerate(zip(gaps, gaps[1:])))
        trend_broken = trend_broken or moved_away
        for row in scan:
            row["limit"] = limit
            row["trend_ok"] = not moved_away
            rows.append(row)
    _write_rows(rows, args.out, args.format or "csv")
    _write_sidecar(args.out, "fig1", _public_config(args))
    return EXIT_VALIDATION if trend_broken else EXIT_OK


def cmd_vb(args) -> int:
    N1, N2 = args.lattice
    _default(args, "max_dx", DEFAULT_MAX_DX)
    _default(args, "max_dy", DEFAULT_MAX_DY)
    _default(args, "limit", 100_000)
    lattice = build_lattice(N1, N2)
    try:
        rows = []
        stream = enumerate_coverings(lattice, args.max_dx, args.max_dy)
        for idx, cov in enumerate(itertools.islice(stream, args.limit)):
            rows.append(
                {
                    "id": idx,
                    "gamma": seam_count(lattice, cov),
                    "seam_parity": seam_parity(lattice, cov),
                    "gap_parities": gap_parity_string(lattice, cov),
                    "ulsm": ulsm_vb_expectation(lattice, cov),
                }
            )
        census = parity_class_census(lattice, args.max_dx, args.max_dy)
    except AmbiguousDisplacementError as exc:
        print(f"bond rule is ambiguous: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write_rows(rows, args.out, args.format or "csv")
    _write_sidecar(args.out, "vb", _public_config(args))
    print("gap-parity census (all coverings):", file=sys.stderr)
    for pattern, count in sorted(census.items()):
        print(f"  {pattern}: {count}", file=sys.stderr)
    return EXIT_OK


def cmd_qec(args) -> int:
    N1, N2 = args.lattice
    _default(args, "budget", DEFAULT_BUDGET)
    lattice = build_lattice(N1, N2)
    dim = enumeration_dim(lattice)
    if dim > args.budget:
        print(
            f"{N1}x{N2} has {dim} configurations, above the budget {args.budget}",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    spec0 = make_wavefunction(N1, N2, 0)
    spec1 = make_wavefunction(N1, N2, 1)
    code = build_code(spec0, spec1, args.budget)
    report = kl_check(code)
    discrepancy = singlet_reduction_check(code) if dim <= 20000 else None
    map0 = pattern_map(build_state(spec0, args.budget))
    map1 = pattern_map(build_state(spec1, args.budget))
    bond_rows = [
        {"site_i": i, "site_j": j, "value_phi0": map0[(i, j)], "value_phi1": map1[(i, j)]}
        for (i, j) in map0
    ]
    payload = {
        "lattice": f"{N1}x{N2}",
        "origin_convention": "r0 = (n1=0, n2=1)",
        "raw_overlap": [code.raw_overlap.real, code.raw_overlap.imag],
        "max_diag_mismatch": report.max_diag_mismatch,
        "diag_argmax": report.diag_argmax,
        "max_offdiag": report.max_offdiag,
        "offdiag_argmax": report.offdiag_argmax,
        "single_pauli_max": report.single_pauli_max,
        "zz_distance_mismatch": {str(k): v for k, v in sorted(report.zz_distance_mismatch.items())},
        "singlet_reduction_discrepancy": discrepancy,
        "pattern_map": bond_rows,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, default=str) + "\n")
    else:
        json.dump(payload, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    _write_sidecar(args.out, "qec", _public_config(args))
    return EXIT_OK


def cmd_reproduce_paper(args) -> int:
    outdir = Path(args.out or "paper-outputs")
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK

    def run(name, func, ns):
        nonlocal worst
        print(f"== {name} ==", file=sys.stderr)
        code = func(ns)
        worst = max(worst, code)

    base = dict(vars(args))
    base.pop("func", None)

    def ns(**overrides):
        d = dict(base)
        d.update(overrides)
        return argparse.Namespace(**d)

    for N1, N2 in ENUMERABLE_LATTICES:
        run(
            f"verify {N1}x{N2}",
            cmd_verify,
            ns(lattice=(N1, N2), out=str(outdir / f"verify_{N1}x{N2}.csv")),
        )
    run("table1", cmd_table1, ns(lattice=None, out=str(outdir / "table1.csv")))
    for n2 in (3, 4):
        run(
            f"fig1 N2={n2}",
            cmd_fig1,
            ns(n2=n2, n1_list=None, out=str(outdir / f"fig1_n2{n2}.csv")),
        )
    for N1, N2 in ((6, 3), (6, 4)):
        run(
            f"vb {N1}x{N2}",
            cmd_vb,
            ns(lattice=(N1, N2), limit=1000, out=str(outdir / f"vb_{N1}x{N2}.csv")),
        )
    for N1, N2 in ((4, 2), (4, 3), (4, 4), (6, 3), (6, 4)):
        run(
            f"qec {N1}x{N2}",
            cmd_qec,
            ns(lattice=(N1, N2), out=str(outdir / f"qec_{N1}x{N2}.json")),
        )
    return worst


def make_parser() -> _Parser:
    parser = _Parser(prog="cslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_lattice=False):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("lattice", nargs="?", type=_parse_lattice, default=None) if not needs_lattice else p.add_argument("lattice", type=_parse_lattice)
        p.add_argument("--config")
        p.add_argument("--sector", choices=("0", "1", "both"))
        p.add_argument("--seed", type=int)
        p.add_argument("--chains", type=int)
        p.add_argument("--sweeps", type=int)
        p.add_argument("--warmup", type=int)
        p.add_argument("--block", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--max-dx", dest="max_dx", type=_parse_length)
        p.add_argument("--max-dy", dest="max_dy", type=_parse_length)
        p.add_argument("--limit", type=int)
        p.add_argument("--n2", type=int)
        p.add_argument("--n1-list", dest="n1_list", type=lambda s: [int(x) for x in s.split(",")])
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        return p

    add("verify", cmd_verify, needs_lattice=True)
    add("table1", cmd_table1)
    add("fig1", cmd_fig1)
    add("vb", cmd_vb, needs_lattice=True)
    add("qec", cmd_qec, needs_lattice=True)
    add("reproduce-paper", cmd_reproduce_paper)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return args.func(args)
    except EnumerationBudgetError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AmbiguousDisplacementError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (LatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
