"""Command line entry point: ``netident {check,simulate,witness,export-dot} SPEC``.

Exit status: 0 on success, 2 on parse or validation failure, 3 when
``check --strict`` finds the model set not identifiable, 1 when a witness
check does not reproduce the same outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .identifiability import Verdict, analyze
from .model import AssignmentError, StructureError, ValidationError, instantiate
from .rational import DEFAULT_TRIALS, RANK_TOL
from .simulator import SimulationDivergedError, null_witness_family, simulate
from .specfile import SpecDocument, SpecError, parse_spec

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NOT_IDENTIFIABLE = 0, 1, 2, 3


class InputError(Exception):
    pass


def bundled_examples() -> list[str]:
    return sorted(p.name for p in resources.files("netident").joinpath("data").iterdir() if p.name.endswith(".json"))


def read_spec_text(path: str) -> str:
    """Read a spec from disk, falling back to the bundled examples by file name."""
    p = Path(path)
    if p.is_file():
        return p.read_text()
    name = p.name if p.name.endswith(".json") else p.name + ".json"
    res = resources.files("netident").joinpath("data", name)
    if res.is_file():
        return res.read_text()
    raise InputError(f"{path}: no such file (bundled examples: {', '.join(bundled_examples())})")


def load(path: str) -> SpecDocument:
    try:
        return parse_spec(read_spec_text(path))
    except SpecError as exc:
        raise InputError(f"{path}: {exc}") from None


def model_of(doc: SpecDocument, path: str):
    if doc.theta is None:
        raise InputError(f"{path}: no 'theta' block, a concrete model is needed")
    try:
        return instantiate(doc.structure, doc.theta)
    except ValidationError as exc:
        raise InputError(f"{path}: invalid model:\n  " + "\n  ".join(str(v) for v in exc.violations)) from None
    except AssignmentError as exc:
        raise InputError(f"{path}: {exc}") from None


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --- subcommands ----------------------------------------------------------------

def cmd_check(args) -> int:
    doc = load(args.spec)
    m = model_of(doc, args.spec) if args.at_model else None
    report = analyze(doc.structure, m, "at_model" if args.at_model else "generic",
                     trials=args.trials, seed=args.seed, rank_tol=args.rank_tol)
    print(report.render_text())
    if args.json:
        _write(args.json, json.dumps(report.to_dict(), indent=2) + "\n")
    if args.strict and report.overall is Verdict.NOT_IDENTIFIABLE:
        return EXIT_NOT_IDENTIFIABLE
    return EXIT_OK


def _excitation(kind: str, K: int, N: int, rng: np.random.Generator) -> np.ndarray:
    r = np.zeros((K, N))
    if kind == "impulse":
        r[:, 0] = 1.0
    elif kind == "step":
        r[:, :] = 1.0
    elif kind == "white":
        r = rng.standard_normal((K, N))
    return r


def cmd_simulate(args) -> int:
    doc = load(args.spec)
    m = model_of(doc, args.spec)
    rng = np.random.default_rng(args.seed)
    r = _excitation(args.excitation, m.K, args.N, rng)
    e_seed = None if args.no_noise else int(rng.integers(2**63))
    rec = simulate(m, r, N=args.N, seed=e_seed, burn_in=args.burn_in)
    _write(args.out, rec.to_csv())
    return EXIT_OK


def cmd_witness(args) -> int:
    doc = load(args.spec)
    s = doc.structure
    m = model_of(doc, args.spec)
    report = analyze(s, m, "at_model", trials=args.trials, seed=args.seed, rank_tol=args.rank_tol)
    rank_rows = [w.row for w in report.witnesses if w.kind == "rank"]
    if args.row is not None:
        row = args.row - 1
        if not 0 <= row < s.L:
            raise InputError(f"--row must lie in 1..{s.L}")
    elif rank_rows:
        row = rank_rows[0]
    else:
        print(f"no rank-deficient row at this model (overall {report.overall.value}); nothing to witness")
        return EXIT_OK
    try:
        family = null_witness_family(s, m, row)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rng = np.random.default_rng(args.seed)
    r = rng.standard_normal((m.K, args.N))
    e = rng.standard_normal((m.p, args.N)) if m.p else None
    if m.p:
        e = np.real(np.linalg.cholesky(m.Lambda)) @ e
    base = simulate(m, r, e, N=args.N)
    print(f"witness family for row {s.name(row)} ({len(family)} members, N={args.N})")
    worst = 0.0
    for mb in family:
        g_row = ", ".join(f"G{row + 1}{j + 1}={mb.model.G[row, j]}" for j in range(s.L) if s.G[row][j].is_param)
        status = "valid" if mb.valid else "invalid: " + "; ".join(v.code for v in mb.violations)
        try:
            dev = float(np.abs(simulate(mb.model, r, e, N=args.N).w - base.w).max())
        except SimulationDivergedError:
            dev = float("inf")
        if mb.valid:
            worst = max(worst, dev)
        print(f"  t={mb.scale:+g}: {g_row}  [{status}]  max|w - w0| = {dev:.3g}")
    ok = worst <= args.tol
    print(f"outputs {'agree' if ok else 'differ'} within {args.tol:g}")
    return EXIT_OK if ok else EXIT_MISMATCH


def to_dot(doc: SpecDocument, show_zero: bool = False) -> str:
    s = doc.structure
    q = lambda x: '"' + x.replace('"', r'\"') + '"'
    lines = ["digraph network {", "  rankdir=LR;"]
    for j in range(s.L):
        lines.append(f"  {q(s.name(j))} [shape=circle];")
    for k in range(s.K):
        lines.append(f"  {q(f'r{k + 1}')} [shape=box];")
    for k in range(s.p):
        lines.append(f"  {q(f'e{k + 1}')} [shape=diamond];")

    def edge(src, dst, e, label):
        if e.is_zero:
            if show_zero:
                lines.append(f"  {q(src)} -> {q(dst)} [style=dotted, color=gray, label={q(label + '=0')}];")
            return
        if e.is_param:
            style = "dashed"
            text = f"{label} ({'strict' if e.properness.value == 'strict' else 'proper'})"
        else:
            style = "solid"
            text = f"{label}={e.value}"
        lines.append(f"  {q(src)} -> {q(dst)} [style={style}, label={q(text)}];")

    for j in range(s.L):
        for l in range(s.L):
            if j != l:
                edge(s.name(l), s.name(j), s.G[j][l], f"G{j + 1}{l + 1}")
    for j in range(s.L):
        for k in range(s.K):
            edge(f"r{k + 1}", s.name(j), s.R[j][k], f"R{j + 1}{k + 1}")
        for k in range(s.p):
            edge(f"e{k + 1}", s.name(j), s.H[j][k], f"H{j + 1}{k + 1}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    _write(args.out, to_dot(load(args.spec), args.show_zero))
    return EXIT_OK


def cmd_examples(args) -> int:
    for name in bundled_examples():
        print(name)
    return EXIT_OK


# --- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netident", description="Identifiability analysis for dynamic network model sets.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def numeric(p):
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="random evaluation points / parameter draws")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--rank-tol", type=float, default=RANK_TOL, help="relative singular value threshold")

    p = sub.add_parser("check", help="analyze a model set (generic) or a concrete model (--at-model)")
    p.add_argument("spec")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--at-model", action="store_true", help="decide identifiability at the theta block")
    mode.add_argument("--generic", action="store_true", help="sample the model set (default)")
    numeric(p)
    p.add_argument("--json", metavar="PATH", help="also write the machine-readable report ('-' for stdout)")
    p.add_argument("--strict", action="store_true", help="exit 3 when the verdict is NOT_IDENTIFIABLE")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="simulate the theta model and write a CSV record")
    p.add_argument("spec")
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--excitation", choices=["zero", "impulse", "step", "white"], default="white")
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("witness", help="build models with the same transfer and compare simulations")
    p.add_argument("spec")
    p.add_argument("--row", type=int, help="1-based row (default: first rank-deficient row)")
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-9)
    numeric(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("export-dot", help="write the module graph in Graphviz DOT")
    p.add_argument("spec")
    p.add_argument("--show-zero", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("examples", help="list bundled example specs")
    p.set_defaults(func=cmd_examples)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
