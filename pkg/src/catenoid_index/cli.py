"""Command-line front end.

JSON output is canonical: keys sorted, no whitespace, every float written as
``%.12e``. Non-finite floats become the strings ``"nan"``, ``"inf"``,
``"-inf"``. Parsing a document and re-encoding it reproduces it byte for byte.

Exit status: 0 success, 1 verification failure, 2 usage error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CatenoidError, NotSolvableError
from .geometry import Chart, Grid1D, critical_params
from .index_engine import (
    morse_index,
    read_boundary_csv,
    robin_eigenvalues,
    solve_dirichlet,
    steklov_spectrum_J,
)
from .sturm_liouville import BoundaryCondition
from .verification import VerifyConfig, run_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3
COMMANDS = ("constants", "spectrum", "index", "dirichlet", "verify", "report")


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid_n: int = 1024
    modes: int = 10
    tol: float = 1e-4
    format: str = "json"
    seed: int = 0
    chart: str = "s"
    data: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.grid_n < 64:
            raise ValueError("--grid-n must be at least 64")
        if self.modes < 2:
            raise ValueError("--modes must be at least 2")
        if not (0.0 < self.tol <= 0.1):
            raise ValueError("--tol must lie in (0, 0.1]")


# --- serialization ----------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return '"nan"'
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        return "%.12e" % obj
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, list):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(k) + ":" + _encode(obj[k]) for k in sorted(obj)) + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj) -> str:
    return _encode(_plain(obj))


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _scalar_text(v) -> str:
    if isinstance(v, float):
        return "%.12e" % v
    if v is None:
        return "null"
    return str(v).lower() if isinstance(v, bool) else str(v)


def _as_csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_scalar_text(v) for v in row])
    return buf.getvalue()


def render(doc: dict, fmt: str, text_lines: list[str] | None = None) -> str:
    doc = _plain(doc)
    if fmt == "json":
        return canonical_json(doc) + "\n"
    if fmt == "csv":
        return _as_csv([("key", "value")] + [(k, v) for k, v in _flatten(doc)])
    if text_lines is not None:
        return "\n".join(text_lines) + "\n"
    return "".join(f"{k} = {_scalar_text(v)}\n" for k, v in _flatten(doc))


# --- commands -----------------------------------------------------------------------


def constants_doc() -> dict:
    p = critical_params()
    return {
        "T": p.T,
        "a": p.a,
        "phi_star": p.phi_star,
        "inv_sinh2_T": 1.0 / p.sinhT**2,
        "four_pi_over_T": 4.0 * math.pi / p.T,
        "eight_pi_over_T": 8.0 * math.pi / p.T,
    }


def constants_text(doc: dict) -> list[str]:
    names = {
        "T": "T",
        "a": "a",
        "phi_star": "phi*",
        "inv_sinh2_T": "1/sinh^2 T",
        "four_pi_over_T": "4 pi/T",
        "eight_pi_over_T": "8 pi/T",
    }
    return [f"{names[k]} = {doc[k]:.12g}" for k in names]


def _grid(cfg: RunConfig) -> Grid1D:
    return Grid1D.uniform(Chart(cfg.chart), cfg.grid_n, critical_params())


def spectrum_doc(cfg: RunConfig) -> dict:
    p = critical_params()
    g = _grid(cfg)
    steklov = steklov_spectrum_J(cfg.modes, g, p)
    modes = []
    for sm in steklov:
        modes.append(
            {
                "mode": sm.mode,
                "dirichlet": robin_eigenvalues(sm.mode, g, p, 3, BoundaryCondition.DIRICHLET),
                "robin": robin_eigenvalues(sm.mode, g, p, 3, BoundaryCondition.ROBIN),
                "steklov": {
                    "even": sm.even,
                    "odd": sm.odd,
                    "singular_even_channel": sm.singular_even_channel,
                    "singular_odd_channel": sm.singular_odd_channel,
                },
            }
        )
    return {"chart": cfg.chart, "grid_n": cfg.grid_n, "modes": modes}


def spectrum_rows(doc: dict) -> list[tuple]:
    rows = [("mode", "problem", "k", "value")]
    for m in doc["modes"]:
        for prob in ("dirichlet", "robin"):
            rows += [(m["mode"], prob, k, v) for k, v in enumerate(m[prob])]
        for ch in ("even", "odd"):
            rows.append((m["mode"], f"steklov_{ch}", 0, m["steklov"][ch]))
    return rows


def index_doc(cfg: RunConfig) -> dict:
    p = critical_params()
    doc = morse_index(cfg.modes, _grid(cfg), p).as_dict()
    doc["chart"] = cfg.chart
    return doc


def dirichlet_doc(cfg: RunConfig) -> dict:
    p = critical_params()
    data = read_boundary_csv(cfg.data)
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    sol = solve_dirichlet(data, g, p)
    trace = [
        {"mode": n, "kind": kind, "value_at_plusT": plus, "value_at_minusT": minus}
        for (n, kind), (plus, minus) in sorted(sol.trace().items())
    ]
    return {"grid_n": cfg.grid_n, "trace": trace, "flux": sol.flux}


def verify_doc(cfg: RunConfig):
    res = run_all(VerifyConfig(cfg.grid_n, cfg.modes, cfg.tol, cfg.seed))
    doc = {
        "passed": res.passed,
        "converged": res.converged,
        "exit_code": res.exit_code(),
        "checks": [c.as_dict() for c in res.checks],
    }
    return doc, res


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def run(cfg: RunConfig) -> int:
    cfg.validate()
    fmt = cfg.format
    if cfg.command == "constants":
        doc = constants_doc()
        _emit(render(doc, fmt, constants_text(doc)))
        return EXIT_OK
    if cfg.command == "spectrum":
        doc = spectrum_doc(cfg)
        _emit(_as_csv(spectrum_rows(doc)) if fmt == "csv" else render(doc, fmt))
        return EXIT_OK
    if cfg.command == "index":
        doc = index_doc(cfg)
        if fmt == "csv":
            rows = [("mode", "negative", "near_zero")]
            rows += list(zip(range(cfg.modes + 1), doc["per_mode"], doc["per_mode_near_zero"]))
            _emit(_as_csv(rows))
        else:
            _emit(render(doc, fmt))
        return EXIT_OK if doc["converged"] else EXIT_NONCONV
    if cfg.command == "dirichlet":
        if cfg.data is None:
            raise ValueError("dirichlet needs --data FILE")
        doc = dirichlet_doc(cfg)
        if fmt == "csv":
            rows = [("mode", "cos_or_sin", "value_at_plusT", "value_at_minusT")]
            rows += [(t["mode"], t["kind"], t["value_at_plusT"], t["value_at_minusT"]) for t in doc["trace"]]
            _emit(_as_csv(rows) + f"# flux,{doc['flux']:.12e}\n")
        else:
            _emit(render(doc, fmt))
        return EXIT_OK
    if cfg.command == "verify":
        doc, res = verify_doc(cfg)
        if fmt == "csv":
            rows = [("criterion", "name", "passed", "actual", "expected", "tolerance")]
            rows += [(c.criterion, c.name, c.passed, c.actual, c.expected, c.tolerance) for c in res.checks]
            _emit(_as_csv(rows))
        else:
            _emit(render(doc, fmt, [c.line() for c in res.checks] + [f"exit status {res.exit_code()}"]))
        return res.exit_code()
    # report
    ver, res = verify_doc(cfg)
    doc = {
        "constants": constants_doc(),
        "spectrum": spectrum_doc(cfg),
        "index": index_doc(cfg),
        "verify": ver,
    }
    if cfg.data is not None:
        doc["dirichlet"] = dirichlet_doc(cfg)
    _emit(render(doc, fmt))
    return res.exit_code() if doc["index"]["converged"] else EXIT_NONCONV


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catenoid-index",
        description="Spectral verification of the critical catenoid's free-boundary index.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--grid-n", type=int, default=1024, help="nodes of the 1D grids (>= 64)")
    parser.add_argument("--modes", type=int, default=10, help="highest Fourier mode (>= 2)")
    parser.add_argument("--tol", type=float, default=1e-4, help="tolerance for Steklov checks, in (0, 0.1]")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--chart", choices=("s", "phi"), default="s")
    parser.add_argument("--data", help="boundary-data CSV for the dirichlet command")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = RunConfig(ns.command, ns.grid_n, ns.modes, ns.tol, ns.format, ns.seed, ns.chart, ns.data)
    try:
        cfg.validate()
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except NotSolvableError as exc:
        print(f"NOT_SOLVABLE: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CatenoidError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
