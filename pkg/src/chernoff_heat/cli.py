"""Command-line front end: configured runs, convergence tables, selftest.

Exit codes: 0 on success, 1 for a failed selftest group, 2 for a
configuration problem (message names the offending key), 3 for a
numeric failure (message names the error class).  All file output uses
full round-trip precision so identical configurations reproduce
identical bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from .chernoff import ChernoffScheme, convergence_study
from .config import (
    build_domain,
    build_reference,
    build_scheme_config,
    build_u0,
    load_config,
)
from .errors import ChernoffHeatError, ConfigError
from .selftest import run_selftest

__all__ = ["main"]


def _thread_limiter(threads: int | None):
    """Cap BLAS/OpenMP pools from --threads or CHERNOFF_HEAT_THREADS."""
    if threads is None:
        raw = os.environ.get("CHERNOFF_HEAT_THREADS")
        if raw is not None:
            try:
                threads = int(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"CHERNOFF_HEAT_THREADS must be an integer, got {raw!r}"
                ) from exc
    if threads is None:
        return nullcontext()
    if threads < 1:
        raise ConfigError(f"thread count must be at least 1, got {threads}")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return nullcontext()
    return threadpool_limits(limits=threads)


def _output_dir(arg: str | None, cfg: dict) -> Path:
    target = arg if arg is not None else cfg.get("output", {}).get("dir", ".")
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_snapshot(path: Path, field, mask) -> None:
    nodes = field.grid.nodes()[mask]
    values = field.values[mask]
    with open(path, "w") as handle:
        if field.grid.ndim == 1:
            handle.write("x,value\n")
            for x, v in zip(nodes, values):
                handle.write(f"{x:.17g},{v:.17g}\n")
        else:
            handle.write("x,y,value\n")
            for (x, y), v in zip(nodes, values):
                handle.write(f"{x:.17g},{y:.17g},{v:.17g}\n")


def cmd_run(ns: argparse.Namespace) -> int:
    cfg = load_config(ns.config, variant=ns.variant)
    dom = build_domain(cfg["domain"])
    u0 = build_u0(cfg["u0"], dom)
    scheme_cfg = build_scheme_config(cfg, dom, ns.variant)
    out_dir = _output_dir(ns.out, cfg)

    scheme = ChernoffScheme(dom, scheme_cfg)
    u0_field = scheme.initial_field(u0)
    mask = scheme.frame.inside
    for n in sorted(set(scheme_cfg.steps)):
        result = scheme.evolve(u0_field, n)
        name = f"field_{scheme_cfg.variant}_n{n}.csv"
        _write_snapshot(out_dir / name, result, mask)
        sup = float(np.max(np.abs(result.values[mask])))
        print(f"n={n} sup_norm={sup:.17g} wrote {name}")
    return 0


def cmd_converge(ns: argparse.Namespace) -> int:
    cfg = load_config(ns.config, variant=ns.variant)
    dom = build_domain(cfg["domain"])
    u0 = build_u0(cfg["u0"], dom)
    scheme_cfg = build_scheme_config(cfg, dom, ns.variant)
    out_dir = _output_dir(ns.out, cfg)

    reference = build_reference(cfg, dom, scheme_cfg, u0)
    label = cfg.get("reference", "none")
    report = convergence_study(
        dom,
        scheme_cfg,
        u0,
        reference,
        reference_label="self" if label == "none" else label,
    )
    name = f"convergence_{scheme_cfg.variant}.csv"
    report.to_csv(out_dir / name)
    for line in report.summary_lines():
        print(line)
    print(f"wrote {name}")
    return 0


def cmd_selftest(ns: argparse.Namespace) -> int:
    results = run_selftest(seed=ns.seed, fault=ns.fault)
    for result in results:
        if result.passed:
            print(f"PASS {result.name}")
        else:
            print(f"FAIL {result.name}: {result.detail}")
    return 0 if all(r.passed for r in results) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chernoff-heat",
        description=(
            "Product-formula heat flow on smooth bounded domains with "
            "Robin, Neumann or Dirichlet boundary treatment"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config: bool) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="JSON experiment file")
            p.add_argument("--out", default=None, help="output directory")
            p.add_argument(
                "--variant", default=None, help="override the configured variant"
            )
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="cap worker threads (default: CHERNOFF_HEAT_THREADS or unlimited)",
        )

    run_p = sub.add_parser("run", help="evolve once per configured step count")
    common(run_p, needs_config=True)
    run_p.set_defaults(func=cmd_run)

    conv_p = sub.add_parser("converge", help="error table against a reference")
    common(conv_p, needs_config=True)
    conv_p.set_defaults(func=cmd_converge)

    self_p = sub.add_parser("selftest", help="run the built-in invariant suite")
    common(self_p, needs_config=False)
    self_p.add_argument(
        "--fault",
        default=None,
        choices=["kink_sign"],
        help="deliberately corrupt a component (reporting-path test hook)",
    )
    self_p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        with _thread_limiter(ns.threads):
            return ns.func(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ChernoffHeatError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
