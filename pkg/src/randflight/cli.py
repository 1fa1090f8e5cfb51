"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from randflight import density as dens
from randflight import io
from randflight.errors import ConfigError, DomainError, PoleError, SeriesError
from randflight.flight import SampleBatch, simulate_batch, simulate_fixed_k
from randflight.flight import count_distribution
from randflight.params import FlightParams, Model
from randflight.verify import SUITES, VerifyConfig, run_suite

log = logging.getLogger("randflight")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def parse_grid(spec: str) -> np.ndarray:
    """``a:b:step`` -> a, a+step, ..., up to and including b."""
    try:
        a, b, step = (float(v) for v in spec.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like a:b:step, got {spec!r}") from None
    if step <= 0 or b < a:
        raise ConfigError("grid needs step > 0 and a <= b")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _add_flight_args(p: argparse.ArgumentParser, dim_default: int | None = 3) -> None:
    p.add_argument("--model", choices=[m.value for m in Model], default="x")
    p.add_argument("--dim", type=int, default=dim_default)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randflight", description="Random flights with Dirichlet times.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate final positions")
    _add_flight_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--k", type=int, default=None, help="condition on k direction changes")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("density", help="tabulate a radial law")
    _add_flight_args(p)
    p.add_argument("--law", choices=[k.value for k in dens.Kind], default="unconditional")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--grid", default="0:0.9:0.1")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("pmf", help="tabulate the direction-change count law")
    _add_flight_args(p)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--model", choices=[m.value for m in Model], default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=_seed, default=2024)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--which", default=None, help="PDE check name, 'acceptance' or 'all'")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def _config_echo(args: argparse.Namespace, argv: list[str]) -> dict:
    conf = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    return {"config": conf, "argv": argv}


def _emit_table(out: Path | None, header, columns, meta: dict) -> None:
    if out is None:
        sys.stdout.write(io.format_rows(header, columns))
        return
    side = io.write_table(out, header, columns, meta)
    log.info("wrote %s and %s", out, side)


def cmd_simulate(args, echo: dict) -> int:
    params = FlightParams(args.model, args.dim, args.c, args.lam, args.t)
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    if args.k is not None:
        if params.model is Model.U3:
            raise ConfigError("--k is not supported for model u3")
        pos = simulate_fixed_k(params, args.k, args.n, args.seed)
        batch = SampleBatch(pos, np.full(args.n, args.k), params, args.seed)
    else:
        batch = simulate_batch(params, args.n, args.seed, workers=max(1, args.workers))
    header, cols = batch.columns()
    _emit_table(args.out, header, cols, {**echo, **batch.meta()})
    return EXIT_OK


def cmd_density(args, echo: dict) -> int:
    law = dens.RadialLaw(Model(args.model), args.dim, args.c, args.lam, args.t, args.law, args.k)
    r = parse_grid(args.grid)
    if r[0] < 0:
        raise ConfigError("radial grid must start at r >= 0")
    if r[-1] >= law.ct:
        raise DomainError(f"grid reaches r = {r[-1]:g} but the support is r < ct = {law.ct:g}")
    values = np.atleast_1d(dens.law_density(law, r))
    marginal = np.atleast_1d(dens.radial_marginal(law, r))
    _emit_table(args.out, ["r", "density", "radial_marginal"], [r, values, marginal],
                {**echo, "law": law.to_dict()})
    return EXIT_OK


def cmd_pmf(args, echo: dict) -> int:
    params = FlightParams(args.model, args.dim, args.c, args.lam, args.t)
    if params.model is Model.U3:
        raise ConfigError("model u3 has Poisson event counts; use model x or y")
    dist = count_distribution(params)
    kmax = dist.support_size() - 1 if args.kmax is None else args.kmax
    ks = np.arange(kmax + 1)
    probs = np.array([dist.pmf(int(k)) for k in ks])
    _emit_table(args.out, ["k", "pmf"], [ks, probs],
                {**echo, "family": dist.family.value, "lt": dist.lt})
    return EXIT_OK


def cmd_verify(args, echo: dict) -> int:
    cfg = VerifyConfig(
        model=None if args.model is None else Model(args.model), d=args.dim, lam=args.lam,
        c=args.c, t=args.t, n=args.n, seed=args.seed, k=args.k, which=args.which, tol=args.tol,
    )
    if cfg.model is not None and cfg.d is not None:
        FlightParams(cfg.model, cfg.d, cfg.c, cfg.lam, cfg.t)
    try:
        checks = run_suite(args.suite, cfg)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    ok = all(c["passed"] for c in checks)
    report = {**echo, "suite": args.suite, "passed": ok, "checks": checks}
    text = io.dumps(report) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    for c in checks:
        if not c["passed"]:
            log.error("check failed: %s", c["name"])
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args, _config_echo(args, argv))
    except (ConfigError, DomainError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SeriesError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
