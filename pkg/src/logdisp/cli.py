"""Command line entry point: ``logdisp run | self-test | list-scenarios``.

Exit codes: 0 success, 1 configuration error, 2 a check failed.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import os
import sys
import tempfile
import time
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .scenarios import SCENARIOS, ConfigError, Table

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2
RUN_KEYS = {"scenario", "outdir", "workers", "plot"}


def _fmt(v) -> str:
    return format(float(v), ".17g")


def render_csv(table: Table, config_sha256: str) -> str:
    buf = io.StringIO()
    buf.write(
        f"# config_sha256={config_sha256} logdisp={__version__} numpy={np.__version__} scipy={scipy.__version__}\n"
    )
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def packaged_config(name: str) -> str | None:
    res = resources.files("logdisp") / "configs" / f"{name}.ini"
    return res.read_text() if res.is_file() else None


def load_config(path: str) -> tuple[configparser.ConfigParser, str]:
    """Read an INI file (or the packaged config of that scenario name)."""
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    else:
        text = packaged_config(path)
        if text is None:
            raise ConfigError(f"no such config file or packaged scenario: {path}")
    return load_config_text(text, path)


def load_config_text(text: str, origin: str = "<string>") -> tuple[configparser.ConfigParser, str]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case (B0, B1)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {origin}: {exc}") from exc
    return parser, hashlib.sha256(text.encode()).hexdigest()


def run_config(parser: configparser.ConfigParser, sha: str, outdir: str | None = None, quiet: bool = False) -> tuple[Table, Path]:
    if not parser.has_section("run"):
        raise ConfigError("missing [run] section")
    run = parser["run"]
    unknown = set(run.keys()) - RUN_KEYS
    if unknown:
        raise ConfigError(f"[run] unknown keys: {', '.join(sorted(unknown))}")
    name = run.get("scenario")
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; see `logdisp list-scenarios`")
    extra = set(parser.sections()) - {"run", name}
    if extra:
        raise ConfigError(f"unexpected sections: {', '.join(sorted(extra))}")
    try:
        workers = int(run.get("workers", "1"))
        plot = run.getboolean("plot", fallback=True)
    except ValueError as exc:
        raise ConfigError(f"[run] {exc}") from exc
    if workers < 1:
        raise ConfigError("[run] workers must be >= 1")
    scenario = SCENARIOS[name]
    params = scenario.parse(parser[name] if parser.has_section(name) else None)
    target = Path(os.environ.get("LOGDISP_OUTDIR") or outdir or run.get("outdir", "logdisp_out"))
    try:
        table = scenario.run(params, workers)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] rejected parameters: {exc}") from exc
    target.mkdir(parents=True, exist_ok=True)
    (target / f"{name}.csv").write_text(render_csv(table, sha))
    if plot and table.plot:
        (target / f"{name}.svg").write_text(table.plot)
    if not quiet:
        for label, ok, detail in table.checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {label}" + (f"  [{detail}]" if detail else ""))
        print(f"wrote {target / (name + '.csv')}")
    return table, target


def _cmd_run(args) -> int:
    parser, sha = load_config(args.config)
    if args.workers is not None:
        if not parser.has_section("run"):
            raise ConfigError("missing [run] section")
        parser["run"]["workers"] = str(args.workers)
    table, _ = run_config(parser, sha, args.outdir)
    return EXIT_OK if table.passed else EXIT_FAILED


def _cmd_list(args) -> int:
    for name, sc in sorted(SCENARIOS.items()):
        print(f"{name}: {sc.summary}")
        if args.verbose:
            for key, (kind, default) in sc.schema.items():
                print(f"    {key} ({kind}) = {default}")
    return EXIT_OK


DETERMINISM_CONFIG = """\
[run]
scenario = fp_decay
workers = 2
plot = yes

[fp_decay]
orders = 1 2
times = 0.5 1
"""


def determinism_check():
    """Run a small scenario twice through the file pipeline and compare bytes."""
    outputs = []
    saved = os.environ.pop("LOGDISP_OUTDIR", None)
    try:
        for _ in range(2):
            parser, sha = load_config_text(DETERMINISM_CONFIG)
            with tempfile.TemporaryDirectory() as tmp:
                run_config(parser, sha, tmp, quiet=True)
                outputs.append(tuple((Path(tmp) / f).read_bytes() for f in ("fp_decay.csv", "fp_decay.svg")))
    finally:
        if saved is not None:
            os.environ["LOGDISP_OUTDIR"] = saved
    yield "cli: repeated run is byte-identical", (outputs[0] == outputs[1], f"{len(outputs[0][0])} csv bytes")


def _cmd_self_test(args) -> int:
    from .selftest import run_self_test

    if not 0.0 < args.vacuum_floor <= 1.0:
        raise ConfigError("--vacuum-floor must lie in (0, 1]")
    start = time.perf_counter()
    outcomes = run_self_test(args.vacuum_floor, extra=[lambda _floor: determinism_check()])
    for o in outcomes:
        print(f"{'PASS' if o.passed else 'FAIL'}  {o.name}  [{o.detail}]")
    failed = sum(not o.passed for o in outcomes)
    print(f"{len(outcomes) - failed}/{len(outcomes)} passed in {time.perf_counter() - start:.1f} s")
    return EXIT_OK if failed == 0 else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logdisp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"logdisp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario from an INI config")
    p.add_argument("config", help="path to an INI file, or the name of a packaged scenario config")
    p.add_argument("--outdir", help="output directory (LOGDISP_OUTDIR takes precedence)")
    p.add_argument("--workers", type=int, help="override [run] workers")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("self-test", help="fast invariant checks across all modules")
    p.add_argument("--vacuum-floor", type=float, default=1e-30, help="relative density floor inside the logarithm")
    p.set_defaults(func=_cmd_self_test)

    p = sub.add_parser("list-scenarios", help="list available scenarios")
    p.add_argument("-v", "--verbose", action="store_true", help="also list keys and defaults")
    p.set_defaults(func=_cmd_list)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
